"""Discrete angular measures, de Haan representers, and sphere constants.

A d-dimensional max-stable law with unit-alpha-Frechet margins is described
here in two interchangeable discrete forms:

* an :class:`AngularMeasure` ``H`` on the positive unit sphere of a reference
  gauge, normalized so that every marginal moment ``sum_j w_j s_{j,i}^alpha``
  equals 1, and
* a :class:`DeHaanRepresenter` ``Z``, a finitely supported law of a
  nonnegative vector with ``E[Z_i^alpha] = 1`` for every coordinate.

``canonical_representer`` and ``angular_from_representer`` convert between
the two; ``reproject`` moves a measure between reference gauges without
changing the law it encodes.

Total-variation convention
--------------------------
``tv_distance`` implements the *unhalved* convention

    ||mu - nu||_TV = sup_A |mu(A) - nu(A)|

on not-necessarily-probability measures.  Every distance bound in
:mod:`maxstab.bounds` is calibrated against this convention; the common
"half L1" convention would silently scale those bounds by 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceWarning, ValidationError
from .norms import NormSpec

__all__ = [
    "AngularMeasure",
    "DeHaanRepresenter",
    "SphereConstants",
    "angular_from_representer",
    "canonical_representer",
    "m_alpha_closed_form",
    "numeric_sphere_sup",
    "reproject",
    "sphere_constants",
    "tv_distance",
]

SPHERE_TOL = 1e-9          # |tau(atom) - 1| after renormalization
SPHERE_SNAP_TOL = 1e-6     # constructors renormalize within this, reject beyond
MOMENT_TOL = 1e-8          # unit alpha-moment validation
ATOM_MERGE_TOL = 1e-9      # sup-norm radius for identifying equal atoms
PROB_TOL = 1e-12           # probabilities must sum to 1 within this


def _as_points(points, dim_hint=None) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.size == 0:
        raise ValidationError("atom points must form a nonempty (m, d) array")
    if not np.all(np.isfinite(pts)) or np.any(pts < 0):
        raise ValidationError("atom points must be finite and nonnegative")
    if dim_hint is not None and pts.shape[1] != dim_hint:
        raise ValidationError(f"atom points have dimension {pts.shape[1]}, expected {dim_hint}")
    return pts


def _as_weights(weights, n) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (n,):
        raise ValidationError(f"got {w.size} weights for {n} atoms")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError("atom weights must be finite and strictly positive")
    return w


def _merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float = ATOM_MERGE_TOL):
    """Merge atoms whose points agree within ``tol`` in the sup norm.

    Atoms are visited in lexicographic order and folded into the first
    (lexicographically smallest) member of their group, which fixes the tie
    rule deterministically.
    """
    order = np.lexsort(points.T[::-1])
    pts, w = points[order], weights[order]
    out_pts: list[np.ndarray] = []
    out_w: list[float] = []
    for p, ww in zip(pts, w):
        if out_pts and np.max(np.abs(p - out_pts[-1])) <= tol:
            out_w[-1] += ww
        else:
            out_pts.append(p)
            out_w.append(float(ww))
    return np.array(out_pts), np.array(out_w)


@dataclass(frozen=True, eq=False)
class AngularMeasure:
    """Finitely supported angular measure on a positive unit sphere.

    Parameters
    ----------
    dim, alpha, norm:
        Ambient dimension, stability index, and the reference gauge whose
        unit sphere carries the atoms.
    points, weights:
        Atom locations (m, d) and strictly positive masses (m,).  Points
        within ``1e-6`` of the sphere are snapped onto it; anything further
        off is rejected.
    relaxed:
        When False (default) the marginal moments
        ``sum_j w_j s_{j,i}^alpha`` must equal 1 within ``1e-8`` for every
        coordinate.  When True the measure is accepted as-is and the actual
        moments are recorded in :attr:`marginal_moments`.
    """

    dim: int
    alpha: float
    norm: NormSpec
    points: np.ndarray
    weights: np.ndarray
    relaxed: bool = False
    marginal_moments: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError("dimension must be at least 1")
        if not (self.alpha > 0) or not math.isfinite(self.alpha):
            raise ValidationError("alpha must be a positive finite real")
        pts = _as_points(self.points, self.dim)
        w = _as_weights(self.weights, pts.shape[0])
        t = np.asarray(self.norm.evaluate(pts), dtype=float).reshape(-1)
        if np.any(t <= 0):
            raise ValidationError("atoms must be nonzero")
        off = np.abs(t - 1.0)
        if np.any(off > SPHERE_SNAP_TOL):
            raise ValidationError(
                f"atom lies off the unit sphere by {off.max():.3e} (> {SPHERE_SNAP_TOL:g})")
        pts = pts / t[:, None]
        if np.any(np.abs(self.norm.evaluate(pts) - 1.0) > SPHERE_TOL):
            raise ValidationError("sphere renormalization failed to reach tolerance")
        moments = (w[:, None] * pts ** self.alpha).sum(axis=0)
        if not self.relaxed and np.any(np.abs(moments - 1.0) > MOMENT_TOL):
            raise ValidationError(
                "marginal moments deviate from 1 by "
                f"{np.abs(moments - 1.0).max():.3e}; pass relaxed=True to admit this measure")
        pts.flags.writeable = False
        w.flags.writeable = False
        moments.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "marginal_moments", moments)

    @classmethod
    def from_atoms(cls, dim, alpha, norm, atoms, relaxed=False) -> "AngularMeasure":
        """Build from an iterable of ``(point, weight)`` pairs."""
        pts = np.array([np.asarray(p, dtype=float) for p, _ in atoms])
        w = np.array([float(ww) for _, ww in atoms])
        return cls(dim=dim, alpha=alpha, norm=norm, points=pts, weights=w, relaxed=relaxed)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def normalized(self) -> bool:
        return bool(np.all(np.abs(self.marginal_moments - 1.0) <= MOMENT_TOL))

    def merged(self, tol: float = ATOM_MERGE_TOL) -> "AngularMeasure":
        pts, w = _merge_atoms(self.points, self.weights, tol)
        return AngularMeasure(dim=self.dim, alpha=self.alpha, norm=self.norm,
                              points=pts, weights=w, relaxed=self.relaxed)

    def allclose(self, other: "AngularMeasure", tol: float = 1e-10) -> bool:
        """Atomwise equality after merging, up to ``tol`` on points and weights."""
        if (self.dim, self.norm) != (other.dim, other.norm):
            return False
        a, b = self.merged(), other.merged()
        if a.n_atoms != b.n_atoms:
            return False
        return bool(np.all(np.abs(a.points - b.points) <= tol)
                    and np.all(np.abs(a.weights - b.weights) <= tol))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "alpha": self.alpha,
            "norm": self.norm.to_dict(),
            "atoms": [[list(map(float, p)), float(w)]
                      for p, w in zip(self.points, self.weights)],
        }

    @classmethod
    def from_dict(cls, doc: dict, relaxed: bool = False) -> "AngularMeasure":
        return cls.from_atoms(dim=int(doc["dim"]), alpha=float(doc["alpha"]),
                              norm=NormSpec.from_dict(doc["norm"]),
                              atoms=[(p, w) for p, w in doc["atoms"]], relaxed=relaxed)

    def __repr__(self) -> str:
        return (f"AngularMeasure(dim={self.dim}, alpha={self.alpha:g}, norm={self.norm}, "
                f"atoms={self.n_atoms}, mass={self.total_mass:.6g})")


@dataclass(frozen=True, eq=False)
class DeHaanRepresenter:
    """Finitely supported law of a nonnegative vector with unit alpha-moments.

    The simulation- and transport-facing dual of :class:`AngularMeasure`:
    probabilities sum to 1, ``E[Z_i^alpha] = 1`` per coordinate, and every
    atom has at least one strictly positive coordinate.
    """

    dim: int
    alpha: float
    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError("dimension must be at least 1")
        if not (self.alpha > 0) or not math.isfinite(self.alpha):
            raise ValidationError("alpha must be a positive finite real")
        pts = _as_points(self.points, self.dim)
        p = _as_weights(self.probs, pts.shape[0])
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        if np.any(pts.max(axis=1) <= 0):
            raise ValidationError("every atom needs at least one positive coordinate")
        moments = (p[:, None] * pts ** self.alpha).sum(axis=0)
        if np.any(np.abs(moments - 1.0) > MOMENT_TOL):
            raise ValidationError(
                f"alpha-moments deviate from 1 by {np.abs(moments - 1.0).max():.3e}")
        pts = pts.copy()
        p = p.copy()
        pts.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_atoms(cls, dim, alpha, atoms) -> "DeHaanRepresenter":
        pts = np.array([np.asarray(p, dtype=float) for p, _ in atoms])
        p = np.array([float(q) for _, q in atoms])
        return cls(dim=dim, alpha=alpha, points=pts, probs=p)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    def merged(self, tol: float = ATOM_MERGE_TOL) -> "DeHaanRepresenter":
        pts, p = _merge_atoms(self.points, self.probs, tol)
        return DeHaanRepresenter(dim=self.dim, alpha=self.alpha, points=pts, probs=p)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "alpha": self.alpha,
            "atoms": [[list(map(float, z)), float(q)]
                      for z, q in zip(self.points, self.probs)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DeHaanRepresenter":
        return cls.from_atoms(dim=int(doc["dim"]), alpha=float(doc["alpha"]),
                              atoms=[(z, q) for z, q in doc["atoms"]])

    def __repr__(self) -> str:
        return (f"DeHaanRepresenter(dim={self.dim}, alpha={self.alpha:g}, "
                f"atoms={self.n_atoms})")


class SphereConstants(NamedTuple):
    """Scalar constants of a measure/sphere pair used by the distance bounds."""

    m_alpha: float   # sup of ||u||_alpha^alpha over the sphere
    nu0: float       # total angular mass H(sphere)
    c_inf: float     # sup of ||u||_inf over the sphere, clamped to >= 1
    b: float         # total mass used by canonicalization (== nu0)


def canonical_representer(H: AngularMeasure) -> DeHaanRepresenter:
    """The representer ``b^(1/alpha) * Theta`` with ``Theta ~ H / b``.

    Requires a normalized measure (unit marginal moments); the returned
    representer has atoms ``b^(1/alpha) s_j`` with probabilities ``w_j / b``.
    """
    if not H.normalized:
        raise ValidationError("canonical representer requires unit marginal moments")
    b = H.total_mass
    if not (b > 0):
        raise ValidationError("angular measure has no mass")
    scale = b ** (1.0 / H.alpha)
    return DeHaanRepresenter(dim=H.dim, alpha=H.alpha,
                             points=scale * H.points, probs=H.weights / b)


def angular_from_representer(Z: DeHaanRepresenter, norm: NormSpec) -> AngularMeasure:
    """Angular measure of the law generated by ``Z`` on the sphere of ``norm``.

    Atom ``z_j`` maps to ``z_j / tau(z_j)`` with mass ``p_j tau(z_j)^alpha``;
    coinciding images are merged.  Inverse of :func:`canonical_representer`
    up to atom merging.
    """
    t = np.asarray(norm.evaluate(Z.points), dtype=float).reshape(-1)
    if np.any(t <= 0):
        raise ValidationError("gauge vanishes on a representer atom")
    pts = Z.points / t[:, None]
    w = Z.probs * t ** Z.alpha
    pts, w = _merge_atoms(pts, w)
    return AngularMeasure(dim=Z.dim, alpha=Z.alpha, norm=norm, points=pts, weights=w)


def reproject(H: AngularMeasure, new_norm: NormSpec) -> AngularMeasure:
    """Move ``H`` to the unit sphere of ``new_norm``.

    Atom ``u`` moves to ``u / tau_new(u)`` with weight ``w * tau_new(u)^alpha``;
    the exponent function of the encoded law is invariant under this map.
    """
    t = np.asarray(new_norm.evaluate(H.points), dtype=float).reshape(-1)
    if np.any(t <= 0):
        raise ValidationError("target gauge vanishes on an atom")
    pts = H.points / t[:, None]
    w = H.weights * t ** H.alpha
    pts, w = _merge_atoms(pts, w)
    return AngularMeasure(dim=H.dim, alpha=H.alpha, norm=new_norm,
                          points=pts, weights=w, relaxed=H.relaxed)


def m_alpha_closed_form(p: float, alpha: float, d: int) -> float:
    """``sup ||u||_alpha^alpha`` over the positive unit l_p sphere: ``d^max(0, 1-alpha/p)``."""
    if not (p > 0) or not (alpha > 0) or d < 1:
        raise ValidationError("need p > 0, alpha > 0, d >= 1")
    ratio = 0.0 if math.isinf(p) else alpha / p
    return float(d) ** max(0.0, 1.0 - ratio)


class SphereSupResult(NamedTuple):
    value: float
    point: np.ndarray
    converged: bool


def numeric_sphere_sup(norm: NormSpec, alpha: float, dim: int,
                       n_steps: int = 600) -> SphereSupResult:
    """Maximize ``sum_i u_i^alpha`` over the positive unit sphere of ``norm``.

    Deterministic multistart projected gradient ascent.  Starts are the
    uniform points of every nonempty coordinate face (projected onto the
    sphere), which contains the exact maximizer for every plain l_p gauge:
    a vertex when ``alpha >= p`` and the barycenter when ``alpha < p``.
    """
    if dim < 1:
        raise ValidationError("dimension must be at least 1")

    def f(u):
        return float(np.sum(u ** alpha))

    def grad(u):
        g = np.zeros_like(u)
        pos = u > 0
        g[pos] = alpha * u[pos] ** (alpha - 1.0)
        return g

    starts = []
    for mask in range(1, 2 ** dim):
        u = np.array([(mask >> i) & 1 for i in range(dim)], dtype=float)
        starts.append(norm.scale_to_sphere(u))

    best_val, best_u, best_conv = -np.inf, None, False
    for u0 in starts:
        u = u0.copy()
        val = f(u)
        step = 0.1
        converged = False
        for _ in range(n_steps):
            g = grad(u)
            cand = np.clip(u + step * g, 0.0, None)
            if not np.any(cand > 0):
                step *= 0.5
                continue
            cand = norm.scale_to_sphere(cand)
            v = f(cand)
            if v > val + 1e-16:
                if v - val < 1e-14:
                    converged = True
                u, val = cand, v
                step *= 1.25
            else:
                step *= 0.5
                if step < 1e-15:
                    converged = True
                    break
        if val > best_val:
            best_val, best_u, best_conv = val, u, converged
    return SphereSupResult(best_val, best_u, best_conv)


def _c_inf_for(norm: NormSpec, dim: int) -> float:
    """sup of the max-coordinate over the unit sphere of ``norm`` (>= 1 clamp).

    For weighted gauges the supremum sits on the axis of the smallest weight:
    ``(min w)^(-1/p)`` for finite p and ``1 / min w`` for p = inf.  Values
    below 1 are clamped to 1; this never changes any alpha-mismatch bound
    because the ``C^a ln C`` term is nonpositive for C <= 1 and zero at 1.
    """
    if norm.is_plain_lp:
        return 1.0
    w = norm.weight_array(dim)
    raw = 1.0 / w.min() if math.isinf(norm.p) else float(w.min() ** (-1.0 / norm.p))
    return max(raw, 1.0)


def sphere_constants(H: AngularMeasure) -> SphereConstants:
    """Constants (M_alpha, nu0, C_inf, b) of the sphere carrying ``H``.

    M_alpha uses the closed form for plain l_p gauges and the deterministic
    numeric maximizer for weighted gauges.  For plain l_p gauges the total
    mass of a normalized measure must lie in
    ``[d^min(1, alpha/p), d^max(1, alpha/p)]``; deviations raise a warning,
    not an error.
    """
    if H.norm.is_plain_lp:
        m_alpha = m_alpha_closed_form(H.norm.p, H.alpha, H.dim)
    else:
        res = numeric_sphere_sup(H.norm, H.alpha, H.dim)
        if not res.converged:
            warnings.warn(
                f"numeric sphere maximization did not converge; using achieved value {res.value:.6g}",
                ConvergenceWarning, stacklevel=2)
        m_alpha = res.value
    nu0 = H.total_mass
    if H.norm.is_plain_lp and H.normalized:
        ratio = 0.0 if math.isinf(H.norm.p) else H.alpha / H.norm.p
        lo = float(H.dim) ** min(1.0, ratio)
        hi = float(H.dim) ** max(1.0, ratio)
        if not (lo - 1e-9 <= nu0 <= hi + 1e-9):
            warnings.warn(
                f"total mass {nu0:.6g} outside the l_p range [{lo:.6g}, {hi:.6g}]",
                UserWarning, stacklevel=2)
    return SphereConstants(m_alpha=float(m_alpha), nu0=nu0,
                           c_inf=_c_inf_for(H.norm, H.dim), b=nu0)


def tv_distance(H1: AngularMeasure, H2: AngularMeasure) -> float:
    """Unhalved total variation ``sup_A |H1(A) - H2(A)|`` between discrete measures.

    Both measures must live on the same sphere (dimension, alpha, and gauge);
    reproject first if they do not.  Atoms are identified when they agree
    within ``1e-9`` in the sup norm.
    """
    if H1.dim != H2.dim:
        raise ValidationError("dimension mismatch")
    if H1.alpha != H2.alpha:
        raise ValidationError("stability index mismatch")
    if H1.norm != H2.norm:
        raise ValidationError("measures live on different spheres; reproject first")
    pts = np.vstack([H1.points, H2.points])
    signed = np.concatenate([H1.weights, -H2.weights])
    order = np.lexsort(pts.T[::-1])
    pts, signed = pts[order], signed[order]
    pos = neg = 0.0
    acc = signed[0]
    anchor = pts[0]
    for p, s in zip(pts[1:], signed[1:]):
        if np.max(np.abs(p - anchor)) <= ATOM_MERGE_TOL:
            acc += s
        else:
            if acc > 0:
                pos += acc
            else:
                neg -= acc
            acc, anchor = s, p
    if acc > 0:
        pos += acc
    else:
        neg -= acc
    return max(pos, neg)
