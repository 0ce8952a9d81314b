"""Coordinate decomposition of exponent functions.

Every exponent function splits as ``V(x) = sum_i x_i^(-alpha) Psi_i(x)``
with 0-homogeneous weights ``Psi_i(x) in [0, 1]``.  For a discrete angular
measure the weights come from the lowest-index-argmax partition of the
sphere: atom ``s`` belongs to cell ``i`` iff

    s_i / x_i >  s_j / x_j   for all j < i,   and
    s_i / x_i >= s_j / x_j   for all j > i,

and ``Psi_i(x)`` collects ``w * s_i^alpha`` over cell ``i``.  The partition
is not unique at tie points; only the reconstruction identity is contractual
there.  For the Gaussian family the weights are normal CDFs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .distances import SectionSearchOptions, maximize_on_section
from .errors import NotSupportedError, ValidationError
from .mvn import MvnProblem, bivariate_normal_cdf, mvn_cdf, std_normal_cdf
from .spectral import AngularMeasure

__all__ = ["PsiVector", "psi_discrete", "psi_hr", "psi_sup_discrepancy"]

_TINY_LAMBDA = 1e-8
_HR_SEED = 90210


@dataclass(frozen=True)
class PsiVector:
    """Values ``Psi_1(x), ..., Psi_d(x)`` at a point, tagged with their source."""

    values: np.ndarray
    x: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if np.any(v < -1e-9) or np.any(v > 1.0 + 1e-9):
            raise ValidationError("psi values must lie in [0, 1]")
        v = np.clip(v, 0.0, 1.0).copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).copy())

    def reconstruct_exponent(self, alpha: float) -> float:
        with np.errstate(divide="ignore"):
            coeff = np.where(np.isinf(self.x), 0.0, self.x ** -alpha)
        return float((coeff * self.values).sum())


def psi_discrete_batch(H: AngularMeasure, X: np.ndarray) -> np.ndarray:
    """Lowest-index-argmax cell weights for a stack of points (n, d)."""
    ratios = H.points[None, :, :] / X[:, None, :]
    cells = np.argmax(ratios, axis=2)          # first maximum = lowest index
    s_alpha = H.points ** H.alpha
    n = X.shape[0]
    out = np.zeros((n, H.dim))
    rows = np.arange(n)
    for j in range(H.n_atoms):
        c = cells[:, j]
        out[rows, c] += H.weights[j] * s_alpha[j, c]
    return out


def psi_discrete(H: AngularMeasure, x) -> PsiVector:
    """Psi vector of a discrete angular measure at ``x > 0``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (H.dim,):
        raise ValidationError(f"point has dimension {x.size}, expected {H.dim}")
    if np.any(np.isnan(x)) or np.any(x <= 0):
        raise ValidationError("coordinates must be strictly positive")
    return PsiVector(values=psi_discrete_batch(H, x[None, :])[0], x=x,
                     source="discrete_spectral")


def _hr_thresholds(lam: np.ndarray, X: np.ndarray, i: int) -> np.ndarray:
    """Arguments ``q_j = lam_ij/2 + ln(x_j/x_i)/lam_ij`` for all partners of i.

    Pairs with lam below 1e-8 short-circuit to the comonotone limit: the
    partner threshold is +-inf by the sign of ln(x_j/x_i), and exact ties go
    to the lower index (the canonical selector).
    """
    d = lam.shape[0]
    others = [j for j in range(d) if j != i]
    n = X.shape[0]
    q = np.empty((n, d - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        for a, j in enumerate(others):
            lij = lam[i, j]
            ratio = np.log(X[:, j] / X[:, i])     # inf/inf -> nan handled below
            both_inf = np.isinf(X[:, j]) & np.isinf(X[:, i])
            if lij < _TINY_LAMBDA:
                col = np.where(ratio > 0, np.inf, np.where(ratio < 0, -np.inf,
                               np.inf if j > i else -np.inf))
            else:
                col = lij / 2.0 + ratio / lij
            # two infinite coordinates tie; the lower index wins
            col = np.where(both_inf, np.inf if j > i else -np.inf, col)
            q[:, a] = col
    return q


def psi_hr_batch(lam: np.ndarray, X: np.ndarray, i: int,
                 partner_corr: np.ndarray | None = None,
                 mvn_tol: float = 1e-7, seed: int = _HR_SEED) -> np.ndarray:
    d = lam.shape[0]
    if d == 1:
        return np.ones(X.shape[0])
    q = _hr_thresholds(lam, X, i)
    if d == 2:
        return std_normal_cdf(q[:, 0])
    if partner_corr is None:
        others = [j for j in range(d) if j != i]
        partner_corr = np.eye(d - 1)
        for a, j in enumerate(others):
            for b, k in enumerate(others):
                if j != k:
                    partner_corr[a, b] = (lam[i, j] ** 2 + lam[i, k] ** 2 - lam[j, k] ** 2) / (
                        2.0 * lam[i, j] * lam[i, k])
    if d == 3:
        return np.asarray(bivariate_normal_cdf(q[:, 0], q[:, 1], float(partner_corr[0, 1])))
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        out[r] = mvn_cdf(MvnProblem(upper=q[r], correlation=partner_corr,
                                    tol=mvn_tol, seed=seed)).value
    return out


def psi_hr(lam, x, i: int) -> float:
    """Psi_i(x) of the Gaussian-family model with dependence matrix ``lam``."""
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (lam.shape[0],):
        raise ValidationError(f"point has dimension {x.size}, expected {lam.shape[0]}")
    if np.any(np.isnan(x)) or np.any(x <= 0):
        raise ValidationError("coordinates must be strictly positive")
    if not 0 <= i < lam.shape[0]:
        raise ValidationError(f"coordinate index {i} out of range")
    return float(np.clip(psi_hr_batch(lam, x[None, :], i)[0], 0.0, 1.0))


def psi_sup_discrepancy(model1, model2, opts: SectionSearchOptions | None = None,
                        extra_points: np.ndarray | None = None) -> float:
    """``sup`` over the canonical section of ``sum_i |Psi_i^(1) - Psi_i^(2)|``.

    Both models must expose the decomposition and share dimension and alpha.
    The supremum is approximated by the shared canonical-section search; the
    returned value is always a valid lower bound of the true supremum, and it
    dominates the pointwise Kolmogorov objective on every searched point.
    ``extra_points`` (rows scaled onto the section) are always evaluated,
    which lets callers include an exact-distance witness.
    """
    if model1.dim != model2.dim:
        raise ValidationError("dimension mismatch")
    if model1.alpha != model2.alpha:
        raise ValidationError("stability index mismatch")
    if not (model1.supports_psi and model2.supports_psi):
        raise NotSupportedError("both models must expose a psi decomposition")

    def objective(U: np.ndarray) -> np.ndarray:
        return np.abs(model1.psi_batch(U) - model2.psi_batch(U)).sum(axis=1)

    if opts is None:
        opts = SectionSearchOptions()
    if extra_points is not None:
        extra = np.atleast_2d(np.asarray(extra_points, dtype=float))
        base = opts.extra_points
        extra = extra if base is None else np.vstack([np.atleast_2d(base), extra])
        opts = dataclasses.replace(opts, extra_points=extra)
    return maximize_on_section(objective, model1.dim, opts).value
