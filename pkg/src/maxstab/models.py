"""Max-stable model families and copula transforms.

Every model exposes the exponent function ``V`` of a max-stable df
``F = exp(-V)`` with unit-alpha-Frechet margins:

* ``logistic``       ``V(x) = (sum_j x_j^(-alpha/theta))^theta``
* ``independent``    ``V(x) = sum_j x_j^(-alpha)``
* ``comonotone``     ``V(x) = max_j x_j^(-alpha)``
* ``discrete_spectral``  ``V(x) = sum_j w_j max_i (s_ji / x_i)^alpha``
* ``husler_reiss`` / ``brown_resnick`` (alpha = 1)
  ``V(x) = sum_i x_i^(-1) Phi_{d-1}(q_i(x); R_i)`` with
  ``q_ij(x) = lam_ij/2 + ln(x_j/x_i)/lam_ij`` and
  ``R_i[jk] = (lam_ij^2 + lam_ik^2 - lam_jk^2) / (2 lam_ij lam_ik)``.

Coordinates of evaluation points may be ``+inf``, which drops the coordinate
(margin evaluation).  The logistic family is stated for alpha = 1 in the
source material; it generalizes here by keeping the stable tail dependence
function fixed and re-indexing the margins, i.e. ``V(x) = ell(x^-alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import psi as _psi
from .errors import NotSupportedError, ValidationError
from .norms import NormSpec
from .spectral import AngularMeasure, DeHaanRepresenter, canonical_representer

__all__ = [
    "GeneratorSpec",
    "MarginSpec",
    "MaxStableModel",
    "TransformedMaxStable",
    "archimax_copula",
    "ev_copula",
    "evaluate_F",
    "evaluate_V",
    "generator_clayton",
    "generator_exponential",
    "make_brown_resnick",
    "make_comonotone",
    "make_discrete_spectral",
    "make_husler_reiss",
    "make_independent",
    "make_logistic",
    "stdf",
    "to_unit_frechet",
    "transform_margins",
]

_TINY_LAMBDA = 1e-8   # below this an HR pair is treated as comonotone


def _check_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (dim,):
        raise ValidationError(f"point has dimension {x.size}, expected {dim}")
    if np.any(np.isnan(x)) or np.any(x <= 0):
        raise ValidationError("coordinates must be strictly positive (+inf allowed)")
    return x


def _check_batch(X, dim: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValidationError(f"batch must have shape (n, {dim})")
    if np.any(np.isnan(X)) or np.any(X <= 0):
        raise ValidationError("coordinates must be strictly positive (+inf allowed)")
    return X


class MaxStableModel:
    """Evaluator abstraction: dimension, alpha, V(x), and optional psi(x)."""

    family: str = "abstract"

    def __init__(self, dim: int, alpha: float):
        if dim < 1:
            raise ValidationError("dimension must be at least 1")
        if not (alpha > 0) or not math.isfinite(alpha):
            raise ValidationError("alpha must be a positive finite real")
        self.dim = int(dim)
        self.alpha = float(alpha)

    # -- exponent function ------------------------------------------------
    def exponent_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exponent(self, x) -> float:
        return float(self.exponent_batch(_check_point(x, self.dim)[None, :])[0])

    def cdf(self, x) -> float:
        return math.exp(-self.exponent(x))

    def stdf(self, z) -> float:
        """Stable tail dependence function ``ell(z) = V(z^(-1/alpha))``."""
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.shape != (self.dim,):
            raise ValidationError(f"point has dimension {z.size}, expected {self.dim}")
        if np.any(np.isnan(z)) or np.any(z < 0) or not np.any(z > 0):
            raise ValidationError("stdf needs a nonnegative, nonzero argument")
        with np.errstate(divide="ignore"):
            x = np.where(z > 0, z ** (-1.0 / self.alpha), np.inf)
        return self.exponent(x)

    # -- psi decomposition -------------------------------------------------
    @property
    def supports_psi(self) -> bool:
        return False

    def psi_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotSupportedError(f"{self.family} model does not expose a psi decomposition")

    def psi(self, x) -> np.ndarray:
        return self.psi_batch(_check_point(x, self.dim)[None, :])[0]

    # -- discrete structure (when available) -------------------------------
    def angular_measure(self) -> AngularMeasure | None:
        return None

    def canonical_representer(self) -> DeHaanRepresenter | None:
        H = self.angular_measure()
        return None if H is None else canonical_representer(H)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, alpha={self.alpha:g})"


class Logistic(MaxStableModel):
    family = "logistic"

    def __init__(self, dim: int, theta: float, alpha: float = 1.0):
        super().__init__(dim, alpha)
        if not (0.0 < theta <= 1.0):
            raise ValidationError(f"logistic dependence parameter must lie in (0, 1], got {theta}")
        self.theta = float(theta)

    def exponent_batch(self, X):
        X = _check_batch(X, self.dim)
        t = X ** (-self.alpha / self.theta)
        return t.sum(axis=1) ** self.theta

    @property
    def supports_psi(self) -> bool:
        return True

    def psi_batch(self, X):
        # Psi_i(x) = x_i^{a - a/th} (sum_j x_j^{-a/th})^{th - 1}
        X = _check_batch(X, self.dim)
        a, th = self.alpha, self.theta
        s = (X ** (-a / th)).sum(axis=1)
        return X ** (a - a / th) * s[:, None] ** (th - 1.0)


class Independent(MaxStableModel):
    family = "independent"

    def exponent_batch(self, X):
        X = _check_batch(X, self.dim)
        return (X ** -self.alpha).sum(axis=1)

    @property
    def supports_psi(self) -> bool:
        return True

    def psi_batch(self, X):
        X = _check_batch(X, self.dim)
        return np.ones_like(X)

    def angular_measure(self) -> AngularMeasure:
        return AngularMeasure(dim=self.dim, alpha=self.alpha, norm=NormSpec.lp(self.alpha),
                              points=np.eye(self.dim), weights=np.ones(self.dim))


class Comonotone(MaxStableModel):
    family = "comonotone"

    def exponent_batch(self, X):
        X = _check_batch(X, self.dim)
        return X.min(axis=1) ** -self.alpha

    @property
    def supports_psi(self) -> bool:
        return True

    def psi_batch(self, X):
        # the single spectral atom has equal coordinates: the lowest-index
        # minimizer of x collects the whole unit mass
        X = _check_batch(X, self.dim)
        out = np.zeros_like(X)
        out[np.arange(X.shape[0]), np.argmin(X, axis=1)] = 1.0
        return out

    def angular_measure(self) -> AngularMeasure:
        point = np.full((1, self.dim), float(self.dim) ** (-1.0 / self.alpha))
        return AngularMeasure(dim=self.dim, alpha=self.alpha, norm=NormSpec.lp(self.alpha),
                              points=point, weights=np.array([float(self.dim)]))


class DiscreteSpectral(MaxStableModel):
    family = "discrete_spectral"

    def __init__(self, measure: AngularMeasure):
        if not measure.normalized:
            raise ValidationError("discrete spectral model needs a normalized angular measure")
        super().__init__(measure.dim, measure.alpha)
        self.measure = measure

    def exponent_batch(self, X):
        X = _check_batch(X, self.dim)
        ratios = self.measure.points[None, :, :] / X[:, None, :]
        return (self.measure.weights[None, :] * ratios.max(axis=2) ** self.alpha).sum(axis=1)

    @property
    def supports_psi(self) -> bool:
        return True

    def psi_batch(self, X):
        X = _check_batch(X, self.dim)
        return _psi.psi_discrete_batch(self.measure, X)

    def angular_measure(self) -> AngularMeasure:
        return self.measure


class HuslerReiss(MaxStableModel):
    """Gaussian-family model; the exponent function runs through normal CDFs.

    ``lam`` is the symmetric dependence matrix with zero diagonal and strictly
    positive off-diagonal entries.  The model is accepted iff every
    ``R_i`` correlation matrix is positive semidefinite; this is a
    realizability proxy for ``lam^2`` being a variogram, not a full
    characterization.  The stability index is intrinsically 1; compose with
    :func:`transform_margins` for other margins.
    """

    family = "husler_reiss"

    def __init__(self, lam: np.ndarray, covariance: np.ndarray | None = None):
        lam = np.asarray(lam, dtype=float)
        d = lam.shape[0]
        if lam.shape != (d, d) or d < 1:
            raise ValidationError("dependence matrix must be square")
        if not np.allclose(lam, lam.T, atol=1e-12):
            raise ValidationError("dependence matrix must be symmetric")
        if np.any(np.abs(np.diag(lam)) > 0):
            raise ValidationError("dependence matrix must have zero diagonal")
        off = lam[~np.eye(d, dtype=bool)]
        if d > 1 and (np.any(off <= 0) or np.any(~np.isfinite(off))):
            raise ValidationError("off-diagonal entries must be finite and strictly positive "
                                  "(a zero entry is a degenerate pair)")
        super().__init__(d, 1.0)
        self.lam = lam
        self.covariance = None if covariance is None else np.asarray(covariance, dtype=float)
        self._partner_corr: list[np.ndarray] = []
        for i in range(d):
            others = [j for j in range(d) if j != i]
            R = np.eye(d - 1)
            for a, j in enumerate(others):
                for b, k in enumerate(others):
                    if j == k:
                        continue
                    R[a, b] = (lam[i, j] ** 2 + lam[i, k] ** 2 - lam[j, k] ** 2) / (
                        2.0 * lam[i, j] * lam[i, k])
            if d > 2:
                eigmin = float(np.linalg.eigvalsh(0.5 * (R + R.T)).min())
                if eigmin < -1e-10:
                    raise ValidationError(
                        f"partner correlation matrix {i} is indefinite "
                        f"(min eigenvalue {eigmin:.3e}); not realizable by a variogram")
            self._partner_corr.append(R)

    @property
    def supports_psi(self) -> bool:
        return True

    def psi_batch(self, X):
        X = _check_batch(X, self.dim)
        out = np.empty_like(X)
        for i in range(self.dim):
            out[:, i] = _psi.psi_hr_batch(self.lam, X, i, partner_corr=self._partner_corr[i])
        return out

    def exponent_batch(self, X):
        X = _check_batch(X, self.dim)
        with np.errstate(divide="ignore"):
            coeff = np.where(np.isinf(X), 0.0, 1.0 / X)
        return (coeff * self.psi_batch(X)).sum(axis=1)


class BrownResnick(HuslerReiss):
    """Husler-Reiss model parameterized by the covariance of the log-marks."""

    family = "brown_resnick"


def make_logistic(d: int, theta: float, alpha: float = 1.0) -> Logistic:
    return Logistic(d, theta, alpha)


def make_independent(d: int, alpha: float = 1.0) -> Independent:
    return Independent(d, alpha)


def make_comonotone(d: int, alpha: float = 1.0) -> Comonotone:
    return Comonotone(d, alpha)


def make_discrete_spectral(H: AngularMeasure) -> DiscreteSpectral:
    return DiscreteSpectral(H)


def make_husler_reiss(lam) -> HuslerReiss:
    return HuslerReiss(np.asarray(lam, dtype=float))


def make_brown_resnick(cov) -> BrownResnick:
    """Build the model from the covariance of its Gaussian log-marks.

    Dependence entries follow ``lam_ij^2 = Var(U_i - U_j)``; a pair with zero
    variogram is degenerate and rejected.
    """
    S = np.asarray(cov, dtype=float)
    d = S.shape[0]
    if S.shape != (d, d) or not np.allclose(S, S.T, atol=1e-10):
        raise ValidationError("covariance must be a symmetric square matrix")
    if d > 1 and float(np.linalg.eigvalsh(0.5 * (S + S.T)).min()) < -1e-10:
        raise ValidationError("covariance must be positive semidefinite")
    v = np.diag(S)
    gamma = v[:, None] + v[None, :] - 2.0 * S
    gamma = np.maximum(0.5 * (gamma + gamma.T), 0.0)
    return BrownResnick(np.sqrt(gamma), covariance=S)


def evaluate_V(model: MaxStableModel, x) -> float:
    return model.exponent(x)


def evaluate_F(model: MaxStableModel, x) -> float:
    return model.cdf(x)


def stdf(model: MaxStableModel, z) -> float:
    return model.stdf(z)


def ev_copula(model: MaxStableModel, u) -> float:
    """Extreme-value copula ``C(u) = exp(-ell(-ln u))`` of the model's law.

    Expressed through the stable tail dependence function, so models with any
    stability index are handled (the reparametrization to unit margins is
    implicit).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape != (model.dim,):
        raise ValidationError(f"point has dimension {u.size}, expected {model.dim}")
    if np.any(u <= 0) or np.any(u > 1):
        raise ValidationError("copula arguments must lie in (0, 1]")
    z = -np.log(u)
    if not np.any(z > 0):
        return 1.0
    return math.exp(-model.stdf(z))


@dataclass(frozen=True)
class MarginSpec:
    """Per-coordinate Frechet scale ``c_i > 0`` and index ``alpha_i > 0``."""

    scales: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.scales, dtype=float).reshape(-1)
        a = np.asarray(self.indices, dtype=float).reshape(-1)
        if c.size != a.size or c.size == 0:
            raise ValidationError("scales and indices must have equal positive length")
        if np.any(~np.isfinite(c)) or np.any(c <= 0) or np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise ValidationError("margin parameters must be finite and strictly positive")
        c, a = c.copy(), a.copy()
        c.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "scales", c)
        object.__setattr__(self, "indices", a)

    @property
    def dim(self) -> int:
        return self.scales.size


class TransformedMaxStable:
    """CDF evaluator with margins ``exp(-c_i x^(-alpha_i))`` over a base model."""

    def __init__(self, base: MaxStableModel, margins: MarginSpec):
        if margins.dim != base.dim:
            raise ValidationError("margin specification dimension mismatch")
        self.base = base
        self.margins = margins
        self.dim = base.dim

    def _pullback(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        with np.errstate(over="ignore"):
            y = (x ** self.margins.indices / self.margins.scales) ** (1.0 / self.base.alpha)
        return y

    def cdf(self, x) -> float:
        return self.base.cdf(self._pullback(x))

    def margin_cdf(self, i: int, x: float) -> float:
        return math.exp(-self.margins.scales[i] * x ** (-self.margins.indices[i]))

    def __repr__(self) -> str:
        return f"TransformedMaxStable(base={self.base!r})"


def transform_margins(model: MaxStableModel, margins: MarginSpec) -> TransformedMaxStable:
    """Compose the unit-Frechet model with per-coordinate Frechet margins."""
    return TransformedMaxStable(model, margins)


def to_unit_frechet(transformed: TransformedMaxStable) -> MaxStableModel:
    """Invert :func:`transform_margins`; the round trip is the identity."""
    return transformed.base


@dataclass(frozen=True)
class GeneratorSpec:
    """Archimedean generator: C^1, strictly decreasing, psi(0) = 1, psi -> 0."""

    name: str
    psi: Callable[[np.ndarray], np.ndarray]
    psi_inverse: Callable[[np.ndarray], np.ndarray]
    psi_prime: Callable[[np.ndarray], np.ndarray]


def generator_exponential() -> GeneratorSpec:
    return GeneratorSpec(
        name="exponential",
        psi=lambda t: np.exp(-np.asarray(t, dtype=float)),
        psi_inverse=lambda u: -np.log(np.asarray(u, dtype=float)),
        psi_prime=lambda t: -np.exp(-np.asarray(t, dtype=float)),
    )


def generator_clayton(theta: float) -> GeneratorSpec:
    if not (theta > 0):
        raise ValidationError("Clayton generator parameter must be positive")

    def psi(t):
        return (1.0 + np.asarray(t, dtype=float)) ** (-1.0 / theta)

    def psi_inverse(u):
        return np.asarray(u, dtype=float) ** (-theta) - 1.0

    def psi_prime(t):
        return -(1.0 / theta) * (1.0 + np.asarray(t, dtype=float)) ** (-1.0 / theta - 1.0)

    return GeneratorSpec(name=f"clayton({theta:g})", psi=psi,
                         psi_inverse=psi_inverse, psi_prime=psi_prime)


def archimax_copula(generator: GeneratorSpec, model: MaxStableModel, u) -> float:
    """``C(u) = psi(ell(psi^{-1}(u_1), ..., psi^{-1}(u_d)))``.

    With the exponential generator this is exactly :func:`ev_copula`.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape != (model.dim,):
        raise ValidationError(f"point has dimension {u.size}, expected {model.dim}")
    if np.any(u <= 0) or np.any(u > 1):
        raise ValidationError("copula arguments must lie in (0, 1]")
    t = np.asarray(generator.psi_inverse(u), dtype=float)
    if np.any(~np.isfinite(t)):
        raise ValidationError("generator inverse is not finite at the given arguments")
    if not np.any(t > 0):
        return 1.0
    return float(generator.psi(model.stdf(t)))
