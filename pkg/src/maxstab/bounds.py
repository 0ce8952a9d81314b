"""Named upper bounds on the Kolmogorov distance, with their constants.

Each ``bound_*`` function returns a :class:`BoundReport` carrying the bound
value, the scalar constants that entered it, and (optionally) the exact or
certified distance it dominates.  All bounds share the 1/e factor coming
from the radial reduction; see :mod:`maxstab.distances`.

Summary of the catalog (d_K denotes the Kolmogorov distance):

* Wasserstein:     d_K <= (1/e) W1_sup((Z1)^alpha, (Z2)^alpha)
* total variation: d_K <= (M_alpha / e) ||H1 - H2||_TV   (unhalved TV)
* psi:             d_K <= (1/e) sup_section sum_i |Psi_i^1 - Psi_i^2|
* log-exponential: d_K <= (sqrt(2) d / 4e) (W2(U1, U2) + ||c1 - c2||_2)
* index mismatch:  d_K <= (nu0/e) |a1 - a2| max(1/(e a_*), C^{a^*} ln C)
* margins:         d_K <= d_K(copulas) + sum_i d_K(margin_i pairs)
* Archimax:        d_K(C1, C2) <= e K_psi d_K(F1, F2)

The index-mismatch family is reported as stated in its source but is known
to fail in general (its derivation rescales across different homogeneity
degrees); see ``bound_alpha_mismatch`` and the package README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .distances import (SectionSearchOptions, kolmogorov_univariate_frechet,
                        w2_gelbrich, wasserstein1_sup)
from .errors import ValidationError
from .models import GeneratorSpec, MarginSpec
from .norms import NormSpec
from .psi import psi_sup_discrepancy
from .spectral import (AngularMeasure, DeHaanRepresenter, canonical_representer,
                       m_alpha_closed_form, numeric_sphere_sup, reproject,
                       sphere_constants, tv_distance)

__all__ = [
    "BoundReport",
    "bound_alpha_lp",
    "bound_alpha_mismatch",
    "bound_archimax",
    "bound_brown_resnick",
    "bound_different_margins",
    "bound_psi",
    "bound_tv",
    "bound_wasserstein",
    "k_psi",
]

_INV_E = 1.0 / math.e


@dataclass(frozen=True)
class BoundReport:
    """A named bound value with the constants behind it.

    ``dominated_quantity`` is the exact distance or certified lower bound the
    bound is supposed to dominate; ``slack`` is their difference and must not
    be materially negative when the dominated quantity is certified.
    """

    bound_name: str
    bound_value: float
    constants: dict = field(default_factory=dict)
    dominated_quantity: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float | None:
        if self.dominated_quantity is None:
            return None
        return self.bound_value - self.dominated_quantity

    def with_dominated(self, value: float) -> "BoundReport":
        return BoundReport(bound_name=self.bound_name, bound_value=self.bound_value,
                           constants=dict(self.constants), dominated_quantity=float(value),
                           details=dict(self.details))

    def to_dict(self) -> dict:
        doc = {
            "bound_name": self.bound_name,
            "bound_value": self.bound_value,
            "constants": {k: float(v) for k, v in self.constants.items()},
        }
        if self.dominated_quantity is not None:
            doc["dominated_quantity"] = self.dominated_quantity
            doc["slack"] = self.slack
        return doc


def _as_dk_value(dk_term) -> float:
    """Accept a float, a BoundReport, or a KolmogorovResult as a distance term."""
    if isinstance(dk_term, BoundReport):
        return float(dk_term.bound_value)
    if hasattr(dk_term, "value"):
        return float(dk_term.value)
    return float(dk_term)


def _as_representer(obj) -> DeHaanRepresenter:
    if isinstance(obj, DeHaanRepresenter):
        return obj
    if isinstance(obj, AngularMeasure):
        return canonical_representer(obj)
    raise ValidationError("expected a de Haan representer or an angular measure")


def bound_wasserstein(Z1, Z2) -> BoundReport:
    """``(1/e) W1_sup((Z1)^alpha, (Z2)^alpha)`` for two representers.

    Angular measures are accepted and canonicalized first; the infimum over
    all representer pairs is approximated by the given (or canonical) choice,
    so the value may depend on it.
    """
    P, Q = _as_representer(Z1), _as_representer(Z2)
    if P.alpha != Q.alpha:
        raise ValidationError("stability index mismatch")
    w, plan = wasserstein1_sup(P, Q, power=True)
    return BoundReport(
        bound_name="wasserstein",
        bound_value=_INV_E * w,
        constants={"w1_sup_powered": w, "factor_1_over_e": _INV_E, "alpha": P.alpha},
        details={"plan": plan},
    )


def _m_alpha_for(norm: NormSpec, alpha: float, dim: int) -> float:
    if norm.is_plain_lp:
        return m_alpha_closed_form(norm.p, alpha, dim)
    return numeric_sphere_sup(norm, alpha, dim).value


def bound_tv(H1: AngularMeasure, H2: AngularMeasure,
             norms_to_try: list[NormSpec] | None = None) -> BoundReport:
    """``min over candidate gauges of (M_alpha / e) ||H1 - H2||_TV``.

    Both measures are reprojected onto each candidate sphere; the infimum
    over all admissible 1-homogeneous gauges is only explored over the given
    finite list (default: the measures' own gauge plus the l_alpha gauge).
    """
    if H1.dim != H2.dim or H1.alpha != H2.alpha:
        raise ValidationError("measures must share dimension and stability index")
    if norms_to_try is None:
        norms_to_try = [H1.norm]
        if H1.norm != NormSpec.lp(H1.alpha):
            norms_to_try.append(NormSpec.lp(H1.alpha))
    if not norms_to_try:
        raise ValidationError("need at least one candidate gauge")
    per_norm = []
    best = None
    for norm in norms_to_try:
        G1 = reproject(H1, norm)
        G2 = reproject(H2, norm)
        tv = tv_distance(G1, G2)
        m_alpha = _m_alpha_for(norm, H1.alpha, H1.dim)
        value = _INV_E * m_alpha * tv
        per_norm.append({"norm": str(norm), "m_alpha": m_alpha, "tv": tv, "value": value})
        if best is None or value < best[0]:
            best = (value, norm, m_alpha, tv)
    value, norm, m_alpha, tv = best
    return BoundReport(
        bound_name="tv",
        bound_value=value,
        constants={"m_alpha": m_alpha, "tv": tv, "factor_1_over_e": _INV_E,
                   "nu0_1": H1.total_mass, "nu0_2": H2.total_mass},
        details={"winning_norm": str(norm), "per_norm": per_norm},
    )


def bound_psi(model1, model2, opts: SectionSearchOptions | None = None,
              extra_points=None) -> BoundReport:
    """``(1/e) sup_section sum_i |Psi_i^(1) - Psi_i^(2)|`` via the shared search."""
    sup = psi_sup_discrepancy(model1, model2, opts=opts, extra_points=extra_points)
    return BoundReport(
        bound_name="psi",
        bound_value=_INV_E * sup,
        constants={"psi_sup": sup, "factor_1_over_e": _INV_E},
    )


def bound_alpha_mismatch(H: AngularMeasure, alpha1: float, alpha2: float) -> BoundReport:
    """Stability-index mismatch bound for a shared angular measure.

    Value: ``(nu0 / e) |a1 - a2| max(1/(e a_*), C_inf^{a^*} ln C_inf)``.

    .. warning::
       This is the stated form of its source, reported for comparison, but it
       is *not* a valid upper bound in general: already in dimension 1 the
       exact distance between unit Frechet laws with indices 1 and 2 is
       about 0.182 > 1/e^2.  Treat reports from this family as reference
       values, not certificates.
    """
    if not (alpha1 > 0 and alpha2 > 0):
        raise ValidationError("stability indices must be positive")
    consts = sphere_constants(H)
    a_star, a_sup = min(alpha1, alpha2), max(alpha1, alpha2)
    factor = max(1.0 / (math.e * a_star),
                 consts.c_inf ** a_sup * math.log(consts.c_inf))
    value = consts.nu0 / math.e * abs(alpha1 - alpha2) * factor
    return BoundReport(
        bound_name="alpha_mismatch",
        bound_value=value,
        constants={"nu0": consts.nu0, "c_inf": consts.c_inf, "alpha_star": a_star,
                   "alpha_sup": a_sup, "delta_alpha": abs(alpha1 - alpha2)},
        details={"caveat": "stated form; not a valid bound in general"},
    )


def bound_alpha_lp(d: int, p: float, alpha1: float, alpha2: float,
                   alpha: float | None = None) -> float:
    """Closed l_p form ``(d^max(1, alpha/p) / e^2) |a1 - a2| / a_*``.

    ``alpha`` is the index normalizing the shared measure; it defaults to
    ``max(alpha1, alpha2)``, the conservative choice.  Same caveat as
    :func:`bound_alpha_mismatch`.
    """
    if d < 1 or not (p > 0) or not (alpha1 > 0 and alpha2 > 0):
        raise ValidationError("need d >= 1, p > 0 and positive indices")
    if alpha is None:
        alpha = max(alpha1, alpha2)
    ratio = 0.0 if math.isinf(p) else alpha / p
    return (float(d) ** max(1.0, ratio) / math.e ** 2
            * abs(alpha1 - alpha2) / min(alpha1, alpha2))


def bound_brown_resnick(S1, S2, c1=None, c2=None) -> BoundReport:
    """Log-exponential (Gaussian-marks) bound via the softmax Lipschitz constant.

    ``(sqrt(2) d / 4e) (W2(U1, U2) + ||c1 - c2||_2)`` with the Gaussian W2
    from :func:`maxstab.distances.w2_gelbrich` (exact for Gaussian marks).
    Shift vectors default to ``diag(S_k)/2``, the convention making
    ``Z_j = exp(U_j - Var(U_j)/2)`` a unit-mean representer; with these
    defaults the expanded display form
    ``(sqrt(2) d / 4e)(||diag(S1) - diag(S2)||_2 + W2^2)`` is also recorded
    in the details for reference.
    """
    S1 = np.atleast_2d(np.asarray(S1, dtype=float))
    S2 = np.atleast_2d(np.asarray(S2, dtype=float))
    d = S1.shape[0]
    if S1.shape != (d, d) or S2.shape != (d, d):
        raise ValidationError("covariance matrices must be square and equally sized")
    defaults_used = c1 is None and c2 is None
    c1 = np.diag(S1) / 2.0 if c1 is None else np.asarray(c1, dtype=float).reshape(-1)
    c2 = np.diag(S2) / 2.0 if c2 is None else np.asarray(c2, dtype=float).reshape(-1)
    if c1.size != d or c2.size != d:
        raise ValidationError("shift vectors must match the dimension")
    w2 = w2_gelbrich(np.zeros(d), S1, np.zeros(d), S2)
    delta_c = float(np.linalg.norm(c1 - c2))
    c_sm = math.sqrt(2.0) / 4.0
    value = c_sm * d / math.e * (w2 + delta_c)
    details = {}
    if defaults_used:
        diag_term = float(np.linalg.norm(np.diag(S1) - np.diag(S2)))
        details["example_display_form"] = c_sm * d / math.e * (diag_term + w2 ** 2)
    return BoundReport(
        bound_name="brown_resnick",
        bound_value=value,
        constants={"w2": w2, "delta_c": delta_c, "c_softmax": c_sm, "dim": d,
                   "factor_1_over_e": _INV_E},
        details=details,
    )


def bound_different_margins(dk_term, margins1: MarginSpec, margins2: MarginSpec,
                            exact_margins: bool = False) -> BoundReport:
    """Compose a copula-level distance term with per-margin univariate terms.

    The copula term may be an exact distance, a bound report, or a plain
    float.  Margin terms are either the analytic expressions
    ``(1/e^2) dalpha_i / a_{*,i} + |dc_i| / (e min c_i)`` or, with
    ``exact_margins=True``, the exact univariate Frechet suprema (sharper,
    and valid unconditionally).
    """
    if margins1.dim != margins2.dim:
        raise ValidationError("margin specifications have different dimensions")
    dk = _as_dk_value(dk_term)
    terms = []
    for i in range(margins1.dim):
        c1, a1 = margins1.scales[i], margins1.indices[i]
        c2, a2 = margins2.scales[i], margins2.indices[i]
        if exact_margins:
            terms.append(kolmogorov_univariate_frechet(c1, a1, c2, a2).value)
        else:
            terms.append(abs(a1 - a2) / (math.e ** 2 * min(a1, a2))
                         + abs(c1 - c2) / (math.e * min(c1, c2)))
    total = dk + float(np.sum(terms))
    return BoundReport(
        bound_name="different_margins",
        bound_value=total,
        constants={"copula_term": dk, "margin_term_total": float(np.sum(terms))},
        details={"margin_terms": terms, "exact_margins": exact_margins},
    )


def k_psi(generator: GeneratorSpec) -> float:
    """``sup_{t >= 0} t |psi'(t)|``, by 1-d maximization over log t.

    Rejects generators whose supremum is not finite (the grid maximum keeps
    growing toward the right endpoint).
    """
    log_t = np.linspace(-14.0, 14.0, 561)
    t = np.exp(log_t)
    vals = t * np.abs(np.asarray(generator.psi_prime(t), dtype=float))
    if not np.all(np.isfinite(vals)):
        raise ValidationError(f"generator {generator.name} has non-finite t |psi'(t)|")
    idx = int(np.argmax(vals))
    if idx >= log_t.size - 2 and vals[-1] > vals[-3]:
        raise ValidationError(f"generator {generator.name}: t |psi'(t)| appears unbounded")
    step = log_t[1] - log_t[0]
    res = scipy.optimize.minimize_scalar(
        lambda lt: -math.exp(lt) * abs(float(generator.psi_prime(math.exp(lt)))),
        bounds=(log_t[max(idx - 1, 0)] - step, log_t[min(idx + 1, log_t.size - 1)] + step),
        method="bounded", options={"xatol": 1e-13})
    return float(-res.fun)


def bound_archimax(generator: GeneratorSpec, model1, model2, dk_term) -> BoundReport:
    """``e K_psi d_K(F1, F2)`` for Archimax copulas over shared generator psi.

    With the exponential generator ``K_psi = 1/e`` and the bound equals the
    supplied distance term exactly (EV-copula consistency).
    """
    if model1.dim != model2.dim:
        raise ValidationError("dimension mismatch")
    kp = k_psi(generator)
    dk = _as_dk_value(dk_term)
    return BoundReport(
        bound_name="archimax",
        bound_value=math.e * kp * dk,
        constants={"k_psi": kp, "dk_term": dk, "factor_e": math.e},
        details={"generator": generator.name},
    )
