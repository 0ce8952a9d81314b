"""Kolmogorov distances and explicit upper bounds for max-stable distributions.

The package computes exact Kolmogorov distances between multivariate
max-stable laws with Frechet margins (by reduction to a canonical-section
search with a closed radial form) and evaluates the explicit bound catalog:
Wasserstein on de Haan representers, total variation on angular measures,
the coordinate-decomposition (psi) bound, the Gaussian-marks bound, index
mismatch forms, margin compositions, and Archimax transfers.  A Monte Carlo
harness samples the de Haan series exactly for discrete representers and
verifies every closed form and bound empirically.
"""

from .bounds import (BoundReport, bound_alpha_lp, bound_alpha_mismatch,
                     bound_archimax, bound_brown_resnick,
                     bound_different_margins, bound_psi, bound_tv,
                     bound_wasserstein, k_psi)
from .distances import (KolmogorovResult, SectionSearchOptions, TransportPlan,
                        kolmogorov_exact, kolmogorov_univariate_frechet,
                        maximize_on_section, radial_sup, softmax,
                        softmax_lipschitz_constant, w2_gelbrich,
                        wasserstein1_sup)
from .errors import (ConvergenceWarning, MaxStabError, NotSupportedError,
                     ValidationError)
from .models import (GeneratorSpec, MarginSpec, MaxStableModel,
                     archimax_copula, ev_copula, evaluate_F, evaluate_V,
                     generator_clayton, generator_exponential,
                     make_brown_resnick, make_comonotone,
                     make_discrete_spectral, make_husler_reiss,
                     make_independent, make_logistic, stdf, to_unit_frechet,
                     transform_margins)
from .montecarlo import (SampleResult, SamplerConfig, dkw_threshold,
                         empirical_dk_two_sample, load_samples,
                         sample_brown_resnick, sample_maxstable_discrete,
                         save_samples, verify_bounds, verify_cdf)
from .mvn import MvnProblem, MvnResult, bivariate_normal_cdf, mvn_cdf, std_normal_cdf
from .norms import NormSpec
from .psi import PsiVector, psi_discrete, psi_hr, psi_sup_discrepancy
from .spectral import (AngularMeasure, DeHaanRepresenter, SphereConstants,
                       angular_from_representer, canonical_representer,
                       m_alpha_closed_form, numeric_sphere_sup, reproject,
                       sphere_constants, tv_distance)

__version__ = "0.1.0"

__all__ = [
    "AngularMeasure", "BoundReport", "ConvergenceWarning", "DeHaanRepresenter",
    "GeneratorSpec", "KolmogorovResult", "MarginSpec", "MaxStabError",
    "MaxStableModel", "MvnProblem", "MvnResult", "NormSpec",
    "NotSupportedError", "PsiVector", "SampleResult", "SamplerConfig",
    "SectionSearchOptions", "SphereConstants", "TransportPlan",
    "ValidationError", "angular_from_representer", "archimax_copula",
    "bivariate_normal_cdf", "bound_alpha_lp", "bound_alpha_mismatch",
    "bound_archimax", "bound_brown_resnick", "bound_different_margins",
    "bound_psi", "bound_tv", "bound_wasserstein", "canonical_representer",
    "dkw_threshold", "empirical_dk_two_sample", "ev_copula", "evaluate_F",
    "evaluate_V", "generator_clayton", "generator_exponential", "k_psi",
    "kolmogorov_exact", "kolmogorov_univariate_frechet", "load_samples",
    "m_alpha_closed_form", "make_brown_resnick", "make_comonotone",
    "make_discrete_spectral", "make_husler_reiss", "make_independent",
    "make_logistic", "maximize_on_section", "mvn_cdf", "numeric_sphere_sup",
    "psi_discrete", "psi_hr", "psi_sup_discrepancy", "radial_sup",
    "reproject", "sample_brown_resnick", "sample_maxstable_discrete",
    "save_samples", "softmax", "softmax_lipschitz_constant",
    "sphere_constants", "std_normal_cdf", "stdf", "to_unit_frechet",
    "transform_margins", "tv_distance", "verify_bounds", "verify_cdf",
    "w2_gelbrich", "wasserstein1_sup",
]
