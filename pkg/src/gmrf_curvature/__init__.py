"""Information geometry of pairwise isotropic Gaussian-Markov random fields."""

__version__ = "0.1.0"

from .lattice import Lattice, ModelParams, NeighborhoodSpec, init_lattice, neighbors  # noqa: E402
from .sampler import (  # noqa: E402
    SamplerConfig, SamplerMode, SweepOrder, estimate_params, local_conditional_logdensity,
    metropolis_sweep, natural_decomposition, pseudo_log_likelihood,
)
from .patch_stats import PatchCovariance, kron_plus_norm, patch_covariance, patch_vectorize, plus_norm  # noqa: E402
from .geometry import (  # noqa: E402
    CurvatureReport, FundamentalForms, SingularFirstForm, curvature_report, curvatures, entropy,
    first_form_nested, first_form_tensorial, fundamental_forms, second_form, shape_operator,
)
from .cycle import (  # noqa: E402
    CycleConfig, CycleRecord, SignChangeEvent, detect_sign_changes, hysteresis_path, run_cycle,
)
