"""Mirror descent search (MDS), its accelerated variant (AMDS), their Gaussian
approximations (G-MDS, G-AMDS), and a PI2 baseline on DMP via-point tasks."""

__version__ = "0.1.0"

from .divergences import BregmanSpec, DomainError, alpha_bregman, alpha_limit_check, bregman, kl_divergence
from .pi2 import Pi2Config, pi2_run, pi2_update, projection_matrix, softmin_weights
from .search import (
    AmdGaussianState,
    GaussianState,
    MarkovChain,
    SearchTrace,
    amds_run,
    dp_exponentiated_update,
    gamds_run,
    gaussian_mean_update,
    gmds_run,
    mds_run,
    online_mds_run,
)
from .simplex import (
    AmdSchedule,
    DegenerateUpdateError,
    SolverError,
    amd_mix,
    amd_step,
    generic_md_step,
    md_step_kl,
    prox_perturbed_kl,
)
from .tasks import ArmViaTask, DmpPolicy, PointViaTask, SphereTask, dmp_rollout, min_jerk_init

__all__ = [
    "BregmanSpec",
    "DomainError",
    "alpha_bregman",
    "alpha_limit_check",
    "bregman",
    "kl_divergence",
    "Pi2Config",
    "pi2_run",
    "pi2_update",
    "projection_matrix",
    "softmin_weights",
    "AmdGaussianState",
    "GaussianState",
    "MarkovChain",
    "SearchTrace",
    "amds_run",
    "dp_exponentiated_update",
    "gamds_run",
    "gaussian_mean_update",
    "gmds_run",
    "mds_run",
    "online_mds_run",
    "AmdSchedule",
    "DegenerateUpdateError",
    "SolverError",
    "amd_mix",
    "amd_step",
    "generic_md_step",
    "md_step_kl",
    "prox_perturbed_kl",
    "ArmViaTask",
    "DmpPolicy",
    "PointViaTask",
    "SphereTask",
    "dmp_rollout",
    "min_jerk_init",
]
