"""Numerical certificates for entropy tensorization and log-Sobolev bounds.

Models are Gaussian (precision ``J``, linear term ``b``) or live on finite
product grids of real points. Everything is computed in closed form or by
exact enumeration; sampling is used only to search for counterexamples to
the hypotheses.
"""

from .certify import (
    CertBound,
    bakry_emery_bound,
    conjecture_ratio,
    lsi_bound,
    lsi_bound_verify,
    pathological_example_report,
    theorem1_constant,
    theorem1_verify,
)
from .conditions import (
    ConditionReport,
    SamplerConfig,
    beta_matrices,
    check_co,
    check_ed,
    check_sq,
    de_constant,
    delta_from_condition_c,
    full_condition_report,
)
from .config import RunConfig, parse_config, serialize_config
from .divergence import (
    avg_conditional_relative_entropy,
    chain_rule_terms,
    fisher_information_gaussian,
    relative_entropy,
)
from .expr import HamiltonianExpr, parse_hamiltonian
from .gibbs import (
    Trajectory,
    aux_chain_bound_check,
    contraction_rate_formula,
    gibbs_sweep_exact,
    gibbs_sweep_sampled,
    measure_contraction,
    run_trajectory,
    sweep_entropy_terms,
)
from .model import (
    GaussianDensity,
    GaussianModel,
    GridDensity,
    GridModel,
    Weights,
    build_gaussian,
    build_grid,
    local_specification,
)
from .transport import w2_gaussian_weighted, w2_grid_exact, w2_quantile_1d

__version__ = "0.1.0"
