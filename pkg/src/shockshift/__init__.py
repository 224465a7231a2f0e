"""Numerical laboratory for relative-entropy contraction of shocks.

Subpackages follow the pipeline: :mod:`systems` (conservation laws),
:mod:`relent` (relative entropy and the weighted pseudo-norm),
:mod:`hugoniot` (shock curves), :mod:`constants` (the contraction
constants and shift velocity), :mod:`solver` (finite volumes),
:mod:`drift` (the shift ``x(t)``), :mod:`monitor` (verdicts) and
:mod:`harness` (scenarios, verification, CLI back end).
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .systems import (  # noqa: F401
    DomainBox,
    SystemDescriptor,
    burgers,
    compatibility_check,
    entropy_quantities,
    euler,
    extremal_eigenvalues,
    flux,
    isentropic,
    make_system,
    reflect,
)
from .grid import FieldSnapshot, Grid1D  # noqa: F401
from .relent import PseudoNormConfig, comparability_constants, pseudo_norm, rel_entropy, rel_flux  # noqa: F401
from .hugoniot import (  # noqa: F401
    ShockCurve,
    ShockTriple,
    diperna_dissipation,
    lax_dissipation_identity,
    liu_strengthen_check,
    rh_residual,
    shock_curve,
)
from .constants import (  # noqa: F401
    ContractionConfig,
    build_contraction_config,
    find_a_star,
    find_ball_constants,
    find_velocity_band,
    oa_membership,
    oa_radius,
    shift_velocity,
)
from .solver import SolverConfig, initial_data, riemann_flux, step  # noqa: F401
from .drift import (  # noqa: F401
    TracePair,
    advance_drift,
    characteristics_drift_burgers,
    filippov_velocity,
    interface_traces,
)
from .monitor import (  # noqa: F401
    RunSeries,
    contraction_verdict,
    dissipation_check,
    drift_bound_check,
    l2_stability_check,
)
from .harness import ScenarioConfig, load_scenario, prop14_experiment, run_scenario, verify_suite  # noqa: F401
