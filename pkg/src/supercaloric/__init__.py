"""Numerical lab for the singular (fast diffusion) p-Laplace evolution ``u_t = div(|grad u|**(p-2) grad u)``.

Exact exponents and closed-form solutions, an implicit radial solver, a
discrete obstacle solver, integrability scans with the Barenblatt/complementary
class test, and Harnack probes.
"""

from .closed_form import (
    INF,
    UNDEFINED,
    DegenerateBarenblatt,
    EvalResult,
    InfinitePointSource,
    PowerSupersolution,
    SingularBarenblatt,
    evaluate,
    ips_constant,
    make_family,
    mass_report,
    normalize_mass,
    pde_residual_fd,
    pointwise_rate_exact,
    power_constant,
)
from .errors import InvalidInput, LabError, NumericalFailure
from .exponents import Medium, Regime, classify_regime, exponent_table, moser_sequence
from .grid_solver import (
    CellClass,
    GridField,
    RadialGrid,
    SolverConfig,
    compare,
    pointwise_min,
    residual_sign,
    sample,
    solve,
    traces_from,
)
from .harnack import (
    HarnackProbe,
    constant_sweep,
    l1_harnack_probe,
    pointwise_rate_detect,
    self_similar_probes,
    weak_harnack_probe,
)
from .integrability import (
    ClassVerdict,
    CutoffFn,
    Cylinder,
    Verdict,
    caccioppoli_sides,
    classify,
    exponent_scan,
    local_integral,
    scan_at,
    slice_sup_norm,
    sobolev_sides,
)
from .obstacle import ObstacleProblem, SubBox, minimality_check, poisson_modify, solve_obstacle
from .sources import ConstantField, Shifted, Truncated

__version__ = "0.1.0"
