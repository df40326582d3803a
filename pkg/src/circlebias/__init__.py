"""Sector bias of circle configurations, runner systems, flat polynomials,
and Newton-polytope root-angle analysis."""

__version__ = "0.1.0"

from .circle import BiasReport, Sector, aperture_bias, count_range, exact_bias, frac, sector_count
from .runners import (
    RunnerSystem,
    TimeWitness,
    antipodal_pairs,
    aperture_max_bias_exact,
    chernoff_experiment,
    delta_integral_check,
    max_bias_exact,
    max_bias_grid,
    positions_at,
    second_moment_estimate,
)
from .shapiro import (
    ShapiroFamily,
    UnimodularPoly,
    erdos_turan_bound,
    hadamard_power,
    parseval_check,
    flatness_check,
    runner_config_from_poly,
    shapiro_family,
    sup_norm,
)
from .unipoly import DensePoly, RootSet, bias_of_poly, distinct_real_roots, re_part, roots
from .newton import (
    NewtonPolytope,
    SparseBivariatePoly,
    bias_search,
    edge_approx_check,
    edge_poly,
    f_star,
    lower_edges,
    newton_polytope,
    runner_poly,
    select_radius,
    star_poly,
    substitute_y,
    y_invert,
    y_power_substitute,
)
from .realroots import find_phase, real_roots_driver, sign_variations, vertex_phases
