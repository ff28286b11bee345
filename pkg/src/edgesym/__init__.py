"""Tests of symmetry against Edgeworth-type skewed alternatives."""

from .alternatives import SkewNormal, SkewT, parse_alternative
from .densities import (
    Family,
    InformationSet,
    ReferenceDensity,
    gaussian,
    information_set,
    laplace,
    logistic,
    moment,
    parse_family,
    power_exponential,
    standardization_constant,
    student,
)
from .edgeworth import EdgeworthModel, solve_z_star
from .efficiency import (
    are,
    cross_information,
    optimal_shift,
    shift_laplace,
    shift_s1,
    shift_t_circ,
    shift_t_dagger,
    shift_t_f1,
    shift_t_hat,
)
from .errors import (
    DegenerateSample,
    DivergentIntegral,
    GrammarError,
    MomentDoesNotExist,
    NonPositiveVariance,
    SymmetryError,
    TiesAtCenter,
    UnsupportedScoreDerivative,
    XiTooLarge,
    ZeroDenominator,
    ZeroShift,
)
from .estimators import discretize, estimate_nuisance, kde_at_zero, mad_scale
from .montecarlo import (
    Scenario,
    SimulationReport,
    SimulationSpec,
    TestConfig,
    parse_model,
    run,
    table1_spec,
    table2_spec,
)
from .statistics import (
    TEST_IDS,
    TestOutcome,
    central_sequence,
    kappa_circ,
    p_values,
    run_test,
    s1,
    s2_b1,
    t_circ_f1,
    t_dagger,
    t_f1,
    t_hat_f1,
    t_laplace,
    vdw_signed_rank,
)

__version__ = "0.1.0"
