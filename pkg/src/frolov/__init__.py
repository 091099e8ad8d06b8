"""Frolov lattice cubature: points, dual-lattice analysis, convergence harness."""

__version__ = "0.1.0"

from .cubature import (
    ConvergenceStudy,
    CubatureResult,
    FitResult,
    GeneratorComparison,
    compare_generators,
    fit_rate,
    geometric_schedule,
    integrate,
    run_study,
)
from .dual import DualSpectrumReport, DyadicBox, count_dyadic, min_norm_product, spectrum_report
from .enumeration import (
    DEFAULT_BUDGET,
    LatticePointSet,
    brute_force_points,
    enumerate_points,
    point_count_profile,
)
from .errors import (
    BudgetExceededError,
    CertificationError,
    FrolovError,
    InvalidSpecError,
    RadiusTooSmallError,
    UnsupportedClassError,
)
from .fooling import (
    Atom,
    FoolingDemo,
    FoolingFunction,
    Variant,
    build_fooling,
    empty_cells,
    lower_bound_demo,
)
from .generator import (
    FrolovLattice,
    GeneratorPolynomial,
    GeneratorSpec,
    Kind,
    assemble_lattice,
    build_polynomial,
    make_lattice,
)
from .testfns import (
    RatePrediction,
    Regime,
    Scale,
    SmoothnessClass,
    TestFunction,
    make_bump,
    make_hat,
    make_spline_kink,
    parse_function,
    predict_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
