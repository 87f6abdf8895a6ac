"""One-sample location tests for high-dimensional normal data.

Hotelling's T^2, Dempster's trace test and a weighted average of the two with
a plug-in optimal weight, together with their local asymptotic powers and a
Monte Carlo harness for size and power studies.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateDataError,
    HDLocationError,
    ModelError,
    SpecValidationError,
    StandardizationError,
    UndefinedTestError,
)
from .gauss import SampleSummary, SigmaKind, SigmaModel, read_csv, sample, stream, summarize, trace_powers
from .harness import ExperimentSpec, ResultTable, mc_se, run_asl, run_experiment, run_power
from .location_tests import (
    CriticalMode,
    TestKind,
    TestOutcome,
    WeightPolicy,
    cornish_fisher_critical,
    dempster_critical,
    dempster_test,
    edgeworth_null_cdf,
    hotelling_test,
    optimal_weight,
    sigma_rho,
    weighted_test,
)
from .power import (
    Regime,
    RegimeReport,
    ShiftProfile,
    asymptotic_power,
    c1_interval,
    classify_regime,
    omega0_ratio,
    flat_shift,
    shift_profile,
)
from .spectral import SpectralEstimates, estimate_a, population_a

__all__ = [name for name in dir() if not name.startswith("_")]
