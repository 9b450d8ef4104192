"""Finite-model checks of Bell-type and Kochen-Specker-type no-go theorems."""

from .errors import ConditioningError, HVLabError, InputError, RefusalError
from .finprob import (
    FiniteDistribution,
    JointTable,
    RandomVariable,
    SampleSpace,
    check_mutual_independence,
    condition,
    product_measure,
    push_forward,
    sample,
)
from .inequalities import (
    boole_check,
    f_theta,
    local_polytope_feasible,
    scan_f,
)
from .kochenspecker import (
    Coloring,
    OrthoGraph,
    RaySet,
    frame_function_obstruction,
    orthogonality_graph,
    peres33,
    search_coloring,
    verify_coloring,
)
from .models import (
    FactorizedModel,
    RawModel,
    StochasticKernelModel,
    check_bell_locality,
    check_freedom,
    check_parameter_independence,
    check_perfect_correlation,
    derandomize,
    factorize,
    predicted_table,
    simulate,
)
from .quantum import (
    Angle,
    Frame,
    PairStats,
    Ray,
    SpinJointTable,
    born_oracle_photon,
    born_oracle_spin1,
    photon_stats,
    spin1_joint,
    spin1_pair_stats,
)
from .tables import ConditionalTable

__version__ = "0.1.0"
