"""Exact-arithmetic lattice operations for random stable matchings in
many-to-many matching markets with substitutable preferences satisfying the
law of aggregated demand."""

from .errors import AxiomError, CapacityError, MarketError, ValidationError
from .prefs import (
    AgentId,
    Market,
    Preference,
    RankedPreference,
    ResponsivePreference,
    SetComparison,
    Side,
    is_substitutable,
    lad_violation,
    profile_violations,
    responsive_to_ranked,
    satisfies_lad,
    substitutability_violation,
)
from .matchings import Matching, RationalMatrix, find_blocking, is_stable
from .lattice import (
    Cmp,
    StableSet,
    compare_firms,
    compare_side,
    compare_workers,
    enumerate_stable,
    hasse_edges,
    join_f,
    join_w,
    meet_f,
    meet_w,
    multi_join_f,
    multi_meet_f,
    rht_check,
    to_dot,
)
from .lotteries import (
    DecompositionRun,
    DecompositionStep,
    Dominance,
    Lottery,
    SplitAlignment,
    decompose,
    decompose_run,
    dominates,
    expectation,
    is_decreasing,
    join_random,
    lcm_refine,
    meet_random,
    random_rht_check,
    split,
    split_dominates,
)
from .documents import (
    MarketDocument,
    dump_lottery,
    dump_market,
    generate_responsive_market,
    parse_lottery,
    parse_market,
)

__version__ = "0.1.0"

__all__ = [
    "AgentId",
    "AxiomError",
    "CapacityError",
    "Cmp",
    "DecompositionRun",
    "DecompositionStep",
    "Dominance",
    "Lottery",
    "Market",
    "MarketDocument",
    "MarketError",
    "Matching",
    "Preference",
    "RankedPreference",
    "RationalMatrix",
    "ResponsivePreference",
    "SetComparison",
    "Side",
    "SplitAlignment",
    "StableSet",
    "ValidationError",
    "compare_firms",
    "compare_side",
    "compare_workers",
    "decompose",
    "decompose_run",
    "dominates",
    "dump_lottery",
    "dump_market",
    "enumerate_stable",
    "expectation",
    "find_blocking",
    "generate_responsive_market",
    "hasse_edges",
    "is_decreasing",
    "is_stable",
    "is_substitutable",
    "join_f",
    "join_random",
    "join_w",
    "lad_violation",
    "lcm_refine",
    "meet_f",
    "meet_random",
    "meet_w",
    "multi_join_f",
    "multi_meet_f",
    "parse_lottery",
    "parse_market",
    "profile_violations",
    "random_rht_check",
    "responsive_to_ranked",
    "rht_check",
    "satisfies_lad",
    "split",
    "split_dominates",
    "substitutability_violation",
    "to_dot",
]
