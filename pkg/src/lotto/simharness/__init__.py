"""Deterministic in-memory simulation of selection rounds under malicious servers."""

from .accounting import ByteTotals, message_accounting, modeled_bytes, transcript_bytes
from .adversary import (
    AdversarialRefiner,
    AnnounceN,
    BiasedFinalize,
    DelayHonestClaims,
    ForgeRandomness,
    InconsistentLists,
    OmitHonestClaims,
    StrategyKind,
    make_strategy,
)
from .harness import (
    BoundCheck,
    MonteCarloReport,
    PopulationSpec,
    RoundOutcome,
    build_population,
    compare_to_bound,
    fast_supported,
    monte_carlo,
    reverify,
    run_campaign,
    run_round,
)
from .scenario import (
    SCENARIO_SCHEMA,
    Scenario,
    ScenarioError,
    ScenarioResult,
    load_scenario,
    parse_scenario,
    run_scenario,
    write_outputs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
