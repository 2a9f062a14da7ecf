"""Round runner, Monte Carlo campaigns and the comparison against the single-round bound.

Two engines produce :class:`MonteCarloReport`:

``protocol``
    every trial is a full cryptographic round through :func:`run_full_round`.
``fast``
    the native (or NumPy) kernel replaces VRF outputs with a counter-based
    PRNG and replays only the server's selection rule. It exists because
    10^5 rounds over 5000 clients is out of reach with real VRFs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .. import kernels
from .._util import as_fraction, frac_text
from ..bounds import BoundParams, theorem1_bound
from ..protocol import (
    Population,
    ProtocolConfig,
    RoundTranscript,
    ServerBehavior,
    client_verify_outcome,
    run_full_round,
)
from ..protocol.round import derive_seed
from .accounting import ByteTotals, modeled_bytes, transcript_bytes
from .adversary import AdversarialRefiner, BiasedFinalize, OmitHonestClaims


@dataclass(frozen=True)
class PopulationSpec:
    n_init: int
    c: int = 0
    seed: int = 0
    zipf_a: float = 1.2

    def __post_init__(self) -> None:
        if self.n_init < 1:
            raise ValueError("n_init must be positive")
        if not 0 <= self.c <= self.n_init:
            raise ValueError("need 0 <= c <= n_init")


@lru_cache(maxsize=8)
def build_population(spec: PopulationSpec) -> Population:
    """Keys are derived from the spec seed; cached so repeated campaigns
    over one population share VRF memoization."""
    return Population.generate(spec.n_init, spec.c, spec.seed)


@dataclass
class RoundOutcome:
    transcript: RoundTranscript
    bytes: ByteTotals

    @property
    def finalized(self):
        return self.transcript.finalized

    @property
    def x(self) -> int | None:
        return self.transcript.dishonest_count

    @property
    def verdicts(self):
        return self.transcript.verdicts


def run_round(
    pop: PopulationSpec,
    config: ProtocolConfig,
    strategy: ServerBehavior | None = None,
    seed: int = 0,
    record_payloads: bool = True,
) -> RoundOutcome:
    tr = run_full_round(build_population(pop), config, strategy, seed, record_payloads)
    return RoundOutcome(tr, transcript_bytes(tr))


def reverify(transcript: RoundTranscript, population: Population) -> bool:
    """Re-run the Stage 2 checks on a finalized set from every honest
    member's point of view."""
    P = transcript.finalized
    if P is None:
        return True
    if len(P) != transcript.config.s or len(set(P.ids)) != len(P):
        return False
    members = [cid for cid in P.ids if cid in transcript.honest] or list(P.ids)[:1]
    return all(
        bool(
            client_verify_outcome(
                cid, P, transcript.config, population.registry, vrf_verifier=population.vrf_cache
            )
        )
        for cid in members
    )


@dataclass
class MonteCarloReport:
    strategy: str
    engine: str
    trials: int
    base_seed: int
    s: int
    c: int
    n: int
    alpha: Fraction
    aborts: Counter = field(default_factory=Counter)
    x_hist: Counter = field(default_factory=Counter)
    bytes: ByteTotals | None = None
    honest_finalizations: int = 0
    honest_verdicts: Counter = field(default_factory=Counter)
    reverify_failures: int = 0
    agreement_failures: int = 0

    @property
    def completed(self) -> int:
        return sum(self.x_hist.values())

    @property
    def abort_rate(self) -> float:
        return sum(self.aborts.values()) / self.trials if self.trials else 0.0

    def exceed_count(self, k: int) -> int:
        return sum(cnt for x, cnt in self.x_hist.items() if x > k)

    def exceedance(self, eta) -> float:
        """Pr[round completes and x > eta*s], aborted rounds counting as no
        exceedance."""
        k = math.floor(as_fraction(eta) * self.s)
        return self.exceed_count(k) / self.trials

    def conditional_exceedance(self, eta) -> float:
        k = math.floor(as_fraction(eta) * self.s)
        return self.exceed_count(k) / self.completed if self.completed else 0.0

    def mean_x(self) -> float:
        if not self.completed:
            return float("nan")
        return sum(x * cnt for x, cnt in self.x_hist.items()) / self.completed

    def merge(self, other: "MonteCarloReport") -> None:
        self.trials += other.trials
        self.aborts.update(other.aborts)
        self.x_hist.update(other.x_hist)
        self.honest_finalizations += other.honest_finalizations
        self.honest_verdicts.update(other.honest_verdicts)
        self.reverify_failures += other.reverify_failures
        self.agreement_failures += other.agreement_failures
        if other.bytes is not None:
            self.bytes = other.bytes if self.bytes is None else self.bytes + other.bytes

    def summary(self) -> dict:
        return {
            "strategy": self.strategy,
            "engine": self.engine,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "n": self.n,
            "c": self.c,
            "s": self.s,
            "alpha": str(self.alpha),
            "completed": self.completed,
            "abort_rate": self.abort_rate,
            "aborts": {k: self.aborts[k] for k in sorted(self.aborts)},
            "mean_x": self.mean_x(),
            "honest_finalizations": self.honest_finalizations,
            "honest_verdicts": {k: self.honest_verdicts[k] for k in sorted(self.honest_verdicts)},
            "reverify_failures": self.reverify_failures,
            "agreement_failures": self.agreement_failures,
        }


def _report(pop: PopulationSpec, config: ProtocolConfig, name: str, engine: str, base_seed: int):
    return MonteCarloReport(name, engine, 0, base_seed, config.s, pop.c, pop.n_init, config.alpha)


def _protocol_campaign(
    pop: PopulationSpec,
    config: ProtocolConfig,
    strategies: list[ServerBehavior],
    trials: int,
    base_seed: int,
    keep: int = 0,
) -> tuple[dict[str, MonteCarloReport], list[RoundTranscript]]:
    population = build_population(pop)
    reports = {s.name: _report(pop, config, s.name, "protocol", base_seed) for s in strategies}
    kept: list[RoundTranscript] = []
    for trial in range(trials):
        # all strategies replay the same round index and seed, so clients
        # reuse their VRF evaluations across strategies
        cfg = config.for_round(config.round_r + trial)
        seed = derive_seed(base_seed, trial)
        for strat in strategies:
            tr = run_full_round(population, cfg, strat, seed, record_payloads=False)
            rep = reports[strat.name]
            rep.trials += 1
            if tr.finalized is None:
                rep.aborts[_abort_label(tr)] += 1
            else:
                rep.x_hist[tr.dishonest_count] += 1
            ok = tr.honest_finalized()
            rep.honest_finalizations += len(ok)
            if len({tr.views[cid].canonical() for cid in ok if cid in tr.views}) > 1:
                rep.agreement_failures += 1
            if tr.finalized is not None and not reverify(tr, population):
                rep.reverify_failures += 1
            for v in tr.honest_verdicts().values():
                rep.honest_verdicts[v.label] += 1
            b = transcript_bytes(tr)
            rep.bytes = b if rep.bytes is None else rep.bytes + b
            if len(kept) < keep:
                kept.append(tr)
    return reports, kept


def _abort_label(tr: RoundTranscript) -> str:
    if tr.server_abort is not None:
        return tr.server_abort.value
    reasons = Counter(v.reason.value for v in tr.honest_verdicts().values() if v.reason)
    if not reasons:
        return "Unknown"
    return sorted(reasons.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def _fast_params(strategy: ServerBehavior) -> tuple[int, float, float]:
    if isinstance(strategy, BiasedFinalize):
        return kernels.BIASED, 0.0, 0.0
    if isinstance(strategy, AdversarialRefiner):
        return kernels.BIASED, 0.0, strategy.d
    if isinstance(strategy, OmitHonestClaims):
        code = kernels.OMIT_BIASED if strategy.biased else kernels.OMIT
        return code, strategy.fraction, 0.0
    if type(strategy) is ServerBehavior:
        return kernels.HONEST, 0.0, 0.0
    raise ValueError(f"strategy {strategy.name!r} needs the protocol engine")


def fast_supported(strategy: ServerBehavior) -> bool:
    try:
        _fast_params(strategy)
    except ValueError:
        return False
    return True


def _fast_campaign(
    pop: PopulationSpec, config: ProtocolConfig, strategy: ServerBehavior, trials: int, base_seed: int
) -> MonteCarloReport:
    code, fraction, d = _fast_params(strategy)
    removed = math.floor(d * pop.n_init)
    n_eff = pop.n_init - removed
    if n_eff < 1:
        raise ValueError("refinement removes the whole population")
    T = config.threshold(n_eff)
    xs, cands = kernels.run_trials(
        key=derive_seed(base_seed, "fast-eligibility"),
        select_key=derive_seed(base_seed, "fast-selection"),
        n_honest=pop.n_init - pop.c - min(removed, pop.n_init - pop.c),
        c=pop.c,
        s=config.s,
        threshold=T,
        m=config.m,
        strategy=code,
        fraction=fraction,
        trials=trials,
    )
    rep = _report(pop, config, strategy.name, f"fast-{kernels.BACKEND}", base_seed)
    rep.trials = trials
    aborted = int((xs < 0).sum())
    if aborted:
        rep.aborts["NotEnoughCandidates"] = aborted
    values, counts = _unique(xs[xs >= 0])
    rep.x_hist.update(dict(zip(values, counts)))
    if n_eff >= config.n_min:
        rep.bytes = modeled_bytes(config, n_eff, cands, xs >= 0)
    return rep


def _unique(arr):
    import numpy as np

    values, counts = np.unique(arr, return_counts=True)
    return [int(v) for v in values], [int(c) for c in counts]


def run_campaign(
    pop: PopulationSpec,
    config: ProtocolConfig,
    strategies: list[ServerBehavior],
    trials: int,
    base_seed: int = 0,
    engine: str = "auto",
) -> dict[str, MonteCarloReport]:
    """Independent rounds per strategy; trial i uses round ``round_r + i``
    and a seed derived from (base_seed, i)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if engine not in ("auto", "fast", "protocol"):
        raise ValueError(f"unknown engine {engine!r}")
    out: dict[str, MonteCarloReport] = {}
    slow = []
    for strat in strategies:
        use_fast = engine == "fast" or (engine == "auto" and fast_supported(strat) and pop.n_init > 500)
        if use_fast:
            out[strat.name] = _fast_campaign(pop, config, strat, trials, base_seed)
        else:
            slow.append(strat)
    if slow:
        reports, _ = _protocol_campaign(pop, config, slow, trials, base_seed)
        out.update(reports)
    return {s.name: out[s.name] for s in strategies}


def monte_carlo(
    pop: PopulationSpec,
    config: ProtocolConfig,
    strategy: ServerBehavior | None,
    trials: int,
    base_seed: int = 0,
    engine: str = "auto",
) -> MonteCarloReport:
    strategy = strategy or ServerBehavior()
    return run_campaign(pop, config, [strategy], trials, base_seed, engine)[strategy.name]


@dataclass(frozen=True)
class BoundCheck:
    eta: Fraction
    threshold: int
    exceed: int
    empirical: float
    bound: float
    allowance: float
    passed: bool

    def row(self) -> dict:
        return {
            "eta": frac_text(self.eta),
            "k": self.threshold,
            "exceed_count": self.exceed,
            "empirical": self.empirical,
            "bound": self.bound,
            "allowance": self.allowance,
            "pass": self.passed,
        }


def compare_to_bound(report: MonteCarloReport, params: BoundParams, etas) -> list[BoundCheck]:
    """Empirical exceedance against the single-round bound with a 3-sigma allowance."""
    if report.trials < 1:
        raise ValueError("report has no trials")
    if (params.c, params.s, params.alpha) != (report.c, report.s, report.alpha):
        raise ValueError("report and bound parameters describe different scenarios")
    rows = []
    for eta in etas:
        eta = as_fraction(eta)
        bound = float(theorem1_bound(params, eta))
        k = math.floor(eta * report.s)
        emp = report.exceedance(eta)
        allowance = bound + 3.0 * math.sqrt(bound * (1.0 - bound) / report.trials)
        rows.append(BoundCheck(eta, k, report.exceed_count(k), emp, bound, allowance, emp <= allowance))
    return rows
