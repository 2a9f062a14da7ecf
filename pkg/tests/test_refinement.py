import math
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lotto.protocol import Population, ProtocolConfig, ServerBehavior, run_full_round
from lotto.protocol.round import RoundContext
from lotto.refinement import (
    ClientUtility,
    RefinementConfig,
    Strategy,
    exclusion_set,
    oort_utility,
    read_utility_table,
    refine_population,
    synthetic_population,
    worst_case_base_rate,
    write_utility_table,
    zipf_quality_gain,
    zipf_worst_quality_ratio,
)
from lotto.simharness import AdversarialRefiner, PopulationSpec, build_population

TEN = Path(__file__).parent / "data" / "ten_clients.csv"


@pytest.fixture
def ten():
    return read_utility_table(TEN)


def test_ten_client_fixture(ten):
    # slowest two are 0, 1; lowest quality two are 2, 3; disjoint
    assert exclusion_set(ten, RefinementConfig(0.2, Strategy.AND)) == []
    assert exclusion_set(ten, RefinementConfig(0.2, Strategy.OR)) == [2, 3]
    assert exclusion_set(ten, RefinementConfig(0.2, Strategy.JOINT)) == [2, 3]
    assert exclusion_set(ten, RefinementConfig(0.2, Strategy.OR, or_union=True)) == [0, 1, 2, 3]
    assert exclusion_set(ten, RefinementConfig(0.2, Strategy.OR, d_total=0.3)) == [0, 2, 3]


def test_zero_d_keeps_everyone(ten):
    for strat in Strategy:
        assert refine_population(ten, RefinementConfig(0, strat)) == list(range(10))


def test_oort_utility():
    u = ClientUtility(0, 2.0, 10, 0.5)
    assert oort_utility(u, 4.0, 2.0) == 5.0
    assert oort_utility(u, 1.0, 2.0) == pytest.approx(5.0 / 4)
    assert oort_utility(u, 2.0, 2.0) == 5.0


def test_ties_fall_to_lowest_id():
    pop = [ClientUtility(i, 1.0, 1, 1.0) for i in range(10)]
    assert exclusion_set(pop, RefinementConfig(0.3)) == [0, 1, 2]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        ClientUtility(0, 1.0, 0, 1.0)
    with pytest.raises(ValueError):
        ClientUtility(0, 0.0, 1, 1.0)
    with pytest.raises(ValueError):
        RefinementConfig(1.0)
    with pytest.raises(ValueError):
        exclusion_set([], RefinementConfig(0.1))
    with pytest.raises(ValueError):
        exclusion_set([ClientUtility(1, 1.0, 1, 1.0)] * 2, RefinementConfig(0.1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2**32), st.floats(0, 0.95))
def test_strategy_count_invariants(n, seed, d):
    pop = synthetic_population(n, seed)
    counts = {s: len(exclusion_set(pop, RefinementConfig(d, s))) for s in Strategy}
    cap = math.floor(Fraction(d) * n)
    assert all(c <= cap for c in counts.values())
    assert counts[Strategy.OR] >= counts[Strategy.JOINT] >= 0
    assert counts[Strategy.OR] >= counts[Strategy.AND]


def test_worst_case_base_rate():
    assert worst_case_base_rate(10, 1000, Fraction(1, 5)) == Fraction(1, 80)
    assert worst_case_base_rate(10, 1000, "0.2") / Fraction(1, 100) == Fraction(5, 4)
    assert worst_case_base_rate(900, 1000, "0.5") == 1
    with pytest.raises(ValueError):
        worst_case_base_rate(11, 10, 0)


def test_adversarial_refiner_matches_closed_form():
    pop = build_population(PopulationSpec(1000, 10, 3))
    strat = AdversarialRefiner(d=0.2)
    ctx = RoundContext(ProtocolConfig(s=10, alpha="1.3", n_min=100), pop, random.Random(0), 0)
    kept = strat.refine(pop.ids, ctx)
    rate = Fraction(sum(1 for c in kept if c in pop.dishonest), len(kept))
    assert rate == worst_case_base_rate(10, 1000, Fraction(1, 5))


def test_zipf_gain():
    assert zipf_quality_gain(0.2, 1.2) == pytest.approx(0.8 ** -1.2, abs=1e-12)
    assert round(zipf_quality_gain(0.2, 1.2), 3) == 1.307
    assert zipf_quality_gain(0, 1.2) == 1.0
    gains = [zipf_quality_gain(d / 10, 1.2) for d in range(9)]
    assert gains == sorted(gains)


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_zipf_brute_force(n):
    # rank-based qualities, removing floor(d n) worst: ratio is (n / (n - k))**p
    k = math.floor(0.2 * n)
    assert zipf_worst_quality_ratio(n, 0.2, 1.2) == pytest.approx((n / (n - k)) ** 1.2, rel=1e-12)
    assert zipf_worst_quality_ratio(n, 0.2, 1.2) == pytest.approx(zipf_quality_gain(0.2, 1.2), rel=1e-12)


def test_table_round_trip(tmp_path, ten):
    text = write_utility_table(ten, tmp_path / "t.csv")
    assert read_utility_table(tmp_path / "t.csv") == ten
    assert read_utility_table(text) == ten
    pop = synthetic_population(50, seed=4)
    assert read_utility_table(write_utility_table(pop)) == pop


def test_table_errors():
    with pytest.raises(ValueError, match="must start"):
        read_utility_table("client_id,latency\n1,2\n")
    with pytest.raises(ValueError, match="columns"):
        read_utility_table("# lotto-utility-table v1\na,b,c,d\n1,2,3,4\n")


def test_synthetic_population_is_seeded():
    assert synthetic_population(30, 1) == synthetic_population(30, 1)
    assert synthetic_population(30, 1) != synthetic_population(30, 2)


class _Refined(ServerBehavior):
    name = "refined"

    def __init__(self, utilities, cfg):
        self.kept = refine_population(utilities, cfg)

    def refine(self, ids, ctx):
        return [c for c in ids if c in set(self.kept)]


def test_pipeline_keeps_protocol_guarantees():
    pop = Population.generate(40, 4, seed=6)
    utils = synthetic_population(40, seed=6)
    behavior = _Refined(utils, RefinementConfig(0.25))
    assert len(behavior.kept) == 30
    cfg = ProtocolConfig(s=5, alpha=2, n_min=30)
    for seed in range(5):
        tr = run_full_round(pop, cfg.for_round(seed), behavior, seed)
        assert tr.true_n == 30
        assert tr.finalized is not None and len(tr.finalized) == 5
        assert set(tr.finalized.ids) <= set(behavior.kept)
        ok = tr.honest_finalized()
        assert ok and len({tr.views[c].canonical() for c in ok}) == 1
        excluded = set(pop.ids) - set(behavior.kept)
        assert not excluded & set(tr.verdicts)
