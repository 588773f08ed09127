"""Numbered acceptance criteria; the terminal summary prints one line per criterion."""
import itertools
import random
import time
import timeit

import pytest

from cmt.analysis import (
    HOLDING, ONSET, all_configs, config_key, discrepancy_report, priority, reachability,
    run_experiment, theory_engine,
)
from cmt.aspgen import differential_check, find_solver, random_case
from cmt.dsl import (
    DslError, parse_domain, parse_observations, parse_rules, print_domain, print_observations,
    format_law,
)
from cmt.engine import SemanticsConfig, Trajectory
from cmt.model import ValidationError, mental_space_size
from cmt.theories import (
    AE_CLASSES, CATALOG, CLASS_ORDER, THEORY_NAMES, ae_domain, ae_space, ae_state,
    builtin_theory, check_transition, read_data,
)
from test_aspgen import TEMPLATE_INSTANCES, _constraints, _normalize, _small_program, GOLDEN
from test_dsl import _fuzz_inputs

criterion = pytest.mark.criterion
LEVEL = {"low": 0, "undecided": 1, "high": 2}


@criterion(1, "108 mental states")
def test_c01_state_space_cardinality():
    assert mental_space_size(AE_CLASSES) == 108
    states = ae_space()
    assert len(states) == len(set(states)) == 108
    assert min(timeit.repeat(ae_space, number=1, repeat=20)) < 0.001


@criterion(2, "dialogue fixture verdicts under listing/holding")
def test_c02_dialogue_fixture():
    start = time.perf_counter()
    states = Trajectory.from_json(read_data("s8.json")).states
    verdicts = {th: [check_transition(builtin_theory(th, "listing"), HOLDING, a, b).passed
                     for a, b in zip(states, states[1:])] for th in THEORY_NAMES}
    assert verdicts["HER"] == [False, True, True, True, True, True]
    assert verdicts["UER"] == [False] * 6
    assert time.perf_counter() - start < 1


@criterion(3, "HER keeps ne <= go on every accepted transition")
def test_c03_her_invariance():
    start = time.perf_counter()
    spec = builtin_theory("her", "listing")
    bad = [(a, b) for a, b in itertools.product(ae_space(), repeat=2)
           if check_transition(spec, HOLDING, a, b).passed
           and LEVEL[b.value("ne")] > LEVEL[b.value("go")]]
    assert bad == []
    assert time.perf_counter() - start < 5


def _uer_ok(s):
    return (s.value("ne") == "high" and LEVEL[s.value("go")] <= LEVEL[s.value("ne")]
            and s.value("co") == "high" and s.value("ac") not in ("other", "undecided"))


@criterion(4, "UER keeps its invariant on every accepted transition")
def test_c04_uer_invariance():
    start = time.perf_counter()
    spec = builtin_theory("uer", "listing")
    bad = [(a, b) for a, b in itertools.product([s for s in ae_space() if _uer_ok(s)],
                                                ae_space())
           if check_transition(spec, HOLDING, a, b).passed and not _uer_ok(b)]
    assert bad == []
    assert time.perf_counter() - start < 5


SPOT_CHECKS = [
    ("HER", "Joy", "Anger", False), ("HER", "Fear", "Hope", True),
    ("HER", "Frustration", "Joy", True), ("HER", "Hope", "Fear", False),
    ("UER", "Fear", "Regret", True), ("UER", "Anger", "Frustration", True),
    ("UER", "Dislike", "Anger", True), ("UER", "Shame", "Hope", False),
]


@criterion(5, "eight planning spot-checks under listing/onset")
def test_c05_planning_spot_checks():
    start = time.perf_counter()
    engines = {th: theory_engine(th, "listing", ONSET) for th in THEORY_NAMES}
    got = [(th, i, g, engines[th].plan(CATALOG[i], CATALOG[g], 6) is not None)
           for th, i, g, _ in SPOT_CHECKS]
    assert got == SPOT_CHECKS
    assert time.perf_counter() - start < 2


@criterion(6, "UER Frustration reachable from all 15 others")
def test_c06_uer_frustration_column():
    start = time.perf_counter()
    m = reachability("uer", ONSET, 6)
    assert m.column("Frustration") == [x for x in m.labels if x != "Frustration"]
    assert time.perf_counter() - start < 5


@criterion(7, "onset self-reachability for every catalog state")
def test_c07_onset_self_loops():
    start = time.perf_counter()
    for th in THEORY_NAMES:
        for src in ("listing", "definition"):
            eng = theory_engine(th, src, ONSET)
            for s in CATALOG.values():
                assert eng.plan(s, s, 6) is not None
    assert time.perf_counter() - start < 2


@pytest.fixture(scope="module")
def report():
    start = time.perf_counter()
    rep = discrepancy_report()
    return rep, time.perf_counter() - start


@criterion(8, "discrepancy report: conflicts detected, listing/holding unique")
def test_c08_discrepancy_report(report):
    rep, elapsed = report
    text = rep.to_text()
    assert all(c["detected"] for c in rep.conflicts) and len(rep.conflicts) == 2
    assert "Anger-Liking" in text and "Fear-Regret" in text
    assert elapsed < 10
    listing = [config_key(src, cfg) for src, cfg in all_configs() if src == "listing"]
    matches = [k for k in rep.fixture_matches if k in listing]
    assert matches == ["listing/as-written/holding"], matches


@criterion(9, "golden constraint listings and template instances, byte stable")
def test_c09_asp_golden():
    for name in ("her", "uer"):
        golden = (GOLDEN / f"{name}_constraints.lp").read_text()
        assert _normalize("\n".join(_constraints(name))) == _normalize(golden)
    text = _small_program().text
    assert text == _small_program().text == (GOLDEN / "small_program.lp").read_text()
    lines = text.splitlines()
    missing = [k for k, v in TEMPLATE_INSTANCES.items() if v not in lines]
    assert missing == []


@criterion(10, "engine and emitted program agree on 60 generated theories")
@pytest.mark.skipif(find_solver() is None, reason="no answer set solver available")
def test_c10_differential():
    start = time.perf_counter()
    rng = random.Random(10)
    report = differential_check([random_case(rng) for _ in range(60)], find_solver())
    assert len(report.cases) >= 50
    assert report.disagreements == []
    assert time.perf_counter() - start < 60


@criterion(11, "512-run grid under 60 s, mean run <= 100 ms")
def test_c11_grid_performance():
    start = time.perf_counter()
    result = run_experiment(ONSET, 6, jobs=1)
    elapsed = time.perf_counter() - start
    assert len(result.rows) == 512
    assert elapsed < 60
    assert result.summary()["timing_ms"]["mean"] <= 100


@criterion(12, "parser round trip on fixtures and 10k fuzz inputs")
def test_c12_parser_robustness():
    for name in ("ae.cmt", "dialogue.cmt"):
        d = parse_domain(read_data(name))
        text = print_domain(d)
        assert parse_domain(text) == d and print_domain(parse_domain(text)) == text
    for name in ("her_listing.cmt", "uer_listing.cmt", "her_definition.cmt",
                 "uer_definition.cmt"):
        rules = parse_rules(read_data(name), ae_domain())
        assert parse_rules("\n".join(format_law(r) for r in rules), ae_domain()) == rules
    d = parse_domain(read_data("dialogue.cmt"))
    obs = parse_observations(read_data("dialogue.cmto"), d)
    assert parse_observations(print_observations(obs), d) == obs
    t = Trajectory.from_json(read_data("s8.json"))
    assert Trajectory.from_json(t.to_json()) == t
    for data in _fuzz_inputs(10_000, seed=12):
        for fn in (parse_domain, parse_observations):
            try:
                fn(data)
            except (DslError, ValidationError):
                pass


@criterion(13, "priority formula examples and structural bounds")
def test_c13_priority():
    def traj(codes):
        states = tuple(ae_state(c) for c in codes)
        return Trajectory(states, tuple(frozenset() for _ in states[1:]))

    one = priority([traj(["hlsh", "hlsl", "hlsl"])])
    assert one.weight("co", 1) == 1.0
    assert sum(one.weight(c, i) for c in CLASS_ORDER for i in (1, 2)) == 1.0
    zero = priority([traj(["hlsh"] * 3)])
    assert all(w == 0 for ws in zero.weights.values() for w in ws)
    table = priority(reachability("her", ONSET, 6).witnesses(), 6)
    for i in range(1, 7):
        ws = [table.weight(c, i) for c in CLASS_ORDER]
        assert all(0 <= w <= 1 for w in ws) and sum(ws) <= 1 + 1e-9
