import pytest
from hypothesis import given, strategies as st

from cmt.model import (
    ActionSymbol, DomainDescription, EnvLiteral, ForbidsToCause, InfluencesDyn, MentalFluent,
    NoConcurrency, PsychClass, State, Static, UnorderedClassError, all_states,
    enumerate_state_space, mental_space_size, static_violations, validate_domain,
)
from cmt.theories import AE_CLASSES, CATALOG


def test_ae_space_has_108_states():
    count, states = enumerate_state_space(AE_CLASSES)
    states = list(states)
    assert count == 108
    assert len(states) == len(set(states)) == 108


def test_catalog_states_are_distinct_members_of_space():
    space = set(enumerate_state_space(AE_CLASSES)[1])
    assert len(CATALOG) == 16
    assert len({s for s in CATALOG.values()}) == 16
    assert all(s in space for s in CATALOG.values())


@given(st.lists(st.integers(1, 4), min_size=0, max_size=4))
def test_space_size_is_product_of_class_sizes(sizes):
    classes = [PsychClass(f"c{i}", tuple(f"v{j}" for j in range(n))) for i, n in enumerate(sizes)]
    count, states = enumerate_state_space(classes)
    expected = 1
    for n in sizes:
        expected *= n
    assert count == mental_space_size(classes) == expected == len(list(states))


def test_compare_ordered_and_unordered():
    ne = AE_CLASSES[0]
    assert ne.compare("low", "high") == -1
    assert ne.compare("high", "undecided") == 1
    assert ne.compare("low", "low") == 0
    with pytest.raises(UnorderedClassError):
        AE_CLASSES[2].compare("self", "other")


def test_state_is_canonical_and_hashable():
    a = State({"b": "x", "a": "y"}, {"w": True})
    b = State([("a", "y"), ("b", "x")], [("w", True)])
    assert a == b and hash(a) == hash(b)
    assert a.holds(MentalFluent("a", "y"))
    assert a.holds(EnvLiteral("w")) and not a.holds(EnvLiteral("w", False))
    assert a.updated(mental={"a": "z"}).value("a") == "z"


def _domain(*laws):
    return DomainDescription((PsychClass("p", ("a", "b")),), ("w",),
                             (ActionSymbol("go"), ActionSymbol("talk", "human")), laws)


def test_validation_codes():
    bad = _domain(
        InfluencesDyn("nope", (MentalFluent("p", "a"),)),
        Static((EnvLiteral("zz"),)),
        ForbidsToCause((), (MentalFluent("p", "a"),)),
        InfluencesDyn("go", (MentalFluent("p", "c"),)),
    )
    codes = sorted(d.code for d in validate_domain(bad).errors)
    assert codes == ["EmptyRuleSide", "UndeclaredSymbol", "UndeclaredSymbol", "UndeclaredSymbol"]


def test_validation_duplicates_and_kinds():
    d = DomainDescription((PsychClass("p", ("a",)), PsychClass("p", ("b",))), ("p",),
                          (ActionSymbol("x", "robot"),))
    codes = {d.code for d in validate_domain(d).errors}
    assert codes == {"DuplicateName", "KindMismatch"}


def test_trivial_noconcurrency_is_a_warning():
    report = validate_domain(_domain(NoConcurrency(("go",))))
    assert report.ok
    assert [w.code for w in report.warnings] == ["TrivialNoConcurrency"]


def test_states_violating_statics_are_excluded():
    d = _domain(Static((EnvLiteral("w"),), (MentalFluent("p", "a"),)))
    bad = State({"p": "a"}, {"w": False})
    assert static_violations(d, bad)
    states = list(all_states(d))
    assert bad not in states
    assert len(states) == 3
