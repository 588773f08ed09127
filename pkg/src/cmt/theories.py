"""The appraisal emotion space, its named emotions and the two emotion-regulation
rule sets (hedonic and utilitarian), in definition and listing form."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .engine import FiredRule, SemanticsConfig, fired_rules
from .model import (
    ActionSymbol, DomainDescription, ForbidsToCause, InfluencesDyn, MentalFluent, PsychClass,
    State, enumerate_state_space,
)

LEVELS = ("low", "undecided", "high")
AC_VALUES = ("self", "other", "environment", "undecided")

AE_CLASSES = (
    PsychClass("ne", LEVELS, True),
    PsychClass("go", LEVELS, True),
    PsychClass("ac", AC_VALUES, False),
    PsychClass("co", LEVELS, True),
)
CLASS_ORDER = ("ne", "go", "ac", "co")
LONG_NAMES = {"ne": "need_consistency", "go": "goal_consistency",
              "ac": "accountability", "co": "control_potential"}

_ABBREV = {"h": "high", "u": "undecided", "l": "low",
           "s": "self", "o": "other", "e": "environment"}
_SHORT = {"high": "h", "undecided": "u", "low": "l",
          "self": "s", "other": "o", "environment": "e"}


def ae_state(code: str) -> State:
    """State from a compact (ne, go, ac, co) code such as "hloh" or "h,l,o,h"."""
    letters = [c for c in code.lower() if c.isalpha()]
    if len(letters) != 4:
        raise ValueError(f"need four letters for (ne, go, ac, co), got {code!r}")
    if any(c not in _ABBREV for c in letters):
        raise ValueError(f"bad appraisal code {code!r}")
    values = [_ABBREV[c] for c in letters]
    if values[2] not in AC_VALUES or any(v not in LEVELS for i, v in enumerate(values) if i != 2):
        raise ValueError(f"bad appraisal code {code!r}")
    return State(dict(zip(CLASS_ORDER, values)))


def short_code(s: State) -> str:
    return "(" + ",".join(_SHORT[s.value(c)] for c in CLASS_ORDER) + ")"


# Named emotions as (ne, go, ac, co).
CATALOG: dict[str, State] = {name: ae_state(code) for name, code in (
    ("Anger", "hloh"), ("Dislike", "ulol"), ("Disgust", "lleh"), ("Sadness", "hlel"),
    ("Hope", "uhel"), ("Frustration", "hleh"), ("Fear", "ulel"), ("Shame", "llsh"),
    ("Distress", "llel"), ("Joy", "hheu"), ("Liking", "uhou"), ("Pride", "uhsu"),
    ("Surprise", "uueu"), ("Relief", "uheu"), ("Regret", "ulsl"), ("Guilt", "hhsh"),
)}


def label_state(s: State) -> str | None:
    for name, st in CATALOG.items():
        if st.mental == s.mental:
            return name
    return None


def lookup_state(text: str) -> State:
    """Catalog label (any case) or a compact appraisal code."""
    for name, st in CATALOG.items():
        if name.lower() == text.strip().lower():
            return st
    return ae_state(text)


def ae_space() -> list[State]:
    return list(enumerate_state_space(AE_CLASSES)[1])


def set_action(cls: str, value: str) -> str:
    return f"set_{cls}_{value}"


def ae_domain() -> DomainDescription:
    """The four appraisal classes with one action per class value that sets it."""
    actions, laws = [], []
    for c in AE_CLASSES:
        for v in c.values:
            name = set_action(c.name, v)
            actions.append(ActionSymbol(name))
            laws.append(InfluencesDyn(name, (MentalFluent(c.name, v),)))
    return DomainDescription(AE_CLASSES, (), tuple(actions), tuple(laws))


# Rule sets ------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintSchema:
    """One listing constraint: `forbidden` may not hold at t+1 when every
    condition holds at t. With `persist` set, the forbidden fluent's class must
    also have a different value at t, which expands into one rule per value."""

    forbidden: MentalFluent
    conditions: tuple[MentalFluent, ...] = ()
    persist: bool = False

    def expand(self, classes: dict[str, PsychClass]) -> list[tuple]:
        if not self.persist:
            return [(self.conditions, (self.forbidden,))]
        cls = classes[self.forbidden.cls]
        return [(self.conditions + (MentalFluent(cls.name, v),), (self.forbidden,))
                for v in cls.values if v != self.forbidden.value]


@dataclass(frozen=True)
class TheorySpec:
    name: str
    source: str
    rules: tuple[ForbidsToCause, ...]
    schemas: tuple[ConstraintSchema, ...] = field(default=(), compare=False)

    def swapped(self) -> "TheorySpec":
        return TheorySpec(self.name, self.source, tuple(r.swapped() for r in self.rules))

    def apply(self, domain: DomainDescription) -> DomainDescription:
        return domain.with_laws(self.rules)


def _m(cls, value):
    return MentalFluent(cls, _ABBREV.get(value, value))


def _def_rules(name: str, pairs) -> tuple[ForbidsToCause, ...]:
    out = []
    for i, (left, right) in enumerate(pairs, start=1):
        out.append(ForbidsToCause(tuple(_m(*x) for x in left), tuple(_m(*x) for x in right),
                                  i, name))
    return tuple(out)


_HER_DEFINITION = [
    ([("ne", "h")], [("go", "l")]), ([("ne", "h")], [("go", "u")]),
    ([("ne", "h")], [("go", "h")]), ([("ne", "u")], [("go", "l")]),
    ([("ne", "u")], [("go", "u")]), ([("ne", "u")], [("go", "h")]),
    ([("go", "h")], [("go", "l")]), ([("go", "h")], [("go", "u")]),
    ([("go", "u")], [("go", "l")]), ([("go", "l")], [("co", "h")]),
] + [([("ne", "h"), ("go", g), ("ac", a)], [("co", "h")])
     for a in ("o", "s", "u") for g in ("l", "u")]

_UER_DEFINITION = [
    ([("ne", "l")], [("ne", "u")]), ([("ne", "l")], [("ne", "h")]),
    ([("ne", "u")], [("ne", "l")]), ([("ne", "u")], [("ne", "h")]),
    ([("go", "l")], [("ne", "l")]), ([("go", "l")], [("ne", "u")]),
    ([("go", "u")], [("ne", "l")]), ([("go", "u")], [("ne", "u")]),
    ([("go", "h")], [("ne", "l")]), ([("go", "h")], [("ne", "u")]),
    ([("go", "h")], [("ne", "h")]),
    ([("ac", "u")], [("ac", "s")]), ([("ac", "u")], [("ac", "o")]),
    ([("ac", "u")], [("ac", "e")]),
    ([("ac", "o")], [("ac", "u")]), ([("ac", "o")], [("ac", "s")]),
    ([("ac", "o")], [("ac", "e")]),
    ([("ac", "e")], [("co", "l")]), ([("ac", "e")], [("co", "u")]),
    ([("co", "l")], [("co", "u")]), ([("co", "l")], [("co", "h")]),
    ([("co", "u")], [("co", "l")]), ([("co", "u")], [("co", "h")]),
]


def _schema(forbidden, *conds, persist=False):
    return ConstraintSchema(_m(*forbidden), tuple(_m(*c) for c in conds), persist)


_HER_LISTING = (
    _schema(("ne", "h"), ("go", "l")),
    _schema(("ne", "h"), ("go", "u")),
    _schema(("ne", "u"), ("go", "l")),
    _schema(("ne", "u"), ("go", "u")),
    _schema(("go", "l"), persist=True),
    _schema(("go", "u"), persist=True),
    _schema(("co", "h"), ("go", "l")),
    _schema(("co", "h"), ("ne", "h"), ("go", "l"), ("ac", "o")),
    _schema(("co", "h"), ("ne", "h"), ("go", "u"), ("ac", "o")),
    _schema(("co", "h"), ("ne", "h"), ("go", "l"), ("ac", "s")),
    _schema(("co", "h"), ("ne", "h"), ("go", "u"), ("ac", "s")),
    _schema(("co", "h"), ("ne", "h"), ("go", "l"), ("ac", "u")),
    _schema(("co", "h"), ("ne", "h"), ("go", "u"), ("ac", "u")),
)

_UER_LISTING = (
    _schema(("ne", "l"), persist=True),
    _schema(("ne", "u"), persist=True),
    _schema(("go", "l"), ("ne", "l")),
    _schema(("go", "l"), ("ne", "u")),
    _schema(("go", "u"), ("ne", "l")),
    _schema(("go", "u"), ("ne", "u")),
    _schema(("go", "h"), ("ne", "u")),
    _schema(("go", "h"), ("ne", "h")),
    _schema(("ac", "u"), persist=True),
    _schema(("ac", "o"), persist=True),
    _schema(("ac", "e"), ("co", "l")),
    _schema(("ac", "e"), ("co", "u")),
    _schema(("co", "l"), persist=True),
    _schema(("co", "u"), persist=True),
)


def _listing_spec(name: str, schemas) -> TheorySpec:
    classes = {c.name: c for c in AE_CLASSES}
    rules = []
    for schema in schemas:
        for left, right in schema.expand(classes):
            rules.append(ForbidsToCause(left, right, len(rules) + 1, name))
    return TheorySpec(name, "listing", tuple(rules), tuple(schemas))


THEORY_NAMES = ("HER", "UER")
SOURCES = ("definition", "listing")


def builtin_theory(name: str, source: str = "listing") -> TheorySpec:
    """The hedonic (HER) or utilitarian (UER) rule set.

    "definition" rules read left-holds-now, right-forbidden-next. "listing"
    rules are stored the way the constraint listing writes them: conditions at
    t on the left, the forbidden fluent at t+1 on the right. Both are meant to
    be evaluated as-written.
    """
    name = name.upper()
    if name not in THEORY_NAMES:
        raise ValueError(f"unknown theory {name}")
    if source == "definition":
        pairs = _HER_DEFINITION if name == "HER" else _UER_DEFINITION
        return TheorySpec(name, source, _def_rules(name, pairs))
    if source == "listing":
        return _listing_spec(name, _HER_LISTING if name == "HER" else _UER_LISTING)
    raise ValueError(f"source must be one of {SOURCES}")


@dataclass(frozen=True)
class TransitionJudgment:
    passed: bool
    fired: tuple[FiredRule, ...]
    config: SemanticsConfig


def check_transition(spec: TheorySpec, config: SemanticsConfig, s: State,
                     s2: State) -> TransitionJudgment:
    fired = tuple(fired_rules(spec.rules, s, s2, config))
    return TransitionJudgment(not fired, fired, config)


def _rank(cls: str, s: State) -> int:
    return LEVELS.index(s.value(cls))


def eval_invariant(theory: str, states) -> tuple[bool, int | None]:
    """Evaluate the emotion invariant on states s1..sn (s0 is exempt).

    HER: need consistency never exceeds goal consistency.
    UER: need consistency high, goal consistency not above it, control high,
    accountability neither other nor undecided.
    Returns (holds, index of the first failing state).
    """
    theory = theory.upper()
    for i, s in enumerate(states):
        if i == 0:
            continue
        if theory == "HER":
            ok = _rank("ne", s) <= _rank("go", s)
        elif theory == "UER":
            ok = (s.value("ne") == "high" and _rank("go", s) <= _rank("ne", s)
                  and s.value("co") == "high" and s.value("ac") not in ("other", "undecided"))
        else:
            raise ValueError(f"unknown theory {theory}")
        if not ok:
            return False, i
    return True, None


def data_path(name: str):
    """Path of a shipped fixture file."""
    return resources.files("cmt") / "data" / name


def read_data(name: str) -> str:
    return data_path(name).read_text(encoding="utf-8")
