"""Core vocabulary of action theories: symbols, literals, states and causal laws."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union


class CmtError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class SourceSpan:
    """Location of a construct inside a source text (1-based line and column)."""

    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan | None = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


class UnorderedClassError(CmtError):
    """Raised when values of an unordered class are compared."""


@dataclass(frozen=True)
class PsychClass:
    """A mental-state class: a name, its admissible values and whether they are ordered.

    For ordered classes the declaration order is the order, lowest first.
    """

    name: str
    values: tuple[str, ...]
    ordered: bool = False

    def rank(self, value: str) -> int:
        if not self.ordered:
            raise UnorderedClassError(f"class {self.name} is unordered")
        return self.values.index(value)

    def compare(self, a: str, b: str) -> int:
        """Return -1, 0 or 1 as a is below, equal to or above b."""
        ra, rb = self.rank(a), self.rank(b)
        return (ra > rb) - (ra < rb)


@dataclass(frozen=True)
class ActionSymbol:
    name: str
    kind: str = "env"  # "env" or "human"


@dataclass(frozen=True, order=True)
class MentalFluent:
    """The mental fluent f(cls, value)."""

    cls: str
    value: str

    def __str__(self) -> str:
        return f"f({self.cls},{self.value})"


@dataclass(frozen=True, order=True)
class EnvLiteral:
    """An environment fluent or its negation."""

    name: str
    positive: bool = True

    def negated(self) -> "EnvLiteral":
        return EnvLiteral(self.name, not self.positive)

    def __str__(self) -> str:
        return self.name if self.positive else f"neg {self.name}"


Literal = Union[EnvLiteral, MentalFluent]


def _pairs(items, kind) -> tuple:
    if isinstance(items, Mapping):
        items = items.items()
    return tuple(sorted((str(k), kind(v)) for k, v in items))


@dataclass(frozen=True)
class State:
    """A total assignment: every env fluent to a truth value, every class to one value.

    Accepts dicts or pair sequences and stores them sorted by name, so two
    states with the same assignment compare and hash equal.
    """

    mental: tuple[tuple[str, str], ...] = ()
    env: tuple[tuple[str, bool], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mental", _pairs(self.mental, str))
        object.__setattr__(self, "env", _pairs(self.env, bool))

    @cached_property
    def mental_map(self) -> dict[str, str]:
        return dict(self.mental)

    @cached_property
    def env_map(self) -> dict[str, bool]:
        return dict(self.env)

    def value(self, cls: str) -> str:
        return self.mental_map[cls]

    def holds(self, lit: Literal) -> bool:
        if isinstance(lit, MentalFluent):
            return self.mental_map.get(lit.cls) == lit.value
        return self.env_map.get(lit.name) == lit.positive

    def holds_all(self, lits: Iterable[Literal]) -> bool:
        return all(self.holds(lit) for lit in lits)

    def literals(self) -> tuple[Literal, ...]:
        out: list[Literal] = [EnvLiteral(n, v) for n, v in self.env]
        out.extend(MentalFluent(c, v) for c, v in self.mental)
        return tuple(out)

    def updated(self, mental: Mapping[str, str] | None = None,
                env: Mapping[str, bool] | None = None) -> "State":
        m = dict(self.mental)
        m.update(mental or {})
        e = dict(self.env)
        e.update(env or {})
        return State(m, e)

    def describe(self, classes: Iterable[str] | None = None) -> str:
        order = list(classes) if classes is not None else [c for c, _ in self.mental]
        parts = [f"{c}={self.mental_map[c]}" for c in order if c in self.mental_map]
        parts += [n if v else f"neg {n}" for n, v in self.env]
        return "{" + ", ".join(parts) + "}"


# Causal laws. Spans are excluded from equality so a printed and re-parsed
# domain compares equal to the original.

def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Causes:
    action: str
    effects: tuple[Literal, ...]
    conditions: tuple[Literal, ...] = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Static:
    effects: tuple[Literal, ...]
    conditions: tuple[Literal, ...] = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Triggers:
    conditions: tuple[Literal, ...]
    action: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Allows:
    conditions: tuple[Literal, ...]
    action: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Inhibits:
    conditions: tuple[Literal, ...]
    action: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class NoConcurrency:
    actions: tuple[str, ...]
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Default:
    literal: EnvLiteral
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class InfluencesDyn:
    action: str
    effects: tuple[MentalFluent, ...]
    conditions: tuple[Literal, ...] = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class InfluencesStatic:
    conditions: tuple[Literal, ...]
    effects: tuple[MentalFluent, ...]
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Facilitates:
    conditions: tuple[MentalFluent, ...]
    action: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Contravenes:
    conditions: tuple[MentalFluent, ...]
    action: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class ForbidsToCause:
    """Holding `left` at one step forbids `right` at the next, as written.

    `rule_id` is the declaration-order number; `theory` names the rule set it
    came from ("" for laws declared in the domain itself).
    """

    left: tuple[MentalFluent, ...]
    right: tuple[MentalFluent, ...]
    rule_id: int = 0
    theory: str = ""
    span: SourceSpan | None = _span()

    def swapped(self) -> "ForbidsToCause":
        return ForbidsToCause(self.right, self.left, self.rule_id, self.theory, self.span)


CausalLaw = Union[Causes, Static, Triggers, Allows, Inhibits, NoConcurrency, Default,
                  InfluencesDyn, InfluencesStatic, Facilitates, Contravenes, ForbidsToCause]

DYNAMIC_LAWS = (Causes, InfluencesDyn)
STATIC_LAWS = (Static, InfluencesStatic)


@dataclass(frozen=True)
class DomainDescription:
    """Alphabet plus causal laws. Laws keep their declaration order."""

    classes: tuple[PsychClass, ...] = ()
    fluents: tuple[str, ...] = ()
    actions: tuple[ActionSymbol, ...] = ()
    laws: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "laws", tuple(self.laws))

    @cached_property
    def class_map(self) -> dict[str, PsychClass]:
        return {c.name: c for c in self.classes}

    @cached_property
    def action_map(self) -> dict[str, ActionSymbol]:
        return {a.name: a for a in self.actions}

    @property
    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    def laws_of(self, *kinds) -> list:
        return [law for law in self.laws if isinstance(law, kinds)]

    @cached_property
    def forbid_rules(self) -> tuple[ForbidsToCause, ...]:
        return tuple(self.laws_of(ForbidsToCause))

    @cached_property
    def defaults(self) -> dict[str, bool]:
        return {d.literal.name: d.literal.positive for d in self.laws_of(Default)}

    def with_laws(self, laws: Iterable) -> "DomainDescription":
        return DomainDescription(self.classes, self.fluents, self.actions,
                                 self.laws + tuple(laws))


@dataclass
class ValidationReport:
    errors: list[Diagnostic] = field(default_factory=list)
    warnings: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(d) for d in self.errors)


class ValidationError(CmtError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def _law_literals(law) -> list[Literal]:
    lits: list[Literal] = []
    for name in ("effects", "conditions", "left", "right"):
        lits.extend(getattr(law, name, ()))
    if isinstance(law, Default):
        lits.append(law.literal)
    return lits


def validate_domain(domain: DomainDescription) -> ValidationReport:
    """Check symbol declarations, kinds and rule shapes."""
    report = ValidationReport()
    err = report.errors

    seen: dict[str, str] = {}
    for kind, names in (("class", domain.class_names), ("fluent", domain.fluents),
                        ("action", domain.action_names)):
        for name in names:
            if name in seen:
                err.append(Diagnostic("DuplicateName",
                                      f"{kind} {name} already declared as {seen[name]}"))
            seen[name] = kind
    for c in domain.classes:
        if not c.values:
            err.append(Diagnostic("EmptyClass", f"class {c.name} has no values"))
        if len(set(c.values)) != len(c.values):
            err.append(Diagnostic("DuplicateName", f"class {c.name} repeats a value"))
    for a in domain.actions:
        if a.kind not in ("env", "human"):
            err.append(Diagnostic("KindMismatch", f"action {a.name} has unknown kind {a.kind}"))

    def check_lit(lit, span):
        if isinstance(lit, MentalFluent):
            c = domain.class_map.get(lit.cls)
            if c is None:
                err.append(Diagnostic("UndeclaredSymbol", f"undeclared class {lit.cls}", span))
            elif lit.value not in c.values:
                err.append(Diagnostic("UndeclaredSymbol",
                                      f"{lit.value} is not a value of class {lit.cls}", span))
        elif lit.name not in domain.fluents:
            err.append(Diagnostic("UndeclaredSymbol", f"undeclared fluent {lit.name}", span))

    def check_action(name, span, human=False):
        a = domain.action_map.get(name)
        if a is None:
            err.append(Diagnostic("UndeclaredSymbol", f"undeclared action {name}", span))
        elif human and a.kind != "human":
            err.append(Diagnostic("KindMismatch", f"{name} is not a human action", span))

    for law in domain.laws:
        span = law.span
        for lit in _law_literals(law):
            check_lit(lit, span)
        if isinstance(law, (Causes, InfluencesDyn, Triggers, Allows, Inhibits)):
            check_action(law.action, span)
        elif isinstance(law, (Facilitates, Contravenes)):
            check_action(law.action, span, human=True)
        elif isinstance(law, NoConcurrency):
            for name in law.actions:
                check_action(name, span)
        if isinstance(law, (InfluencesDyn, InfluencesStatic)):
            if any(not isinstance(e, MentalFluent) for e in law.effects):
                err.append(Diagnostic("KindMismatch", "influence effects must be mental", span))
        if isinstance(law, (Facilitates, Contravenes)):
            if any(not isinstance(c, MentalFluent) for c in law.conditions):
                err.append(Diagnostic("KindMismatch",
                                      "facilitation conditions must be mental", span))
        if isinstance(law, ForbidsToCause):
            if not law.left or not law.right:
                err.append(Diagnostic("EmptyRuleSide", "forbids_to_cause needs both sides", span))
            if any(not isinstance(x, MentalFluent) for x in law.left + law.right):
                err.append(Diagnostic("KindMismatch", "forbids_to_cause sides must be mental",
                                      span))
        if isinstance(law, (Causes, Static, InfluencesDyn, InfluencesStatic)) and not law.effects:
            err.append(Diagnostic("EmptyRuleSide", "law without effects", span))
        if isinstance(law, NoConcurrency) and len(law.actions) < 2:
            report.warnings.append(Diagnostic("TrivialNoConcurrency",
                                              "noconcurrency with fewer than two actions", span))
    return report


def mental_space_size(classes: Iterable[PsychClass]) -> int:
    n = 1
    for c in classes:
        n *= len(c.values)
    return n


def enumerate_state_space(classes: Iterable[PsychClass]) -> tuple[int, Iterator[State]]:
    """Count and lazily enumerate all mental assignments in class/value order."""
    classes = tuple(classes)
    names = [c.name for c in classes]

    def gen():
        for combo in itertools.product(*(c.values for c in classes)):
            yield State(zip(names, combo))

    return mental_space_size(classes), gen()


def static_violations(domain: DomainDescription, state: State) -> list:
    """Static laws whose conditions hold in `state` but whose effects do not."""
    bad = []
    for law in domain.laws_of(*STATIC_LAWS):
        if state.holds_all(law.conditions) and not state.holds_all(law.effects):
            bad.append(law)
    return bad


def is_state(domain: DomainDescription, state: State) -> bool:
    """True when `state` is total over the alphabet and closed under static laws."""
    if set(state.env_map) != set(domain.fluents):
        return False
    if set(state.mental_map) != set(domain.class_names):
        return False
    for c in domain.classes:
        if state.mental_map[c.name] not in c.values:
            return False
    return not static_violations(domain, state)


def all_states(domain: DomainDescription) -> Iterator[State]:
    """Every state of the domain (env and mental parts), closed under static laws."""
    _, mental = enumerate_state_space(domain.classes)
    mental = list(mental)
    for bits in itertools.product((False, True), repeat=len(domain.fluents)):
        env = dict(zip(domain.fluents, bits))
        for m in mental:
            s = State(m.mental, env)
            if not static_violations(domain, s):
                yield s
