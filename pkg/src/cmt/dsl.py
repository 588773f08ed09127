"""Text syntax for domains (.cmt), observations (.cmto) and queries (.cmtq).

A hand-written lexer and recursive-descent parser. Statements start with a
keyword and end with ``;`` (the ``;`` after a class block is optional).
``#`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    ActionSymbol, Allows, Causes, CmtError, Contravenes, Default, DomainDescription,
    EnvLiteral, Facilitates, ForbidsToCause, Inhibits, InfluencesDyn, InfluencesStatic,
    Literal, MentalFluent, NoConcurrency, PsychClass, SourceSpan, Static, Triggers,
    ValidationError, validate_domain,
)

KEYWORDS = {
    "class", "ordered", "fluent", "action", "env", "human", "law", "causes", "influences",
    "if", "triggers", "allows", "inhibits", "facilitates", "contravenes", "forbids_to_cause",
    "noconcurrency", "default", "neg", "f", "observe", "at", "occurs_at", "query", "goal",
    "with", "horizon",
}
ACTION_OPS = ("triggers", "allows", "inhibits", "facilitates", "contravenes")
LAW_OPS = ("causes", "influences", "if", "forbids_to_cause") + ACTION_OPS


class DslError(CmtError):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        self.message = message
        self.span = span
        self.expected = expected
        extra = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{span}: {message}{extra}")


class LexError(DslError):
    pass


class ParseError(DslError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "kw", "ident", "int", "punct", "eof"
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
                       r"|(?P<ident>[a-z][a-z0-9_]*)|(?P<int>[0-9]+)|(?P<punct>[{}(),;])")


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", SourceSpan(file, line, col))
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "int", "punct"):
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            elif kind == "int" and len(value) > 9:
                raise LexError("integer too large", SourceSpan(file, line, col, len(value)))
            tokens.append(Token(kind, value, SourceSpan(file, line, col, len(value))))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(file, line, pos - line_start + 1, 0)))
    return tokens


@dataclass(frozen=True)
class FluentObservation:
    literal: Literal
    time: int


@dataclass(frozen=True)
class ActionObservation:
    action: str
    time: int


@dataclass(frozen=True)
class Query:
    goal: tuple[Literal, ...]
    schedule: tuple[tuple[frozenset, int], ...]
    horizon: int


@dataclass(frozen=True)
class ActionTheory:
    """A domain description together with observations."""

    domain: DomainDescription
    observations: tuple = ()

    def with_observations(self, extra) -> "ActionTheory":
        return ActionTheory(self.domain, self.observations + tuple(extra))


@dataclass
class _RawLaw:
    lhs: list
    op: str | None
    rhs: list = field(default_factory=list)
    action: str | None = None
    conds: list | None = None
    span: SourceSpan | None = None


class _Parser:
    def __init__(self, text: str, file: str):
        if isinstance(text, (bytes, bytearray)):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise LexError("input is not valid UTF-8", SourceSpan(file, 1, 1)) from exc
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "punct") and t.text == text

    def take(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, what: str, *expected: str):
        t = self.tok
        shown = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {shown} in {what}", t.span, expected)

    def expect(self, text: str, what: str) -> Token:
        if not self.at(text):
            self.fail(what, repr(text))
        return self.take()

    def ident(self, what: str) -> Token:
        if self.tok.kind != "ident":
            self.fail(what, "identifier")
        return self.take()

    def integer(self, what: str) -> int:
        if self.tok.kind != "int":
            self.fail(what, "integer")
        return int(self.take().text)

    def ident_list(self, what: str) -> list[Token]:
        out = [self.ident(what)]
        while self.at(","):
            self.take()
            out.append(self.ident(what))
        return out

    # literals
    def literal(self, what: str) -> Literal:
        if self.at("f"):
            self.take()
            self.expect("(", what)
            cls = self.ident(what).text
            self.expect(",", what)
            value = self.ident(what).text
            self.expect(")", what)
            return MentalFluent(cls, value)
        if self.at("neg"):
            self.take()
            return EnvLiteral(self.ident(what).text, False)
        if self.tok.kind == "ident":
            return EnvLiteral(self.take().text, True)
        self.fail(what, "f(class,value)", "neg", "identifier")

    def literal_list(self, what: str) -> list[Literal]:
        out = [self.literal(what)]
        while self.at(","):
            self.take()
            out.append(self.literal(what))
        return out

    def starts_literal(self) -> bool:
        return self.at("f") or self.at("neg") or self.tok.kind == "ident"

    # statements
    def class_decl(self):
        start = self.take().span
        name = self.ident("class declaration").text
        ordered = False
        if self.at("ordered"):
            self.take()
            ordered = True
        self.expect("{", "class declaration")
        values = [t.text for t in self.ident_list("class values")]
        self.expect("}", "class declaration")
        if self.at(";"):
            self.take()
        return PsychClass(name, tuple(values), ordered), start

    def action_decl(self):
        self.take()
        kind = "env"
        if self.at("env") or self.at("human"):
            kind = self.take().text
        names = self.ident_list("action declaration")
        self.expect(";", "action declaration")
        return [ActionSymbol(t.text, kind) for t in names]

    def law(self) -> _RawLaw:
        span = self.take().span
        lhs = self.literal_list("law") if self.starts_literal() else []
        if self.at(";"):
            self.take()
            return _RawLaw(lhs, None, span=span)
        if not any(self.at(op) for op in LAW_OPS):
            self.fail("law", *LAW_OPS, "';'")
        op = self.take().text
        raw = _RawLaw(lhs, op, span=span)
        if op in ACTION_OPS:
            raw.action = self.ident(f"{op} law").text
        else:
            raw.rhs = self.literal_list(f"{op} law")
            if op in ("causes", "influences") and self.at("if"):
                self.take()
                raw.conds = self.literal_list("if clause")
        self.expect(";", "law")
        return raw


def _resolve(raw: _RawLaw, fluents: set[str]):
    """Turn a raw law into a typed law once declarations are known."""
    lhs, op, span = tuple(raw.lhs), raw.op, raw.span
    conds = tuple(raw.conds or ())

    def single_action():
        if len(lhs) != 1 or not isinstance(lhs[0], EnvLiteral) or not lhs[0].positive:
            raise ParseError(f"{op} law needs a single action name on the left", span)
        return lhs[0].name

    if op is None:
        if not lhs:
            raise ParseError("empty law", span)
        return Static(lhs, (), span)
    if op == "if":
        return Static(lhs, tuple(raw.rhs), span)
    if op == "causes":
        return Causes(single_action(), tuple(raw.rhs), conds, span)
    if op == "influences":
        dynamic = (len(lhs) == 1 and isinstance(lhs[0], EnvLiteral) and lhs[0].positive
                   and lhs[0].name not in fluents)
        if dynamic:
            return InfluencesDyn(lhs[0].name, tuple(raw.rhs), conds, span)
        if raw.conds is not None:
            raise ParseError("a static influence takes no if clause", span)
        return InfluencesStatic(lhs, tuple(raw.rhs), span)
    if op == "forbids_to_cause":
        return ForbidsToCause(lhs, tuple(raw.rhs), 0, "", span)
    cls = {"triggers": Triggers, "allows": Allows, "inhibits": Inhibits,
           "facilitates": Facilitates, "contravenes": Contravenes}[op]
    return cls(lhs, raw.action, span)


def parse_domain(text, file: str = "<input>", validate: bool = True) -> DomainDescription:
    """Parse a domain description. Raises LexError, ParseError or ValidationError."""
    p = _Parser(text, file)
    classes: list[PsychClass] = []
    fluents: list[str] = []
    actions: list[ActionSymbol] = []
    items: list = []  # raw laws and ready-made laws, in order
    while p.tok.kind != "eof":
        if p.at("class"):
            classes.append(p.class_decl()[0])
        elif p.at("fluent"):
            p.take()
            fluents.extend(t.text for t in p.ident_list("fluent declaration"))
            p.expect(";", "fluent declaration")
        elif p.at("action"):
            actions.extend(p.action_decl())
        elif p.at("law"):
            items.append(p.law())
        elif p.at("noconcurrency"):
            span = p.take().span
            names = tuple(t.text for t in p.ident_list("noconcurrency"))
            p.expect(";", "noconcurrency")
            items.append(NoConcurrency(names, span))
        elif p.at("default"):
            span = p.take().span
            lit = p.literal("default")
            if not isinstance(lit, EnvLiteral):
                raise ParseError("default takes an environment fluent literal", span)
            p.expect(";", "default")
            items.append(Default(lit, span))
        else:
            p.fail("domain", "class", "fluent", "action", "law", "noconcurrency", "default")
    fluent_set = set(fluents)
    laws = []
    next_id = 1
    for item in items:
        law = _resolve(item, fluent_set) if isinstance(item, _RawLaw) else item
        if isinstance(law, ForbidsToCause):
            law = ForbidsToCause(law.left, law.right, next_id, "", law.span)
            next_id += 1
        laws.append(law)
    domain = DomainDescription(tuple(classes), tuple(fluents), tuple(actions), tuple(laws))
    if validate:
        report = validate_domain(domain)
        if not report.ok:
            raise ValidationError(report)
    return domain


def parse_rules(text, domain: DomainDescription, theory: str = "",
                file: str = "<input>") -> tuple[ForbidsToCause, ...]:
    """Parse a fragment of forbids_to_cause laws against an existing domain's symbols."""
    p = _Parser(text, file)
    rules = []
    while p.tok.kind != "eof":
        if not p.at("law"):
            p.fail("rule file", "law")
        raw = p.law()
        if raw.op != "forbids_to_cause":
            raise ParseError("rule files may only contain forbids_to_cause laws", raw.span)
        rules.append(ForbidsToCause(tuple(raw.lhs), tuple(raw.rhs), len(rules) + 1, theory,
                                    raw.span))
    report = validate_domain(domain.with_laws(rules))
    if not report.ok:
        raise ValidationError(report)
    return tuple(rules)


def parse_observations(text, domain: DomainDescription | None = None,
                       file: str = "<input>") -> tuple:
    """Parse ``observe L at T;`` and ``observe a occurs_at T;`` statements."""
    p = _Parser(text, file)
    out = []
    while p.tok.kind != "eof":
        p.expect("observe", "observation file")
        start = p.tok
        lit = p.literal("observation")
        if p.at("at"):
            p.take()
            out.append(FluentObservation(lit, p.integer("observation time")))
        elif p.at("occurs_at"):
            p.take()
            if not isinstance(lit, EnvLiteral) or not lit.positive:
                raise ParseError("occurs_at needs an action name", start.span)
            out.append(ActionObservation(lit.name, p.integer("observation time")))
        else:
            p.fail("observation", "'at'", "'occurs_at'")
        p.expect(";", "observation")
    if domain is not None:
        _check_observations(out, domain, file)
    return tuple(out)


def _check_observations(obs, domain: DomainDescription, file: str):
    from .model import ValidationReport, Diagnostic
    probe = domain.with_laws(
        Static((o.literal,)) for o in obs if isinstance(o, FluentObservation))
    report = validate_domain(probe)
    for o in obs:
        if isinstance(o, ActionObservation) and o.action not in domain.action_map:
            report.errors.append(Diagnostic("UndeclaredSymbol", f"undeclared action {o.action}",
                                            SourceSpan(file, 1, 1)))
    if not report.ok:
        raise ValidationError(report)


def parse_literals(text, file: str = "<input>") -> tuple[Literal, ...]:
    """Parse a comma separated literal list such as ``f(ne,high), neg door``."""
    p = _Parser(text, file)
    lits = tuple(p.literal_list("literal list"))
    if p.tok.kind != "eof":
        p.fail("literal list", "end of input")
    return lits


def parse_query(text, file: str = "<input>") -> Query:
    """Parse ``query goal L1, L2 [with {a} occurs_at 1, ...] horizon N;``."""
    p = _Parser(text, file)
    start = p.expect("query", "query file").span
    p.expect("goal", "query")
    goal = tuple(p.literal_list("query goal"))
    schedule = []
    if p.at("with"):
        p.take()
        while True:
            p.expect("{", "action set")
            names = [t.text for t in p.ident_list("action set")] if not p.at("}") else []
            p.expect("}", "action set")
            p.expect("occurs_at", "schedule")
            schedule.append((frozenset(names), p.integer("schedule time")))
            if not p.at(","):
                break
            p.take()
    p.expect("horizon", "query")
    horizon = p.integer("horizon")
    p.expect(";", "query")
    if p.tok.kind != "eof":
        p.fail("query file", "end of input")
    times = [t for _, t in schedule]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ParseError("schedule times must be strictly increasing", start)
    if any(t >= horizon for t in times):
        raise ParseError("schedule extends beyond the horizon", start)
    return Query(goal, tuple(schedule), horizon)


# Printing

def format_literal(lit: Literal) -> str:
    return str(lit)


def _lits(lits) -> str:
    return ", ".join(format_literal(x) for x in lits)


def format_law(law) -> str:
    if isinstance(law, NoConcurrency):
        return f"noconcurrency {', '.join(law.actions)};"
    if isinstance(law, Default):
        return f"default {format_literal(law.literal)};"
    if isinstance(law, Causes):
        tail = f" if {_lits(law.conditions)}" if law.conditions else ""
        return f"law {law.action} causes {_lits(law.effects)}{tail};"
    if isinstance(law, InfluencesDyn):
        tail = f" if {_lits(law.conditions)}" if law.conditions else ""
        return f"law {law.action} influences {_lits(law.effects)}{tail};"
    if isinstance(law, InfluencesStatic):
        head = f"{_lits(law.conditions)} " if law.conditions else ""
        return f"law {head}influences {_lits(law.effects)};"
    if isinstance(law, Static):
        tail = f" if {_lits(law.conditions)}" if law.conditions else ""
        return f"law {_lits(law.effects)}{tail};"
    if isinstance(law, ForbidsToCause):
        return f"law {_lits(law.left)} forbids_to_cause {_lits(law.right)};"
    op = type(law).__name__.lower()
    head = f"{_lits(law.conditions)} " if law.conditions else ""
    return f"law {head}{op} {law.action};"


def print_domain(domain: DomainDescription) -> str:
    """Canonical text: classes, fluents, actions, then laws in declaration order."""
    lines = []
    for c in domain.classes:
        order = " ordered" if c.ordered else ""
        lines.append(f"class {c.name}{order} {{ {', '.join(c.values)} }}")
    for name in domain.fluents:
        lines.append(f"fluent {name};")
    for a in domain.actions:
        lines.append(f"action {a.kind} {a.name};")
    lines.extend(format_law(law) for law in domain.laws)
    return "\n".join(lines) + "\n"


def print_observations(obs) -> str:
    lines = []
    for o in obs:
        if isinstance(o, FluentObservation):
            lines.append(f"observe {format_literal(o.literal)} at {o.time};")
        else:
            lines.append(f"observe {o.action} occurs_at {o.time};")
    return "\n".join(lines) + ("\n" if lines else "")


def print_query(q: Query) -> str:
    sched = ""
    if q.schedule:
        parts = [f"{{{', '.join(sorted(a))}}} occurs_at {t}" for a, t in q.schedule]
        sched = " with " + ", ".join(parts)
    return f"query goal {_lits(q.goal)}{sched} horizon {q.horizon};\n"
