"""Translation of action theories into answer set programs, plus a harness that
runs an external solver and compares its verdicts with the native engine."""
from __future__ import annotations

import random
import re
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .dsl import ActionObservation, ActionTheory, FluentObservation, Query
from .engine import Engine, SemanticsConfig
from .model import (
    ActionSymbol, Allows, Causes, Contravenes, Default, DomainDescription, EnvLiteral,
    Facilitates, ForbidsToCause, Inhibits, InfluencesDyn, InfluencesStatic, MentalFluent,
    NoConcurrency, PsychClass, Static, Triggers,
)

SECTIONS = ("declarations", "time", "frame axioms", "dynamic laws", "static laws",
            "inhibition/trigger/allowance", "mental-extension rules", "theory constraints",
            "observations", "goal machinery")


def term(lit) -> str:
    """The fluent term of a literal: door, neg(door), mental_fluent(ne,high)."""
    if isinstance(lit, MentalFluent):
        return f"mental_fluent({lit.cls},{lit.value})"
    return lit.name if lit.positive else f"neg({lit.name})"


def base_term(lit) -> str:
    if isinstance(lit, MentalFluent):
        return term(lit)
    return lit.name


def neg_term(lit) -> str:
    """Term of the complementary literal."""
    if isinstance(lit, MentalFluent):
        return f"neg({term(lit)})"
    return term(lit.negated())


def _fluent_type(lit) -> str:
    return f"fluent({base_term(lit)})"


def _mental_type(lit: MentalFluent) -> str:
    return term(lit)


def _holds(lits, t: str) -> list[str]:
    return [f"holds({term(x)},{t})" for x in lits]


def _rule(head: str, body: list[str]) -> str:
    body = [b for b in body if b]
    if not body:
        return f"{head}."
    return f"{head} :- {', '.join(body)}."


def _constraint(body: list[str]) -> str:
    return f":- {', '.join(body)}."


@dataclass
class EmittedProgram:
    sections: list[tuple[str, list[str]]]
    horizon: int

    def section(self, name: str) -> list[str]:
        for n, rules in self.sections:
            if n == name:
                return rules
        raise KeyError(name)

    @property
    def text(self) -> str:
        out = []
        for name, rules in self.sections:
            out.append(f"% --- {name} ---")
            out.extend(rules)
            out.append("")
        return "\n".join(out)


def _mental_fluents(domain: DomainDescription) -> list[MentalFluent]:
    return [MentalFluent(c.name, v) for c in domain.classes for v in c.values]


def _schema_constraints(spec, config: SemanticsConfig) -> list[str]:
    """Compact constraints straight from the rule-set schemas, value guards kept."""
    out = []
    for schema in spec.schemas:
        f = schema.forbidden
        body = [f"holds({term(f)},T+1)"]
        if config.firing == "onset":
            body.append(f"not holds({term(f)},T)")
        body += _holds(schema.conditions, "T")
        if schema.persist:
            body += [f"holds(mental_fluent({f.cls},V1),T)", f"V1 != {f.value}"]
        body.append("time(T)")
        out.append(_constraint(body))
    return out


def _rule_constraints(rules, config: SemanticsConfig) -> list[str]:
    out = []
    for rule in rules:
        conds, forbidden = config.sides(rule)
        for f in forbidden:  # one constraint per forbidden fluent
            body = [f"holds({term(f)},T+1)"]
            if config.firing == "onset":
                body.append(f"not holds({term(f)},T)")
            body += _holds(conds, "T") + ["time(T)"]
            out.append(_constraint(body))
    return out


def emit_program(theory: ActionTheory, horizon: int,
                 config: SemanticsConfig = SemanticsConfig(), spec=None,
                 goal=None, query: Query | None = None) -> EmittedProgram:
    """Answer set program whose answer sets are the trajectory models of `theory`
    (with `spec` rules attached) under the any-subset action policy.

    `goal` adds goal machinery requiring the goal literals at the final time
    point; `query` adds its schedule as occurrence facts and its goal.
    """
    d = theory.domain
    mental = _mental_fluents(d)
    env = [EnvLiteral(n) for n in d.fluents]
    fluents = env + mental
    if query is not None:
        horizon = query.horizon
        goal = query.goal

    decl = [f"fluent_e({n})." for n in d.fluents]
    decl += [f"action_e({a.name})." for a in d.actions if a.kind == "env"]
    decl += [f"human_action({a.name})." for a in d.actions if a.kind == "human"]
    decl += [f"mental_class({c.name})." for c in d.classes]
    decl += [f"mental_fluent({m.cls},{m.value})." for m in mental]
    decl += [f"default({law.literal.name})." for law in d.laws_of(Default)]
    decl += [
        "fluent(F) :- fluent_e(F).",
        "action(A) :- action_e(A).",
        "fluent(mental_fluent(C,V)) :- mental_fluent(C,V).",
        "action(U) :- human_action(U).",
        "#defined fluent_e/1. #defined action_e/1. #defined human_action/1.",
        "#defined mental_class/1. #defined mental_fluent/2. #defined default/1.",
    ]

    time = [f"#const t_max = {horizon}.", "time(0..t_max)."]

    defaults = d.defaults
    frame = []
    for f in fluents:
        p, n = term(f), neg_term(f)
        ft = _fluent_type(f)
        frame.append(f":- holds({p},T), holds({n},T), {ft}, time(T).")
        frame.append(f"holds({p},T+1) :- holds({p},T), not holds({n},T+1), "
                     f"not default({base_term(f)}), {ft}, time(T), time(T+1).")
        frame.append(f"holds({n},T+1) :- holds({n},T), not holds({p},T+1), "
                     f"not default({base_term(f)}), {ft}, time(T), time(T+1).")
        if isinstance(f, EnvLiteral) and f.name in defaults:
            on, off = (p, n) if defaults[f.name] else (n, p)
            frame.append(f"holds({on},T) :- not holds({off},T), default({f.name}), "
                         f"{ft}, time(T).")
        frame.append(f"holds({p},0) :- not holds({n},0).")
        frame.append(f"holds({n},0) :- not holds({p},0).")

    dynamic = []
    static = []
    for law in d.laws:
        if isinstance(law, Causes):
            for e in law.effects:
                dynamic.append(_rule(
                    f"holds({term(e)},T+1)",
                    [f"holds(occurs({law.action}),T)"] + _holds(law.conditions, "T")
                    + [_fluent_type(g) for g in law.conditions]
                    + [_fluent_type(e), f"action({law.action})", "time(T)", "time(T+1)"]))
        elif isinstance(law, InfluencesDyn):
            for e in law.effects:
                dynamic.append(_rule(
                    f"holds({term(e)},T+1)",
                    [f"holds(occurs({law.action}),T)"] + _holds(law.conditions, "T")
                    + [_fluent_type(g) for g in law.conditions]
                    + [_mental_type(e), f"action({law.action})", "time(T)", "time(T+1)"]))
        elif isinstance(law, Static):
            for e in law.effects:
                static.append(_rule(
                    f"holds({term(e)},T)",
                    _holds(law.conditions, "T") + [_fluent_type(g) for g in law.conditions]
                    + [_fluent_type(e), "time(T)"]))
        elif isinstance(law, InfluencesStatic):
            for e in law.effects:
                static.append(_rule(
                    f"holds({term(e)},T)",
                    _holds(law.conditions, "T") + [_fluent_type(g) for g in law.conditions]
                    + [_mental_type(e), "time(T)"]))

    acts = _action_section(d)
    ext = _mental_section(d)

    constraints = []
    for rule in d.forbid_rules:
        constraints += _rule_constraints([rule], config)
    if spec is not None:
        if spec.schemas and config.orientation == "as-written":
            constraints += _schema_constraints(spec, config)
        else:
            constraints += _rule_constraints(spec.rules, config)

    obs_rules = []
    observations = list(theory.observations)
    if query is not None:
        observations += [ActionObservation(a, t) for acts_, t in query.schedule
                         for a in sorted(acts_)]
    for o in observations:
        if isinstance(o, FluentObservation):
            if o.time == 0:
                obs_rules.append(f"holds({term(o.literal)},0).")
            else:
                obs_rules.append(f":- not holds({term(o.literal)},{o.time}), "
                                 f"{_fluent_type(o.literal)}, time({o.time}).")
                if o.time > horizon:
                    obs_rules.append(f":- not time({o.time}).")
        else:
            obs_rules.append(f"holds(occurs({o.action}),{o.time}).")
            obs_rules.append(f":- holds(occurs({o.action}),{o.time}), not time({o.time + 1}).")

    goal_rules = _goal_section(d, tuple(goal)) if goal else []

    sections = [
        ("declarations", decl), ("time", time), ("frame axioms", frame),
        ("dynamic laws", dynamic), ("static laws", static),
        ("inhibition/trigger/allowance", acts), ("mental-extension rules", ext),
        ("theory constraints", constraints), ("observations", obs_rules),
        ("goal machinery", goal_rules),
    ]
    return EmittedProgram(sections, horizon)


def _body_types(conds) -> list[str]:
    return [_fluent_type(g) for g in conds]


def _action_section(d: DomainDescription) -> list[str]:
    out = []
    with_allow = {law.action for law in d.laws_of(Allows)}
    with_trig = {law.action for law in d.laws_of(Triggers)}
    for law in d.laws_of(Inhibits):
        a = law.action
        out.append(_rule(f"holds(ab(occurs({a})),T)",
                         _holds(law.conditions, "T") + [f"action({a})"]
                         + _body_types(law.conditions) + ["time(T)"]))
    for law in d.laws_of(Triggers):
        a = law.action
        out.append(_rule(f"holds(occurs({a}),T)",
                         [f"not holds(ab(occurs({a})),T)"] + _holds(law.conditions, "T")
                         + _body_types(law.conditions)
                         + [f"action({a})", "time(T)", "T < t_max"]))
        out.append(_rule(f"holds(trig(occurs({a})),T)",
                         _holds(law.conditions, "T") + _body_types(law.conditions)
                         + [f"action({a})", "time(T)"]))
    for law in d.laws_of(Allows):
        a = law.action
        out.append(_rule(f"holds(allow(occurs({a})),T)",
                         [f"not holds(ab(occurs({a})),T)"] + _holds(law.conditions, "T")
                         + _body_types(law.conditions) + [f"action({a})", "time(T)"]))
    for act in d.actions:
        a = act.name
        if a not in with_allow:
            out.append(f"holds(allow(occurs({a})),T) :- action({a}), time(T).")
    for act in d.actions:
        a = act.name
        out.append(f"holds(occurs({a}),T) :- holds(allow(occurs({a})),T), "
                   f"not holds(ab(occurs({a})),T), not holds(neg(occurs({a})),T), "
                   f"action({a}), time(T), T < t_max.")
        out.append(f"holds(neg(occurs({a})),T) :- not holds(occurs({a}),T), "
                   f"action({a}), time(T), T < t_max.")
    # Occurrences may not bypass inhibition, passive triggers or passive allowances.
    for act in d.actions:
        a = act.name
        out.append(f":- holds(occurs({a}),T), holds(ab(occurs({a})),T), action({a}), time(T).")
        if a in with_trig:
            out.append(f":- holds(occurs({a}),T), not holds(trig(occurs({a})),T), "
                       f"action({a}), time(T), T < t_max.")
        if a in with_allow:
            out.append(f":- holds(occurs({a}),T), not holds(allow(occurs({a})),T), "
                       f"action({a}), time(T), T < t_max.")
    for law in d.laws_of(NoConcurrency):
        elems = "; ".join(f"holds(occurs({a}),T) : action({a})" for a in law.actions)
        out.append(f":- time(T), 2 {{{elems}}}.")
    return out


def _mental_section(d: DomainDescription) -> list[str]:
    out = [
        "holds(neg(mental_fluent(C,V)),T) :- holds(mental_fluent(C,W),T), "
        "mental_fluent(C,V), V != W, time(T).",
        "has_value(C,T) :- holds(mental_fluent(C,V),T), mental_fluent(C,V), time(T).",
        ":- mental_class(C), time(T), not has_value(C,T).",
    ]
    with_fac = {law.action for law in d.laws_of(Facilitates)}
    for law in d.laws_of(Facilitates):
        a = law.action
        types = [_mental_type(g) for g in law.conditions]
        out.append(_rule(f"holds(occurs({a}),T)",
                         [f"not holds(ab(occurs({a})),T)"] + _holds(law.conditions, "T")
                         + types + [f"human_action({a})", "time(T)", "T < t_max"]))
        out.append(_rule(f"holds(fac(occurs({a})),T)",
                         _holds(law.conditions, "T") + types
                         + [f"human_action({a})", "time(T)"]))
    for law in d.laws_of(Contravenes):
        a = law.action
        out.append(_rule(f"holds(ab(occurs({a})),T)",
                         _holds(law.conditions, "T") + [_mental_type(g) for g in law.conditions]
                         + [f"human_action({a})", "time(T)"]))
    for a in sorted(with_fac):
        out.append(f":- holds(occurs({a}),T), not holds(fac(occurs({a})),T), "
                   f"human_action({a}), time(T), T < t_max.")
    # Contravening does not silence a trigger: a triggered, uninhibited action
    # that is contravened leaves no valid transition.
    contravened = {law.action for law in d.laws_of(Contravenes)}
    triggered = {law.action for law in d.laws_of(Triggers)}
    for a in sorted(contravened & triggered):
        for law in d.laws_of(Inhibits):
            if law.action == a:
                out.append(_rule(f"holds(inh(occurs({a})),T)",
                                 _holds(law.conditions, "T") + _body_types(law.conditions)
                                 + [f"action({a})", "time(T)"]))
        out.append(f":- holds(trig(occurs({a})),T), not holds(inh(occurs({a})),T), "
                   f"not holds(occurs({a}),T), action({a}), time(T), T < t_max.")
    return out


def _goal_section(d: DomainDescription, goal) -> list[str]:
    types = _body_types(goal)
    out = [
        ":- not achieved.",
        "achieved :- achieved(0).",
        "achieved :- achieved(T+1), not achieved(T), time(T), time(T+1).",
        _rule("achieved(T)", _holds(goal, "T") + ["achieved(T+1)"] + types
              + ["time(T)", "time(T+1)"]),
        _rule("achieved(t_max)", _holds(goal, "t_max") + types),
    ]
    for act in d.actions:
        a = act.name
        out.append(f"holds(occurs({a}),T) :- holds(allow(occurs({a})),T), not achieved(T), "
                   f"not holds(ab(occurs({a})),T), not holds(neg(occurs({a})),T), "
                   f"action({a}), time(T).")
        out.append(f"holds(neg(occurs({a})),T) :- not holds(occurs({a}),T), "
                   f"action({a}), time(T).")
    return out


# Lint -------------------------------------------------------------------------

def _split_top(text: str) -> list[str]:
    """Split at commas and semicolons that are not nested in () or {}."""
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts if p.strip()]


def _predicate(lit: str) -> str | None:
    lit = lit.strip()
    if lit.startswith("not "):
        lit = lit[4:].strip()
    if "{" in lit or re.search(r"!=|<|>|=", lit.split("(")[0] if "(" in lit else lit):
        return None
    m = re.match(r"([a-z_]\w*)\s*(\(|$)", lit)
    return m.group(1) if m else None


def lint_program(text: str) -> list[str]:
    """Predicates used in rule bodies that no rule head, fact or #defined provides."""
    heads, used = set(), set()
    lines = [l for l in text.splitlines() if not l.lstrip().startswith("%")]
    for m in re.finditer(r"#defined\s+(\w+)/\d+", text):
        heads.add(m.group(1))
    for stmt in re.split(r"\.(?:\s|$)", "\n".join(lines)):
        stmt = stmt.strip()
        if not stmt or stmt.startswith("#"):
            continue
        head, _, body = stmt.partition(":-")
        for lit in _split_top(head):
            name = _predicate(lit)
            if name:
                heads.add(name)
        for lit in _split_top(body):
            name = _predicate(lit)
            if name:
                used.add(name)
    return sorted(used - heads)


# Solver harness ---------------------------------------------------------------

def find_solver() -> list[str] | None:
    """Command prefix for an available clingo, or None."""
    exe = shutil.which("clingo")
    if exe:
        return [exe]
    try:
        import clingo  # noqa: F401
    except ImportError:
        return None
    return [sys.executable, "-m", "clingo"]


class SolverError(RuntimeError):
    pass


def solve(program: str, solver: list[str]) -> bool:
    """True when the program has an answer set."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "program.lp"
        path.write_text(program)
        proc = subprocess.run(solver + [str(path), "1", "--warn=none"],
                              capture_output=True, text=True, timeout=120)
    out = proc.stdout
    if "UNSATISFIABLE" in out:
        return False
    if "SATISFIABLE" in out:
        return True
    raise SolverError(proc.stderr.strip() or out.strip() or f"exit code {proc.returncode}")


@dataclass
class DiffCase:
    theory: ActionTheory
    horizon: int
    config: SemanticsConfig
    goal: tuple = ()
    native: bool | None = None
    solver: bool | None = None

    @property
    def agree(self) -> bool:
        return self.native == self.solver


@dataclass
class DiffReport:
    cases: list[DiffCase] = field(default_factory=list)

    @property
    def disagreements(self) -> list[DiffCase]:
        return [c for c in self.cases if not c.agree]

    @property
    def agreement(self) -> float:
        if not self.cases:
            return 1.0
        return 1 - len(self.disagreements) / len(self.cases)


def differential_check(cases, solver: list[str]) -> DiffReport:
    """Decide each case natively (any-subset policy) and with the solver."""
    report = DiffReport()
    for case in cases:
        eng = Engine(case.theory.domain, case.config, "any")
        if case.goal:
            case.native = eng.search(case.theory.observations, case.horizon,
                                     lambda s, g=case.goal: s.holds_all(g)) is not None
        else:
            case.native = eng.consistent(case.theory.observations, case.horizon)
        prog = emit_program(case.theory, case.horizon, case.config, goal=case.goal or None)
        case.solver = solve(prog.text, solver)
        report.cases.append(case)
    return report


def random_case(rng: random.Random) -> DiffCase:
    """A small random theory: two classes, three actions, a handful of laws."""
    classes = (PsychClass("p", ("a", "b", "c")[: rng.choice((2, 3))], True),
               PsychClass("q", ("x", "y")))
    mfl = [MentalFluent(c.name, v) for c in classes for v in c.values]
    fluents = ("w",) if rng.random() < 0.5 else ()
    env = [EnvLiteral(n, b) for n in fluents for b in (True, False)]
    names = ("a1", "a2", "h1")
    actions = (ActionSymbol("a1"), ActionSymbol("a2"), ActionSymbol("h1", "human"))

    def conds(pool, k=1):
        return tuple(rng.sample(pool, rng.randint(0, k)))

    laws = []
    for _ in range(rng.randint(1, 4)):
        laws.append(InfluencesDyn(rng.choice(names), (rng.choice(mfl),), conds(mfl + env)))
    if fluents and rng.random() < 0.6:
        laws.append(Causes(rng.choice(names), (rng.choice(env),), conds(mfl)))
    if fluents and rng.random() < 0.3:
        laws.append(Static((rng.choice(env),), (rng.choice(mfl),)))
    if fluents and rng.random() < 0.3:
        laws.append(InfluencesStatic(conds(mfl + env) or (rng.choice(env),),
                                     (rng.choice(mfl),)))
    if fluents and rng.random() < 0.2:
        laws.append(Static((rng.choice(env),), (rng.choice(env),)))
    if fluents and rng.random() < 0.2:
        laws.append(Default(rng.choice(env)))
    for kind in (Triggers, Allows, Inhibits):
        if rng.random() < 0.3:
            laws.append(kind(conds(mfl + env) or (rng.choice(mfl),), rng.choice(names)))
    for kind in (Facilitates, Contravenes):
        if rng.random() < 0.25:
            laws.append(kind((rng.choice(mfl),), "h1"))
    if rng.random() < 0.3:
        laws.append(NoConcurrency(tuple(rng.sample(names, 2))))
    for i in range(rng.randint(0, 3)):
        laws.append(ForbidsToCause((rng.choice(mfl),), (rng.choice(mfl),), i + 1))
    domain = DomainDescription(classes, fluents, actions, tuple(laws))
    horizon = rng.randint(1, 3)
    obs = []
    if rng.random() < 0.8:
        obs.append(FluentObservation(rng.choice(mfl), 0))
    if rng.random() < 0.3:
        obs.append(FluentObservation(rng.choice(mfl + env), rng.randint(1, horizon)))
    if rng.random() < 0.3:
        obs.append(ActionObservation(rng.choice(names), rng.randint(0, horizon - 1)))
    config = SemanticsConfig(rng.choice(("as-written", "reversed")),
                             rng.choice(("holding", "onset")))
    goal = (rng.choice(mfl),) if rng.random() < 0.4 else ()
    return DiffCase(ActionTheory(domain, tuple(obs)), horizon, config, goal)
