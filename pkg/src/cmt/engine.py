"""Native trajectory semantics: activation, single steps, search, queries.

The `Engine` class bundles a domain with a semantic configuration and an
action policy and caches successor computations, so repeated searches over
the same domain (planning grids, reachability) stay cheap. The module-level
functions are thin wrappers that build a throwaway engine.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .dsl import ActionObservation, ActionTheory, FluentObservation, Query
from .model import (
    DYNAMIC_LAWS, STATIC_LAWS, Allows, CmtError, Contravenes, DomainDescription, EnvLiteral,
    Facilitates, ForbidsToCause, Inhibits, Literal, MentalFluent, NoConcurrency, State,
    Triggers, all_states,
)

ORIENTATIONS = ("as-written", "reversed")
FIRINGS = ("holding", "onset")
POLICIES = ("singleton", "any")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SemanticsConfig:
    """How forbids_to_cause rules are read.

    orientation: "as-written" takes a rule's left side as the condition at t and
    its right side as forbidden at t+1; "reversed" swaps the sides.
    firing: "holding" fires when the forbidden fluent holds at t+1; "onset"
    additionally requires that it did not hold at t.
    """

    orientation: str = "as-written"
    firing: str = "holding"

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if self.firing not in FIRINGS:
            raise ValueError(f"firing must be one of {FIRINGS}")

    def sides(self, rule: ForbidsToCause):
        """(condition side, forbidden side) of a rule under this orientation."""
        if self.orientation == "as-written":
            return rule.left, rule.right
        return rule.right, rule.left

    def as_dict(self) -> dict:
        return {"orientation": self.orientation, "firing": self.firing}


@dataclass(frozen=True)
class FiredRule:
    rule_id: int
    theory: str
    forbidden: MentalFluent
    conditions: tuple[MentalFluent, ...]

    def __str__(self) -> str:
        name = f"{self.theory} " if self.theory else ""
        conds = ", ".join(map(str, self.conditions))
        return f"{name}rule {self.rule_id}: {{{conds}}} forbids {self.forbidden}"


def fired_rules(rules: Iterable[ForbidsToCause], s: State, s2: State,
                config: SemanticsConfig) -> list[FiredRule]:
    """Rules whose condition side holds in s and that forbid some fluent of s2."""
    out = []
    onset = config.firing == "onset"
    for rule in rules:
        conds, forbidden = config.sides(rule)
        if not s.holds_all(conds):
            continue
        for f in forbidden:
            if s2.holds(f) and not (onset and s.holds(f)):
                out.append(FiredRule(rule.rule_id, rule.theory, f, tuple(conds)))
    return out


@dataclass(frozen=True)
class ActivationProfile:
    inhibited: frozenset = frozenset()
    triggered: frozenset = frozenset()
    trigger_blocked: frozenset = frozenset()
    allowed: frozenset = frozenset()
    allow_blocked: frozenset = frozenset()
    facilitated: frozenset = frozenset()
    facilitate_blocked: frozenset = frozenset()
    contravened: frozenset = frozenset()
    forbidden_next: frozenset = frozenset()

    @property
    def required(self) -> frozenset:
        return self.triggered | self.facilitated

    @property
    def excluded(self) -> frozenset:
        return (self.inhibited | self.trigger_blocked | self.allow_blocked
                | self.facilitate_blocked | self.contravened)


def activation_profile(domain: DomainDescription, s: State,
                       config: SemanticsConfig = SemanticsConfig()) -> ActivationProfile:
    """Which actions are inhibited, triggered, allowed, ... in state s.

    Under onset firing `forbidden_next` lists the candidates; whether a
    candidate actually fires also depends on s, which `step` checks.
    """
    def active(kind):
        rules: dict[str, list[bool]] = {}
        for law in domain.laws_of(kind):
            rules.setdefault(law.action, []).append(s.holds_all(law.conditions))
        return rules

    inhibited = {a for a, flags in active(Inhibits).items() if any(flags)}

    def split(kind, extra_block=frozenset()):
        on, blocked = set(), set()
        for a, flags in active(kind).items():
            if any(flags) and a not in inhibited and a not in extra_block:
                on.add(a)
            else:
                blocked.add(a)
        return on, blocked

    triggered, trigger_blocked = split(Triggers)
    allowed, allow_blocked = split(Allows)
    contr_body = {a for a, flags in active(Contravenes).items() if any(flags)}
    contravened = contr_body - inhibited
    facilitated, facilitate_blocked = split(Facilitates, contr_body)
    forbidden = set()
    for rule in domain.forbid_rules:
        conds, right = config.sides(rule)
        if s.holds_all(conds):
            forbidden.update(right)
    return ActivationProfile(
        frozenset(inhibited), frozenset(triggered), frozenset(trigger_blocked),
        frozenset(allowed), frozenset(allow_blocked), frozenset(facilitated),
        frozenset(facilitate_blocked), frozenset(contravened), frozenset(forbidden))


@dataclass(frozen=True)
class Violation:
    """Why a transition is invalid. `condition` numbers the trajectory condition
    (1-10) that failed; None marks contradictory or non-converging effects."""

    kind: str
    detail: str
    condition: int | None = None

    def __str__(self) -> str:
        tag = f"condition {self.condition}" if self.condition else self.kind
        return f"{tag}: {self.detail}"


class InvalidTransition(CmtError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(map(str, violations)))
        self.violations = violations


def _key(lit: Literal):
    if isinstance(lit, MentalFluent):
        return ("m", lit.cls), lit.value
    return ("e", lit.name), lit.positive


def _key_literal(key, value) -> Literal:
    if key[0] == "m":
        return MentalFluent(key[1], value)
    return EnvLiteral(key[1], value)


def _as_state(assign: dict) -> State:
    return State({k[1]: v for k, v in assign.items() if k[0] == "m"},
                 {k[1]: v for k, v in assign.items() if k[0] == "e"})


Provenance = tuple[tuple[str, str], ...]


def _provenance(causes: dict) -> Provenance:
    return tuple(sorted((str(_key_literal(k, v)), c) for k, (v, c) in causes.items()))


def action_conditions(domain: DomainDescription, profile: ActivationProfile,
                      actions: frozenset) -> list[Violation]:
    """Check trajectory conditions 1-9 for the action set chosen in a state."""
    out = []
    unknown = actions - set(domain.action_names)
    if unknown:
        out.append(Violation("undeclared", f"undeclared actions {sorted(unknown)}", 1))
    checks = [
        (2, "triggered action missing", profile.triggered - actions),
        (3, "facilitated action missing", profile.facilitated - actions),
        (4, "action with only passive triggers", profile.trigger_blocked & actions),
        (5, "action with only passive allowances", profile.allow_blocked & actions),
        (6, "inhibited action", profile.inhibited & actions),
        (7, "action with only passive facilitations", profile.facilitate_blocked & actions),
        (8, "contravened action", profile.contravened & actions),
    ]
    for cond, what, bad in checks:
        if bad:
            out.append(Violation("condition", f"{what}: {sorted(bad)}", cond))
    for law in domain.laws_of(NoConcurrency):
        clash = actions & set(law.actions)
        if len(clash) > 1:
            out.append(Violation("condition", f"concurrent actions {sorted(clash)}", 9))
    return out


def compute_successors(domain: DomainDescription, s: State, actions: frozenset) -> list:
    """Every successor of s under `actions`, as (state, provenance) pairs.

    A candidate s2 is accepted when it is exactly what can be derived from the
    action effects, inertia for literals that keep their value in s2, defaults
    whose complement is absent from s2, and the static laws closed over all of
    those. Only keys heading a static law can differ from their forced value, so
    only those are enumerated. Raises InvalidTransition when no candidate passes.
    """
    direct: dict = {}
    for idx, law in enumerate(domain.laws, start=1):
        if isinstance(law, DYNAMIC_LAWS) and law.action in actions and \
                s.holds_all(law.conditions):
            for eff in law.effects:
                k, v = _key(eff)
                if k in direct and direct[k][0] != v:
                    raise InvalidTransition([Violation(
                        "contradiction", f"actions cause both {_key_literal(k, v)} and "
                        f"{_key_literal(k, direct[k][0])}")])
                direct.setdefault(k, (v, f"law:{idx}"))

    defaults = domain.defaults
    forced: dict = {}
    for name, value in s.env:
        k = ("e", name)
        forced[k] = (defaults[name], "default") if name in defaults else (value, "inertia")
    for cls, value in s.mental:
        forced[("m", cls)] = (value, "inertia")
    forced.update(direct)

    statics = [(idx, law) for idx, law in enumerate(domain.laws, start=1)
               if isinstance(law, STATIC_LAWS)]
    domains = {("m", c.name): c.values for c in domain.classes}
    domains.update({("e", n): (True, False) for n in domain.fluents})
    free = sorted({_key(eff)[0] for _, law in statics for eff in law.effects} - set(direct))
    choices = []
    for k in free:
        first = forced[k][0]
        choices.append([first] + [v for v in domains[k] if v != first])

    out = []
    for combo in itertools.product(*choices):
        cand = {k: v for k, (v, _) in forced.items()}
        cand.update(zip(free, combo))
        causes = _support(domain, s, cand, direct, statics)
        if causes is not None:
            out.append((_as_state(cand), _provenance(causes)))
    if not out:
        raise InvalidTransition([Violation(
            "contradiction", "effects, defaults and static laws admit no successor state")])
    return out


def _support(domain, s: State, cand: dict, direct: dict, statics) -> dict | None:
    """Causes for every value of `cand` when cand is self-supporting, else None."""
    derived: dict = {}  # (key, value) -> cause
    for k, (v, cause) in direct.items():
        derived[(k, v)] = cause
    defaults = domain.defaults
    for name, value in s.env:
        k = ("e", name)
        if name in defaults:
            if cand[k] == defaults[name]:
                derived.setdefault((k, defaults[name]), "default")
        elif cand[k] == value:
            derived.setdefault((k, value), "inertia")
    for cls, value in s.mental:
        k = ("m", cls)
        if cand[k] == value:
            derived.setdefault((k, value), "inertia")
    changed = True
    while changed:
        changed = False
        for idx, law in statics:
            if all(_key(c) in derived for c in law.conditions):
                for eff in law.effects:
                    kv = _key(eff)
                    if kv not in derived:
                        derived[kv] = f"static:{idx}"
                        changed = True
    if len(derived) != len(cand):
        return None
    causes = {}
    for (k, v), cause in derived.items():
        if cand.get(k) != v:
            return None
        causes[k] = (v, cause)
    return causes


def compute_successor(domain: DomainDescription, s: State, actions: frozenset):
    """The first successor of s under `actions` (the only one when the static
    laws leave no choice). Raises InvalidTransition."""
    return compute_successors(domain, s, actions)[0]


class Engine:
    """Trajectory semantics for one domain under one configuration and policy."""

    def __init__(self, domain: DomainDescription, config: SemanticsConfig = SemanticsConfig(),
                 policy: str = "singleton"):
        if policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        self.domain = domain
        self.config = config
        self.policy = policy
        self._profiles: dict = {}
        self._succ: dict = {}

    def profile(self, s: State) -> ActivationProfile:
        p = self._profiles.get(s)
        if p is None:
            p = self._profiles[s] = activation_profile(self.domain, s, self.config)
        return p

    def transitions(self, s: State, actions: Iterable[str]):
        """(successors, violations); successors lists (state, provenance) pairs
        and is empty when the action set is invalid in s."""
        actions = frozenset(actions)
        key = (s, actions)
        hit = self._succ.get(key)
        if hit is not None:
            return hit
        violations = list(action_conditions(self.domain, self.profile(s), actions))
        found = []
        if not violations:
            try:
                cands = compute_successors(self.domain, s, actions)
            except InvalidTransition as exc:
                violations = exc.violations
                cands = []
            for s2, prov in cands:
                fired = fired_rules(self.domain.forbid_rules, s, s2, self.config)
                if fired:
                    violations.extend(Violation("forbidden", str(f), 10) for f in fired)
                else:
                    found.append((s2, prov))
        result = (tuple(found), tuple(violations) if not found else ())
        self._succ[key] = result
        return result

    def transition(self, s: State, actions: Iterable[str]):
        """(successor, provenance, violations); successor is None when invalid.
        With several possible successors the first one is returned."""
        found, violations = self.transitions(s, actions)
        if found:
            return found[0][0], found[0][1], ()
        return None, None, violations

    def step(self, s: State, actions: Iterable[str]) -> State:
        s2, _, violations = self.transition(s, actions)
        if s2 is None:
            raise InvalidTransition(list(violations))
        return s2

    def candidate_sets(self, s: State, must: frozenset = frozenset()) -> list[frozenset]:
        """Action sets allowed by the policy that pass the per-action conditions."""
        prof = self.profile(s)
        forced = prof.required | must
        free = [a for a in self.domain.action_names
                if a not in prof.excluded and a not in forced]
        if forced & prof.excluded:
            return []
        if self.policy == "singleton":
            if len(forced) > 1:
                return []
            if forced:
                return [frozenset(forced)]
            return [frozenset([a]) for a in free] + [frozenset()]
        out = []
        for size in range(len(free) + 1):
            for combo in itertools.combinations(free, size):
                out.append(frozenset(forced) | frozenset(combo))
        return out

    def successors(self, s: State, must: frozenset = frozenset(), noop_first: bool = False):
        cands = self.candidate_sets(s, must)
        if noop_first:
            cands = sorted(cands, key=len)
        for actions in cands:
            for s2, prov in self.transitions(s, actions)[0]:
                yield actions, s2, prov

    # search -------------------------------------------------------------

    def initial_states(self, observations: Iterable = ()) -> list[State]:
        lits = [o.literal for o in observations
                if isinstance(o, FluentObservation) and o.time == 0]
        return [s for s in all_states(self.domain) if s.holds_all(lits)]

    def trajectories(self, s0: State, horizon: int, observations: Iterable = (),
                     s0_provenance: Provenance = ()) -> Iterator["Trajectory"]:
        """Every valid trajectory of exactly `horizon` steps from s0 that satisfies
        the observations, in deterministic order."""
        fluent_obs, act_obs = _index_observations(observations)
        if any(t > horizon for t in fluent_obs) or any(t >= horizon for t in act_obs):
            return
        if not s0.holds_all(fluent_obs.get(0, ())):
            return
        states, acts, provs = [s0], [], [s0_provenance or _initial_provenance(s0, ())]

        def rec(t):
            if t == horizon:
                yield Trajectory(tuple(states), tuple(acts), tuple(provs))
                return
            for actions, s2, prov in self.successors(states[-1], act_obs.get(t, frozenset())):
                if not s2.holds_all(fluent_obs.get(t + 1, ())):
                    continue
                states.append(s2)
                acts.append(actions)
                provs.append(prov)
                yield from rec(t + 1)
                states.pop()
                acts.pop()
                provs.pop()

        yield from rec(0)

    def trajectory_models(self, observations: Iterable, horizon: int) -> Iterator["Trajectory"]:
        observations = tuple(observations)
        for s0 in self.initial_states(observations):
            yield from self.trajectories(s0, horizon, observations,
                                         _initial_provenance(s0, observations))

    def search(self, observations: Iterable, horizon: int, accept=lambda s: True,
               starts: Iterable[State] | None = None) -> "Trajectory | None":
        """Breadth-first search over (state, time); returns the first trajectory
        model whose final state satisfies `accept`, or None."""
        observations = tuple(observations)
        fluent_obs, act_obs = _index_observations(observations)
        if any(t > horizon for t in fluent_obs) or any(t >= horizon for t in act_obs):
            return None
        if starts is None:
            starts = self.initial_states(observations)
        layer = {s: None for s in starts if s.holds_all(fluent_obs.get(0, ()))}
        layers = [layer]
        for t in range(horizon):
            nxt: dict = {}
            must = act_obs.get(t, frozenset())
            want = fluent_obs.get(t + 1, ())
            for s in layer:
                for actions, s2, prov in self.successors(s, must, noop_first=True):
                    if s2 not in nxt and s2.holds_all(want):
                        nxt[s2] = (s, actions, prov)
            layer = nxt
            layers.append(layer)
            if not layer:
                return None
        for s in layer:
            if accept(s):
                return _rebuild(layers, s, observations)
        return None

    def consistent(self, observations: Iterable, horizon: int) -> bool:
        return self.search(observations, horizon) is not None

    def plan(self, init, goal, horizon: int) -> "Trajectory | None":
        """A trajectory of exactly `horizon` steps from `init` whose final state
        satisfies every goal literal. `init` is a State or partial literals."""
        starts = None
        obs: tuple = ()
        if isinstance(init, State):
            starts = [init]
        else:
            obs = tuple(FluentObservation(lit, 0) for lit in init)
        goal = _goal_literals(goal)
        return self.search(obs, horizon, lambda s: s.holds_all(goal), starts)

    def reachable(self, init: State, horizon: int) -> dict[State, "Trajectory"]:
        """Witness trajectories for every state reachable in exactly `horizon` steps."""
        found = {}
        layer = {init: None}
        layers = [layer]
        for _ in range(horizon):
            nxt: dict = {}
            for s in layer:
                for actions, s2, prov in self.successors(s, noop_first=True):
                    if s2 not in nxt:
                        nxt[s2] = (s, actions, prov)
            layer = nxt
            layers.append(layer)
        for s in layer:
            found[s] = _rebuild(layers, s, ())
        return found

    def holds_query(self, theory_obs: Iterable, query: Query,
                    mode: str = "credulous") -> "QueryResult":
        obs = tuple(theory_obs) + tuple(
            ActionObservation(a, t) for acts, t in query.schedule for a in sorted(acts))
        goal = query.goal
        if self.search(obs, query.horizon) is None:
            return QueryResult(mode == "skeptical", None, True)
        if mode == "credulous":
            w = self.search(obs, query.horizon, lambda s: s.holds_all(goal))
            return QueryResult(w is not None, w, False)
        if mode != "skeptical":
            raise ValueError("mode must be credulous or skeptical")
        cex = self.search(obs, query.horizon, lambda s: not s.holds_all(goal))
        return QueryResult(cex is None, cex, False)


def _goal_literals(goal) -> tuple:
    if isinstance(goal, State):
        return goal.literals()
    return tuple(goal)


def _index_observations(observations):
    fluent_obs: dict[int, list] = {}
    act_obs: dict[int, frozenset] = {}
    for o in observations:
        if isinstance(o, FluentObservation):
            fluent_obs.setdefault(o.time, []).append(o.literal)
        elif isinstance(o, ActionObservation):
            act_obs[o.time] = act_obs.get(o.time, frozenset()) | {o.action}
        else:
            raise TypeError(f"not an observation: {o!r}")
    return fluent_obs, act_obs


def _initial_provenance(s0: State, observations) -> Provenance:
    seen = {str(o.literal) for o in observations
            if isinstance(o, FluentObservation) and o.time == 0}
    return tuple(sorted((str(lit), "observation" if str(lit) in seen else "initial")
                        for lit in s0.literals()))


def _rebuild(layers, final: State, observations) -> "Trajectory":
    states, acts, provs = [final], [], []
    s = final
    for t in range(len(layers) - 1, 0, -1):
        prev, actions, prov = layers[t][s]
        acts.append(actions)
        provs.append(prov)
        states.append(prev)
        s = prev
    provs.append(_initial_provenance(s, observations))
    return Trajectory(tuple(reversed(states)), tuple(reversed(acts)), tuple(reversed(provs)))


@dataclass(frozen=True)
class Trajectory:
    """States s0..sn, the n action sets between them and per-state provenance."""

    states: tuple[State, ...]
    actions: tuple[frozenset, ...]
    provenance: tuple[Provenance, ...] = field(default=(), compare=False)

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "states": [{"mental": dict(s.mental), "env": dict(s.env)} for s in self.states],
            "actions": [sorted(a) for a in self.actions],
            "provenance": [[list(p) for p in prov] for prov in self.provenance],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        states = tuple(State(s.get("mental", {}), s.get("env", {})) for s in data["states"])
        actions = tuple(frozenset(a) for a in data.get("actions", []))
        if len(actions) != len(states) - 1:
            raise ValueError("a trajectory needs one action set per transition")
        prov = tuple(tuple(tuple(p) for p in ps) for ps in data.get("provenance", []))
        return cls(states, actions, prov)

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class QueryResult:
    holds: bool
    witness: Trajectory | None = None
    no_models: bool = False


# Functional wrappers --------------------------------------------------------

def step(domain: DomainDescription, s: State, actions: Iterable[str],
         config: SemanticsConfig = SemanticsConfig()) -> State:
    """The successor of s under `actions`; raises InvalidTransition."""
    return Engine(domain, config).step(s, actions)


def trajectories(domain: DomainDescription, s0: State, horizon: int,
                 config: SemanticsConfig = SemanticsConfig(),
                 policy: str = "singleton") -> Iterator[Trajectory]:
    return Engine(domain, config, policy).trajectories(s0, horizon)


def trajectory_models(theory: ActionTheory, horizon: int,
                      config: SemanticsConfig = SemanticsConfig(),
                      policy: str = "singleton") -> Iterator[Trajectory]:
    return Engine(theory.domain, config, policy).trajectory_models(theory.observations, horizon)


def consistent(theory: ActionTheory, horizon: int, config: SemanticsConfig = SemanticsConfig(),
               policy: str = "singleton") -> bool:
    return Engine(theory.domain, config, policy).consistent(theory.observations, horizon)


def plan(domain: DomainDescription, init, goal, horizon: int,
         config: SemanticsConfig = SemanticsConfig(),
         policy: str = "singleton") -> Trajectory | None:
    return Engine(domain, config, policy).plan(init, goal, horizon)


def holds_query(theory: ActionTheory, query: Query, mode: str = "credulous",
                config: SemanticsConfig = SemanticsConfig(),
                policy: str = "singleton") -> QueryResult:
    return Engine(theory.domain, config, policy).holds_query(theory.observations, query, mode)
