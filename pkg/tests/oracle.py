"""Brute-force reference semantics used only by the tests.

Everything here is written from the definitions without reusing engine code:
successor states are found by trying every total assignment and keeping the
ones that equal their own least fixpoint of effects, inertia, defaults and
static laws.
"""
import itertools

from cmt.model import (
    Allows, Causes, Contravenes, Default, EnvLiteral, Facilitates, ForbidsToCause, Inhibits,
    InfluencesDyn, InfluencesStatic, MentalFluent, NoConcurrency, State, Static, Triggers,
)


def holds(lit, s: State) -> bool:
    if isinstance(lit, MentalFluent):
        return s.mental_map.get(lit.cls) == lit.value
    return s.env_map.get(lit.name) == lit.positive


def all_total_states(domain):
    keys_m = [(c.name, c.values) for c in domain.classes]
    for mv in itertools.product(*[vals for _, vals in keys_m]):
        for ev in itertools.product((True, False), repeat=len(domain.fluents)):
            yield State(dict(zip([k for k, _ in keys_m], mv)), dict(zip(domain.fluents, ev)))


def closed_under_statics(domain, s):
    for law in domain.laws:
        if isinstance(law, (Static, InfluencesStatic)) and all(holds(c, s) for c in law.conditions):
            if not all(holds(e, s) for e in law.effects):
                return False
    return True


def action_sets(domain):
    names = [a.name for a in domain.actions]
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            yield frozenset(combo)


def _body(law, s):
    return all(holds(c, s) for c in law.conditions)


def action_ok(domain, s, acts) -> bool:
    laws = domain.laws
    by = lambda kind, a: [l for l in laws if isinstance(l, kind) and l.action == a]
    for a in (x.name for x in domain.actions):
        inhibited = any(_body(l, s) for l in by(Inhibits, a))
        trig = by(Triggers, a)
        trig_active = [l for l in trig if _body(l, s) and not inhibited]
        allow = by(Allows, a)
        allow_active = [l for l in allow if _body(l, s) and not inhibited]
        contra_body = any(_body(l, s) for l in by(Contravenes, a))
        fac = by(Facilitates, a)
        fac_active = [l for l in fac if _body(l, s) and not inhibited and not contra_body]
        contravened = contra_body and not inhibited
        if trig_active and a not in acts:
            return False
        if fac_active and a not in acts:
            return False
        if a in acts:
            if trig and not trig_active:
                return False
            if allow and not allow_active:
                return False
            if inhibited or contravened:
                return False
            if fac and not fac_active:
                return False
    for l in laws:
        if isinstance(l, NoConcurrency) and len(acts & set(l.actions)) > 1:
            return False
    return True


def _lit_key(lit):
    if isinstance(lit, MentalFluent):
        return ("m", lit.cls, lit.value)
    return ("e", lit.name, lit.positive)


def _state_keys(s):
    return {("m", c, v) for c, v in s.mental} | {("e", n, v) for n, v in s.env}


def successors(domain, s, acts) -> set:
    """States s2 that equal the least fixpoint built from s, acts and s2 itself."""
    defaults = {l.literal.name: l.literal.positive for l in domain.laws if isinstance(l, Default)}
    effects = set()
    for l in domain.laws:
        if isinstance(l, (Causes, InfluencesDyn)) and l.action in acts and _body(l, s):
            effects |= {_lit_key(e) for e in l.effects}
    statics = [l for l in domain.laws if isinstance(l, (Static, InfluencesStatic))]
    out = set()
    for s2 in all_total_states(domain):
        d = set(effects)
        for n, v in s.env:
            if n in defaults:
                if s2.env_map[n] == defaults[n]:
                    d.add(("e", n, defaults[n]))
            elif s2.env_map[n] == v:
                d.add(("e", n, v))
        for c, v in s.mental:
            if s2.mental_map[c] == v:
                d.add(("m", c, v))
        changed = True
        while changed:
            changed = False
            for l in statics:
                if all(_lit_key(c) in d for c in l.conditions):
                    for e in l.effects:
                        if _lit_key(e) not in d:
                            d.add(_lit_key(e))
                            changed = True
        if d == _state_keys(s2):
            out.add(s2)
    return out


def forbidden(domain, config, s, s2) -> bool:
    for r in domain.laws:
        if not isinstance(r, ForbidsToCause):
            continue
        cond, bad = (r.left, r.right) if config.orientation == "as-written" else (r.right, r.left)
        if not all(holds(c, s) for c in cond):
            continue
        for f in bad:
            if holds(f, s2) and (config.firing == "holding" or not holds(f, s)):
                return True
    return False


def step(domain, config, s, acts) -> set:
    if not action_ok(domain, s, acts):
        return set()
    return {s2 for s2 in successors(domain, s, acts) if not forbidden(domain, config, s, s2)}


def observed(obs, t, s, acts_next=None):
    from cmt.dsl import ActionObservation, FluentObservation
    for o in obs:
        if isinstance(o, FluentObservation) and o.time == t and not holds(o.literal, s):
            return False
        if acts_next is not None and isinstance(o, ActionObservation) and o.time == t \
                and o.action not in acts_next:
            return False
    return True


def consistent(domain, config, obs, horizon, goal=()) -> bool:
    """Existence of a trajectory model (any action subsets) by forward sets."""
    from cmt.dsl import ActionObservation
    if any(o.time >= horizon if isinstance(o, ActionObservation) else o.time > horizon
           for o in obs):
        return False
    layer = {s for s in all_total_states(domain)
             if closed_under_statics(domain, s) and observed(obs, 0, s)}
    for t in range(horizon):
        nxt = set()
        for s in layer:
            for acts in action_sets(domain):
                if not observed(obs, t, s, acts):
                    continue
                nxt |= {s2 for s2 in step(domain, config, s, acts) if observed(obs, t + 1, s2)}
        layer = nxt
    return any(all(holds(g, s) for g in goal) for s in layer)
