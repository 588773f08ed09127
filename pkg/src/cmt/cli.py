"""Command-line interface. Exit codes: 0 success, 1 UNSAT or violation found,
2 usage or parse error, 3 internal error."""
from __future__ import annotations

import argparse
import json
import random
import shlex
import sys
import traceback
from pathlib import Path

from . import aspgen
from .analysis import (
    discrepancy_report, format_plan, priority, reachability, run_experiment,
)
from .dsl import (
    ActionTheory, DslError, FluentObservation, parse_domain, parse_literals, parse_observations,
    parse_query, print_domain, print_observations, print_query,
)
from .engine import FIRINGS, ORIENTATIONS, Engine, SemanticsConfig, Trajectory
from .model import CmtError, State, ValidationError, validate_domain
from .theories import (
    CATALOG, CLASS_ORDER, SOURCES, TheorySpec, builtin_theory, check_transition, data_path,
    eval_invariant, label_state, lookup_state,
)

OK, FAIL, USAGE, INTERNAL = 0, 1, 2, 3


class UsageError(CmtError):
    pass


def _read(path: str) -> tuple[str, str]:
    """Text of a file, falling back to the shipped fixture with that name."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8"), str(p)
    shipped = data_path(p.name)
    if shipped.is_file():
        return shipped.read_text(encoding="utf-8"), f"<shipped>/{p.name}"
    raise UsageError(f"no such file: {path}")


def load_domain(path: str | None):
    text, name = _read(path or "ae.cmt")
    return parse_domain(text, name)


def load_theory(arg: str | None, source: str, domain) -> TheorySpec | None:
    """`her`/`uer` select a built-in rule set; anything else is a rule file."""
    if arg is None:
        return None
    if arg.lower() in ("her", "uer"):
        spec = builtin_theory(arg, source)
    else:
        text, name = _read(arg)
        stem = Path(arg).stem
        from .dsl import parse_rules
        spec = TheorySpec(stem, "file", parse_rules(text, domain, stem, name))
    report = validate_domain(spec.apply(domain))
    if not report.ok:
        raise ValidationError(report)
    return spec


def _config(args) -> SemanticsConfig:
    return SemanticsConfig(args.orientation, args.firing)


def _header(args, **extra) -> dict:
    """Semantics and inputs of a report; embedded in every output."""
    h = {"command": args.command, "theory": getattr(args, "theory", None),
         "source": args.source, "orientation": args.orientation, "firing": args.firing}
    if getattr(args, "horizon", None) is not None:
        h["horizon"] = args.horizon
    h.update(extra)
    return h


def _header_line(h: dict) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in h.items() if v is not None)


def _emit(args, header: dict, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps({"config": header, **payload}, indent=2, sort_keys=True))
    else:
        print(_header_line(header))
        if text:
            print(text)


def _state_text(s: State) -> str:
    label = label_state(s) if set(s.mental_map) == set(CLASS_ORDER) else None
    desc = s.describe(CLASS_ORDER if label else None)
    return f"{label} {desc}" if label else desc


def _trajectory_text(t: Trajectory) -> str:
    lines = [f"0 {_state_text(t.states[0])}"]
    for i, (acts, s) in enumerate(zip(t.actions, t.states[1:]), start=1):
        names = ", ".join(sorted(acts)) or "noop"
        lines.append(f"{i} {{{names}}} -> {_state_text(s)}")
    return "\n".join(lines)


def _init_arg(text: str, domain):
    """Catalog label, compact appraisal code or literal list."""
    try:
        s = lookup_state(text)
        if set(s.mental_map) == set(domain.class_names) and not domain.fluents:
            return s
        return s.literals()
    except (ValueError, KeyError):
        return parse_literals(text, "<argument>")


def _goal_arg(text: str, domain):
    init = _init_arg(text, domain)
    return init.literals() if isinstance(init, State) else init


# Subcommands -------------------------------------------------------------------

def cmd_parse(args) -> int:
    domain = load_domain(args.domain)
    parts = [print_domain(domain)]
    payload = {"domain": parts[0]}
    if args.obs:
        text, name = _read(args.obs)
        obs = parse_observations(text, domain, name)
        payload["observations"] = print_observations(obs)
        parts.append(payload["observations"])
    if args.query:
        text, name = _read(args.query)
        payload["query"] = print_query(parse_query(text, name))
        parts.append(payload["query"])
    _emit(args, _header(args), payload, "\n".join(p.rstrip("\n") for p in parts))
    return OK


def cmd_check(args) -> int:
    domain = load_domain(args.domain)
    spec = load_theory(args.theory, args.source, domain)
    if spec:
        domain = spec.apply(domain)
    report = validate_domain(domain)
    payload = {"errors": [str(d) for d in report.errors],
               "warnings": [str(d) for d in report.warnings]}
    lines = [f"error {d}" for d in report.errors] + [f"warning {d}" for d in report.warnings]
    ok = report.ok
    if ok and args.obs:
        text, name = _read(args.obs)
        obs = parse_observations(text, domain, name)
        horizon = args.horizon if args.horizon is not None else _obs_horizon(obs)
        model = Engine(domain, _config(args), args.policy).search(obs, horizon)
        ok = model is not None
        payload["consistent"] = ok
        payload["horizon"] = horizon
        lines.append("consistent" if ok else "INCONSISTENT")
        if model is not None:
            payload["model"] = model.to_dict()
            if args.trace_out:
                Path(args.trace_out).write_text(model.to_json() + "\n", encoding="utf-8")
    else:
        lines.append("valid" if ok else "INVALID")
    payload["ok"] = ok
    _emit(args, _header(args), payload, "\n".join(lines))
    return OK if ok else FAIL


def _obs_horizon(obs) -> int:
    from .dsl import ActionObservation
    last = 0
    for o in obs:
        last = max(last, o.time + 1 if isinstance(o, ActionObservation) else o.time)
    return last


def cmd_plan(args) -> int:
    if args.init is None or args.goal is None:
        raise UsageError("plan needs --init and --goal")
    domain = load_domain(args.domain)
    spec = load_theory(args.theory, args.source, domain)
    if spec:
        domain = spec.apply(domain)
    eng = Engine(domain, _config(args), args.policy)
    init = _init_arg(args.init, domain)
    goal = _goal_arg(args.goal, domain)
    w = eng.plan(init, goal, args.horizon)
    status = "SATISFIABLE" if w else "UNSATISFIABLE"
    payload = {"status": status, "plan": w.to_dict() if w else None,
               "steps": format_plan(w) if w else None}
    text = status + ("\n" + _trajectory_text(w) if w else "")
    _emit(args, _header(args, init=args.init, goal=args.goal), payload, text)
    return OK if w else FAIL


def cmd_verify(args) -> int:
    domain = load_domain(args.domain)
    spec = load_theory(args.theory, args.source, domain)
    text, _ = _read(args.trace)
    trace = Trajectory.from_json(text)
    config = _config(args)
    results, lines = [], []
    for i, (a, b) in enumerate(zip(trace.states, trace.states[1:]), start=1):
        j = check_transition(spec, config, a, b)
        fired = [str(f) for f in j.fired]
        results.append({"transition": i, "passed": j.passed, "fired": fired})
        verdict = "pass" if j.passed else "VIOLATION"
        lines.append(f"transition {i}: {verdict}" + (f"  {'; '.join(fired)}" if fired else ""))
    invariant = None
    if spec.name.upper() in ("HER", "UER"):
        holds, first = eval_invariant(spec.name, trace.states)
        invariant = {"holds": holds, "first_failure": first}
        lines.append("invariant holds" if holds else f"invariant fails at state {first}")
    ok = all(r["passed"] for r in results)
    payload = {"transitions": results, "invariant": invariant, "ok": ok}
    _emit(args, _header(args, trace=args.trace), payload, "\n".join(lines))
    return OK if ok else FAIL


def cmd_query(args) -> int:
    if args.query is None:
        raise UsageError("query needs --query")
    domain = load_domain(args.domain)
    spec = load_theory(args.theory, args.source, domain)
    if spec:
        domain = spec.apply(domain)
    obs = ()
    if args.obs:
        text, name = _read(args.obs)
        obs = parse_observations(text, domain, name)
    text, name = _read(args.query)
    q = parse_query(text, name)
    res = Engine(domain, _config(args), args.policy).holds_query(obs, q, args.mode)
    verdict = "holds" if res.holds else "does not hold"
    payload = {"holds": res.holds, "no_models": res.no_models, "mode": args.mode,
               "witness": res.witness.to_dict() if res.witness else None}
    lines = [f"query {verdict} ({args.mode})"]
    if res.no_models:
        lines.append("the theory has no trajectory models within the horizon")
    if res.witness:
        lines.append(_trajectory_text(res.witness))
    _emit(args, _header(args, horizon=q.horizon), payload, "\n".join(lines))
    return OK if res.holds else FAIL


def _appraisal_spec(args):
    domain = load_domain(args.domain)
    return domain, load_theory(args.theory, args.source, domain)


def cmd_reach(args) -> int:
    domain, spec = _appraisal_spec(args)
    m = reachability(spec, _config(args), args.horizon, domain=domain)
    _emit(args, _header(args), m.to_dict(), m.to_text())
    return OK


def cmd_priority(args) -> int:
    if args.trace:
        trajs = [Trajectory.from_json(_read(p)[0]) for p in args.trace]
    else:
        domain, spec = _appraisal_spec(args)
        trajs = reachability(spec, _config(args), args.horizon, domain=domain).witnesses()
    classes = tuple(c for c, _ in trajs[0].states[0].mental) if trajs else CLASS_ORDER
    if set(classes) == set(CLASS_ORDER):
        classes = CLASS_ORDER
    table = priority(trajs, args.horizon, classes)
    payload = {"trajectories": table.count, "weights": table.weights}
    _emit(args, _header(args), payload, table.to_text())
    return OK


def cmd_emit_asp(args) -> int:
    solver = shlex.split(args.solver) if args.solver else None
    if args.differential:
        solver = solver or aspgen.find_solver()
        if solver is None:
            raise UsageError("no answer set solver found; pass --solver")
        rng = random.Random(args.seed)
        report = aspgen.differential_check(
            [aspgen.random_case(rng) for _ in range(args.differential)], solver)
        payload = {"cases": len(report.cases), "agreement": report.agreement,
                   "disagreements": len(report.disagreements)}
        text = f"{len(report.cases)} cases, agreement {report.agreement:.2%}"
        _emit(args, _header(args, seed=args.seed), payload, text)
        return OK if not report.disagreements else FAIL
    domain = load_domain(args.domain)
    spec = load_theory(args.theory, args.source, domain)
    obs = ()
    if args.obs:
        text, name = _read(args.obs)
        obs = parse_observations(text, domain, name)
    if args.init:
        obs += tuple(FluentObservation(lit, 0) for lit in _goal_arg(args.init, domain))
    q = parse_query(*_read(args.query)) if args.query else None
    goal = _goal_arg(args.goal, domain) if args.goal else None
    if args.horizon is not None:
        horizon = args.horizon
    else:
        # planning programs default to the same horizon as `plan`
        horizon = max(_obs_horizon(obs), 6 if goal else 1)
    prog = aspgen.emit_program(ActionTheory(domain, obs), horizon, _config(args), spec,
                               goal=goal, query=q)
    header = _header(args, horizon=q.horizon if q else horizon)
    payload = {"program": prog.text}
    status = None
    if solver:
        sat = aspgen.solve(prog.text, solver)
        status = "SATISFIABLE" if sat else "UNSATISFIABLE"
        payload["status"] = status
    if args.format == "json":
        _emit(args, header, payload, "")
    else:
        print("%" + _header_line(header)[1:])
        print(prog.text, end="" if prog.text.endswith("\n") else "\n")
        if status:
            print(f"% {status}")
    return FAIL if status == "UNSATISFIABLE" else OK


def cmd_experiment(args) -> int:
    theories = ("HER", "UER") if args.theory.lower() == "both" else (args.theory.upper(),)
    if any(t not in ("HER", "UER") for t in theories):
        raise UsageError("experiment runs the built-in rule sets: her, uer or both")
    res = run_experiment(_config(args), args.horizon, args.source, args.jobs, theories)
    if args.out_csv:
        Path(args.out_csv).write_text(res.to_csv(), encoding="utf-8")
    summary = res.summary()
    summary["theories"] = list(theories)
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    if args.format == "csv":
        print(_header_line(_header(args)))
        print(res.to_csv(), end="")
    elif args.format == "json":
        _emit(args, _header(args), {"summary": summary}, "")
    else:
        lines = []
        for th in theories:
            c = summary["counts"][th]
            lines.append(f"{th}: {c['runs']} runs, {c['sat']} SAT, {c['unsat']} UNSAT, "
                         f"{c['self_sat']} self-pairs SAT")
        t = summary["timing_ms"]
        lines.append(f"wall time {t['total']:.0f} ms, mean {t['mean']:.2f} ms per run")
        _emit(args, _header(args), {}, "\n".join(lines))
    return OK


def cmd_discrepancy(args) -> int:
    rep = discrepancy_report(args.horizon)
    header = {"command": "discrepancy", "horizon": args.horizon,
              "configurations": "all (source x orientation x firing)"}
    _emit(args, header, rep.to_dict(), rep.to_text())
    return OK


# Argument parsing ----------------------------------------------------------------

_DEFAULT_FIRING = {"plan": "onset", "reach": "onset", "priority": "onset",
                   "experiment": "onset"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help, theory_required=False, formats=("text", "json")):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--domain", help="domain file (shipped fixture names also work)")
        p.add_argument("--theory", required=theory_required,
                       help="her, uer or a file of forbids_to_cause laws")
        p.add_argument("--source", choices=SOURCES, default="listing")
        p.add_argument("--orientation", choices=ORIENTATIONS, default="as-written")
        p.add_argument("--firing", choices=FIRINGS, default=_DEFAULT_FIRING.get(name, "holding"))
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--policy", choices=("singleton", "any"), default="singleton",
                       help="which action sets the search tries per step")
        return p

    p = command("parse", cmd_parse, "parse and pretty-print inputs")
    p.add_argument("--obs")
    p.add_argument("--query")

    p = command("check", cmd_check, "validate a domain and check observation consistency")
    p.add_argument("--obs")
    p.add_argument("--horizon", type=int)
    p.add_argument("--trace-out", help="write a trajectory model as JSON")

    p = command("plan", cmd_plan, "find a plan from --init to --goal")
    p.add_argument("--init", help="catalog label, code such as hloh, or literals")
    p.add_argument("--goal")
    p.add_argument("--horizon", type=int, default=6)

    p = command("verify", cmd_verify, "check a trajectory against a rule set",
                theory_required=True)
    p.add_argument("--trace", required=True, help="trajectory JSON")

    p = command("query", cmd_query, "answer a query over an action theory")
    p.add_argument("--obs")
    p.add_argument("--query")
    p.add_argument("--mode", choices=("credulous", "skeptical"), default="credulous")

    p = command("reach", cmd_reach, "reachability grid over the emotion catalog",
                theory_required=True)
    p.add_argument("--horizon", type=int, default=6)

    p = command("priority", cmd_priority, "change priority per class and step")
    p.add_argument("--trace", action="append", help="trajectory JSON (repeatable)")
    p.add_argument("--horizon", type=int, default=6)

    p = command("emit-asp", cmd_emit_asp, "emit the answer set program")
    p.add_argument("--obs")
    p.add_argument("--init", help="initial state, added as observations at time 0")
    p.add_argument("--query")
    p.add_argument("--goal")
    p.add_argument("--horizon", type=int)
    p.add_argument("--solver", help="solver command, e.g. 'clingo' or 'python3 -m clingo'")
    p.add_argument("--differential", type=int, metavar="N",
                   help="compare engine and solver on N random theories")
    p.add_argument("--seed", type=int, default=0)

    p = command("experiment", cmd_experiment, "the 16 x 16 planning grid",
                theory_required=True, formats=("text", "json", "csv"))
    p.add_argument("--horizon", type=int, default=6)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")

    p = sub.add_parser("discrepancy", help="published tables against every reading")
    p.set_defaults(func=cmd_discrepancy)
    p.add_argument("--horizon", type=int, default=6)
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "theory", None) == "":
        args.theory = None
    try:
        return args.func(args)
    except (DslError, ValidationError, UsageError, CmtError, ValueError) as exc:
        print(f"cmt: error: {exc}", file=sys.stderr)
        return USAGE
    except aspgen.SolverError as exc:
        print(f"cmt: solver error: {exc}", file=sys.stderr)
        return INTERNAL
    except Exception:
        traceback.print_exc()
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
