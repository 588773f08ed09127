"""Reachability grids, change-priority weights, the planning experiment and a
report that sets the published sample tables against every semantic reading."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .engine import FIRINGS, ORIENTATIONS, Engine, SemanticsConfig, Trajectory
from .theories import (
    CATALOG, CLASS_ORDER, SOURCES, THEORY_NAMES, ae_domain, ae_state, builtin_theory,
    check_transition, label_state, read_data, set_action,
)

ONSET = SemanticsConfig("as-written", "onset")
HOLDING = SemanticsConfig("as-written", "holding")


def theory_engine(theory: str, source: str = "listing",
                  config: SemanticsConfig = ONSET) -> Engine:
    """Engine over the appraisal domain with a built-in rule set attached."""
    return Engine(builtin_theory(theory, source).apply(ae_domain()), config)


@dataclass
class ReachabilityMatrix:
    theory: str
    source: str
    config: SemanticsConfig
    horizon: int
    labels: tuple[str, ...]
    cells: dict = field(default_factory=dict)  # (init, goal) -> Trajectory | None

    def reachable(self, init: str, goal: str) -> bool:
        return self.cells[(init, goal)] is not None

    def column(self, goal: str, include_self: bool = False) -> list[str]:
        return [i for i in self.labels
                if (include_self or i != goal) and self.reachable(i, goal)]

    def witnesses(self) -> list[Trajectory]:
        return [w for w in self.cells.values() if w is not None]

    def to_text(self) -> str:
        width = max(len(x) for x in self.labels)
        head = " " * (width + 1) + " ".join(g[:3] for g in self.labels)
        lines = [f"{self.theory} ({self.source}, {self.config.orientation}, "
                 f"{self.config.firing}), horizon {self.horizon}; rows init, columns goal",
                 head]
        for i in self.labels:
            marks = []
            for g in self.labels:
                mark = "#" if self.reachable(i, g) else "."
                marks.append(f"{mark:>3}")
            lines.append(f"{i:<{width}} " + " ".join(marks))
        lines.append("")
        lines.append(f"{'goal':<{width}} from-others  self")
        for g in self.labels:
            self_mark = "yes" if self.reachable(g, g) else "no"
            lines.append(f"{g:<{width}} {len(self.column(g)):>11}  {self_mark}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1, "theory": self.theory, "source": self.source,
            "config": self.config.as_dict(), "horizon": self.horizon,
            "labels": list(self.labels),
            "grid": [[self.reachable(i, g) for g in self.labels] for i in self.labels],
            "reached_from_others": {g: len(self.column(g)) for g in self.labels},
            "self_reachable": {g: self.reachable(g, g) for g in self.labels},
            "witnesses": {f"{i}->{g}": format_plan(w) for (i, g), w in self.cells.items()
                          if w is not None},
        }


def reachability(spec=None, config: SemanticsConfig = ONSET, horizon: int = 6,
                 catalog: dict | None = None, domain=None,
                 source: str = "listing") -> ReachabilityMatrix:
    """Plan between every ordered pair of catalog states, self-pairs included.

    `spec` is a TheorySpec, a built-in rule set name (read from `source`) or
    None for no constraints at all.
    """
    catalog = catalog or CATALOG
    if isinstance(spec, str):
        spec = builtin_theory(spec, source)
    domain = domain or ae_domain()
    if spec is not None:
        domain = spec.apply(domain)
    eng = Engine(domain, config)
    m = ReachabilityMatrix(spec.name if spec else "NONE", spec.source if spec else "none",
                           config, horizon, tuple(catalog))
    for i, s0 in catalog.items():
        found = eng.reachable(s0, horizon)
        for g, sg in catalog.items():
            m.cells[(i, g)] = found.get(sg)
    return m


class EmptyTrajectorySet(ValueError):
    pass


@dataclass
class PriorityTable:
    classes: tuple[str, ...]
    horizon: int
    weights: dict  # class -> list of weights for steps 1..horizon
    count: int

    def weight(self, cls: str, step: int) -> float:
        return self.weights[cls][step - 1]

    def to_text(self) -> str:
        head = "class " + " ".join(f"A{i:<4}" for i in range(1, self.horizon + 1))
        rows = [head]
        for c in self.classes:
            rows.append(f"{c:<5} " + " ".join(f"{w:<5.2f}" for w in self.weights[c]))
        return "\n".join(rows)


def priority(trajectories, horizon: int | None = None,
             classes=CLASS_ORDER) -> PriorityTable:
    """Share of trajectories in which each class changes value at each step."""
    trajectories = list(trajectories)
    if not trajectories:
        raise EmptyTrajectorySet("priority needs at least one trajectory")
    horizon = horizon or max(t.horizon for t in trajectories)
    weights = {c: [0.0] * horizon for c in classes}
    for t in trajectories:
        for i in range(1, min(horizon, t.horizon) + 1):
            before, after = t.states[i - 1], t.states[i]
            for c in classes:
                if before.value(c) != after.value(c):
                    weights[c][i - 1] += 1
    n = len(trajectories)
    return PriorityTable(tuple(classes), horizon,
                         {c: [x / n for x in ws] for c, ws in weights.items()}, n)


# Experiment grid ----------------------------------------------------------------

CSV_COLUMNS = ("init_label", "goal_label", "theory", "orientation", "firing", "horizon",
               "status", "plan", "wall_ms")


def format_plan(t: Trajectory | None) -> str:
    if t is None:
        return ""
    steps = []
    for i, acts in enumerate(t.actions, start=1):
        steps.append(f"{i}:{'+'.join(sorted(acts)) if acts else 'noop'}")
    return " ".join(steps)


def _grid_rows(args):
    theory, source, orientation, firing, horizon, init = args
    config = SemanticsConfig(orientation, firing)
    eng = theory_engine(theory, source, config)
    rows = []
    for goal, sg in CATALOG.items():
        start = time.perf_counter()
        w = eng.plan(CATALOG[init], sg, horizon)
        ms = (time.perf_counter() - start) * 1000
        rows.append({"init_label": init, "goal_label": goal, "theory": theory,
                     "orientation": orientation, "firing": firing, "horizon": horizon,
                     "status": "SAT" if w else "UNSAT", "plan": format_plan(w),
                     "wall_ms": round(ms, 3)})
    return rows


@dataclass
class ExperimentResult:
    rows: list[dict]
    source: str
    config: SemanticsConfig
    horizon: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()

    def summary(self) -> dict:
        times = [float(r["wall_ms"]) for r in self.rows]
        return {
            "schema_version": 1,
            "source": self.source,
            "config": self.config.as_dict(),
            "horizon": self.horizon,
            "counts": summarize_counts(self.rows),
            "timing_ms": {"total": round(sum(times), 3),
                          "mean": round(sum(times) / len(times), 3) if times else 0.0,
                          "max": round(max(times), 3) if times else 0.0},
        }


def summarize_counts(rows) -> dict:
    """Run, SAT and per-goal reachability counts; stable under a CSV round trip."""
    out: dict = {"runs": len(rows)}
    for theory in THEORY_NAMES:
        mine = [r for r in rows if r["theory"] == theory]
        sat = [r for r in mine if r["status"] == "SAT"]
        per_goal = {g: sum(1 for r in sat if r["goal_label"] == g and r["init_label"] != g)
                    for g in CATALOG}
        out[theory] = {
            "runs": len(mine),
            "sat": len(sat),
            "unsat": len(mine) - len(sat),
            "self_sat": sum(1 for r in sat if r["goal_label"] == r["init_label"]),
            "reached_from_others": per_goal,
        }
    return out


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def run_experiment(config: SemanticsConfig = ONSET, horizon: int = 6, source: str = "listing",
                   jobs: int = 1, theories=THEORY_NAMES) -> ExperimentResult:
    """All 16 x 16 label pairs under each rule set (512 planning runs for both).

    Rows are ordered by (init, goal, theory) in catalog order whatever `jobs` is.
    """
    theories = tuple(t.upper() for t in theories)
    tasks = [(th, source, config.orientation, config.firing, horizon, init)
             for th in theories for init in CATALOG]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_grid_rows, tasks))
    else:
        chunks = [_grid_rows(t) for t in tasks]
    index = {label: i for i, label in enumerate(CATALOG)}
    rows = sorted((r for chunk in chunks for r in chunk),
                  key=lambda r: (index[r["init_label"]], index[r["goal_label"]],
                                 theories.index(r["theory"])))
    return ExperimentResult(rows, source, config, horizon)


# Published sample tables -----------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    table: str
    theory: str
    label: str
    init: str
    goal: str
    sat: bool
    plan: tuple[str, ...] = ()  # per step, "cv" codes such as "cu" for (co, undecided)


def _row(table, theory, label, init, goal, plan=None):
    steps = tuple(plan.split()) if plan else ()
    return TableRow(table, theory, label, init, goal, plan is not None, steps)


_PAIRS = [
    ("Joy-Anger", "hheu", "hloh"), ("Fear-Hope", "ulel", "uhel"),
    ("Frustration-Joy", "hleh", "hheu"), ("Distress-Relief", "llel", "uheu"),
    ("Joy-Dislike", "hheu", "ulol"), ("Anger-Frustration", "hloh", "hleh"),
    ("Anger-Liking", "hloh", "uhou"), ("Fear-Regret", "ulel", "ulsl"),
    ("Joy-Disgust", "hheu", "lleh"), ("Hope-Fear", "uhel", "ulel"),
    ("Hope-Pride", "uhel", "uhsu"), ("Sadness-Shame", "hlel", "llsh"),
    ("Regret-Sadness", "ulsl", "hlel"), ("Hope-Distress", "uhel", "llel"),
    ("Fear-Surprise", "ulel", "uueu"), ("Anger-Guilt", "hloh", "hhsh"),
]
_HER_PLANS = {
    "Fear-Hope": "cu cu cu cu cl gh", "Frustration-Joy": "cl cl cl cl cu gh",
    "Distress-Relief": "cu nl cu nl gh nu", "Anger-Liking": "cl nl cl cu gh nu",
    "Hope-Pride": "as gh gh gh cu gh", "Anger-Guilt": "cl cl cu gh ch as",
}
_UER_PLANS = {"Anger-Frustration": "ae ch nh ch nh ch", "Fear-Regret": "as as as as as as"}
_TABLE5 = [
    ("Dislike-Anger", "ulol", "hloh", "ch ch ch ch ch nh"),
    ("Dislike-Anger", "ulol", "hloh", "ch ch ch ch ch nh"),
    ("Shame-Hope", "llsh", "uhel", None),
    ("Relief-Joy", "hheu", "hheu", "nh nh nh nh nh nh"),
    ("Distress-Relief", "llel", "uheu", None),
    ("Joy-Dislike", "hheu", "ulol", None),
    ("Distress-Frustration", "llel", "hleh", "as as as ch ae nh"),
    ("Regret-Liking", "ulsl", "uhou", None),
    ("Dislike-Regret", "ulol", "ulsl", "as as as as as as"),
    ("Distress-Disgust", "llel", "lleh", "as as as as ch ae"),
    ("Surprise-Fear", "uueu", "ulel", None),
    ("Liking-Pride", "uhou", "uhsu", "as as as as as as"),
    ("Disgust-Shame", "lleh", "llsh", "ch as as as as as"),
    ("Frustration-Sadness", "hleh", "hlel", None),
    ("Hope-Distress", "uhel", "llel", None),
    ("Fear-Surprise", "ulel", "uleu", None),
    ("Joy-Guilt", "hheu", "hhsh", "nh nh nh nh as ch"),
]

SAMPLE_ROWS: tuple[TableRow, ...] = tuple(
    [_row("her-sample", "HER", lab, i, g, _HER_PLANS.get(lab)) for lab, i, g in _PAIRS]
    + [_row("uer-comparison", "UER", lab, i, g, _UER_PLANS.get(lab)) for lab, i, g in _PAIRS]
    + [_row("uer-sample", "UER", lab, i, g, p) for lab, i, g, p in _TABLE5]
)

_CLS = {"n": "ne", "g": "go", "a": "ac", "c": "co"}
_VAL = {"h": "high", "u": "undecided", "l": "low", "s": "self", "o": "other",
        "e": "environment"}


def replay(eng: Engine, init: str, steps) -> bool:
    """Whether a published plan is a valid trajectory under the engine's reading."""
    s = ae_state(init)
    for code in steps:
        s2, _, _ = eng.transition(s, {set_action(_CLS[code[0]], _VAL[code[1]])})
        if s2 is None:
            return False
        s = s2
    return True


def all_configs():
    return [(src, SemanticsConfig(o, f)) for src in SOURCES for o in ORIENTATIONS
            for f in FIRINGS]


def config_key(source: str, config: SemanticsConfig) -> str:
    return f"{source}/{config.orientation}/{config.firing}"


EXPECTED_FIXTURE = {"HER": (False, True, True, True, True, True),
                    "UER": (False,) * 6}


@dataclass
class DiscrepancyReport:
    fixture: dict          # config key -> {"HER": verdicts, "UER": verdicts, "match": bool}
    rows: list             # per sample row: statuses and replays per config
    conflicts: list        # named disagreements inside the published material
    prose: list            # reachability statements checked under listing/onset
    priority_reference: dict

    @property
    def fixture_matches(self) -> list[str]:
        return [k for k, v in self.fixture.items() if v["match"]]

    def row_agreement(self) -> dict:
        return {k: sum(1 for r in self.rows if r["status"][k] == r["paper_sat"])
                for k in self.fixture}

    def to_dict(self) -> dict:
        return {"schema_version": 1, "fixture": self.fixture,
                "fixture_matches": self.fixture_matches, "rows": self.rows,
                "row_agreement": self.row_agreement(), "conflicts": self.conflicts,
                "prose": self.prose, "priority_reference": self.priority_reference}

    def to_text(self) -> str:
        out = ["Dialogue fixture: verdicts per transition (True = passes)"]
        for k, v in self.fixture.items():
            flag = "MATCH" if v["match"] else ""
            out.append(f"  {k:<28} HER {_bits(v['HER'])}  UER {_bits(v['UER'])}  {flag}")
        out.append(f"  configurations matching all twelve verdicts: "
                   f"{', '.join(self.fixture_matches) or 'none'}")
        out.append("")
        out.append(f"Sample table rows agreeing with the published status "
                   f"(of {len(self.rows)}):")
        for k, n in self.row_agreement().items():
            replays = [r["replay"][k] for r in self.rows if r["replay"][k] is not None]
            out.append(f"  {k:<28} status {n:>2}   published plans valid "
                       f"{sum(replays)}/{len(replays)}")
        out.append("")
        out.append("Conflicts in the published material:")
        for c in self.conflicts:
            out.append(f"  [{'detected' if c['detected'] else 'not detected'}] {c['text']}")
        out.append("")
        out.append("Reachability statements (listing, as-written, onset; self excluded):")
        for p in self.prose:
            out.append(f"  [{'holds' if p['holds'] else 'fails'}] {p['text']}  "
                       f"observed: {p['observed']}")
        out.append("")
        out.append("Change priority of the HER witnesses vs the published reference:")
        for k, v in self.priority_reference.items():
            out.append(f"  {k}: published {v['published']}, computed {v['computed']:.2f}")
        return "\n".join(out)


def _bits(flags) -> str:
    return "".join("P" if f else "V" for f in flags)


def fixture_verdicts(source: str, config: SemanticsConfig) -> dict:
    states = Trajectory.from_json(read_data("s8.json")).states
    out = {}
    for th in THEORY_NAMES:
        spec = builtin_theory(th, source)
        out[th] = tuple(check_transition(spec, config, a, b).passed
                        for a, b in zip(states, states[1:]))
    out["match"] = all(out[t] == EXPECTED_FIXTURE[t] for t in THEORY_NAMES)
    return out


def discrepancy_report(horizon: int = 6) -> DiscrepancyReport:
    """Evaluate the dialogue fixture and the sample tables under all eight readings
    (rule source x orientation x firing)."""
    fixture = {config_key(src, cfg): fixture_verdicts(src, cfg) for src, cfg in all_configs()}
    engines = {}
    for src, cfg in all_configs():
        for th in THEORY_NAMES:
            engines[(config_key(src, cfg), th)] = theory_engine(th, src, cfg)
    rows = []
    for r in SAMPLE_ROWS:
        status, rep = {}, {}
        for src, cfg in all_configs():
            k = config_key(src, cfg)
            eng = engines[(k, r.theory)]
            status[k] = eng.plan(ae_state(r.init), ae_state(r.goal), horizon) is not None
            rep[k] = replay(eng, r.init, r.plan) if r.plan else None
        rows.append({"table": r.table, "theory": r.theory, "label": r.label,
                     "paper_sat": r.sat, "status": status, "replay": rep})

    def status_of(theory, label, key):
        for row in rows:
            if row["theory"] == theory and row["label"] == label and row["table"] == "her-sample":
                return row["status"][key]
        raise KeyError(label)

    lh, lo = "listing/as-written/holding", "listing/as-written/onset"
    conflicts = [
        {"text": "HER Anger-Liking is published SAT but is SAT only under onset firing",
         "detected": status_of("HER", "Anger-Liking", lo)
         and not status_of("HER", "Anger-Liking", lh)},
        {"text": "HER Fear-Regret is published UNSAT but is UNSAT only under holding firing",
         "detected": not status_of("HER", "Fear-Regret", lh)
         and status_of("HER", "Fear-Regret", lo)},
    ]
    her = reachability("HER", ONSET, horizon)
    uer = reachability("UER", ONSET, horizon)
    prose = _prose_checks(her, uer)
    pr = priority(her.witnesses(), horizon)
    reference = {
        "co at A1": {"published": 0.8, "computed": pr.weight("co", 1)},
        "ne at A2": {"published": 0.5, "computed": pr.weight("ne", 2)},
        "ne at A6": {"published": 0.6, "computed": pr.weight("ne", 6)},
    }
    return DiscrepancyReport(fixture, rows, conflicts, prose, reference)


def _prose_checks(her: ReachabilityMatrix, uer: ReachabilityMatrix) -> list:
    n_others = len(her.labels) - 1
    checks = []

    def add(text, m, goals, test):
        observed = {g: len(m.column(g)) for g in goals}
        checks.append({"text": text, "holds": all(test(m, g) for g in goals),
                       "observed": observed})

    add("HER: Hope, Joy, Relief, Liking, Pride, Guilt reachable from all others", her,
        ["Hope", "Joy", "Relief", "Liking", "Pride", "Guilt"],
        lambda m, g: len(m.column(g)) == n_others)
    add("HER: Dislike, Regret, Fear, Sadness, Surprise reachable only from themselves", her,
        ["Dislike", "Regret", "Fear", "Sadness", "Surprise"],
        lambda m, g: not m.column(g) and m.reachable(g, g))
    add("HER: Anger, Frustration, Shame reachable from no other state", her,
        ["Anger", "Frustration", "Shame"], lambda m, g: not m.column(g))
    add("UER: Frustration reachable from all others", uer, ["Frustration"],
        lambda m, g: len(m.column(g)) == n_others)
    add("UER: Anger, Regret, Disgust, Shame, Guilt reachable from 3 to 6 states incl. itself",
        uer, ["Anger", "Regret", "Disgust", "Shame", "Guilt"],
        lambda m, g: 3 <= len(m.column(g, include_self=True)) <= 6)
    add("UER: Hope, Relief, Dislike, Fear, Distress, Surprise reachable from no other state",
        uer, ["Hope", "Relief", "Dislike", "Fear", "Distress", "Surprise"],
        lambda m, g: not m.column(g))
    return checks


def summary_json(result: ExperimentResult) -> str:
    return json.dumps(result.summary(), indent=2, sort_keys=True)


def describe(s) -> str:
    lab = label_state(s)
    return f"{lab} {s.describe(CLASS_ORDER)}" if lab else s.describe(CLASS_ORDER)
