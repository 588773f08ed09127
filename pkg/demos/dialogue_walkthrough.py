"""Walk the six-move counselling dialogue through both regulation rule sets.

Run: python3 demos/dialogue_walkthrough.py
"""
from cmt.engine import SemanticsConfig, Trajectory
from cmt.theories import THEORY_NAMES, builtin_theory, check_transition, label_state, \
    read_data, short_code


def main():
    states = Trajectory.from_json(read_data("s8.json")).states
    print("trajectory:", " -> ".join(f"{short_code(s)}[{label_state(s) or '?'}]"
                                     for s in states))
    for source, firing in (("listing", "holding"), ("definition", "onset")):
        config = SemanticsConfig("as-written", firing)
        print(f"\n== rules from {source}, {firing} firing ==")
        for th in THEORY_NAMES:
            spec = builtin_theory(th, source)
            for i, (a, b) in enumerate(zip(states, states[1:]), start=1):
                j = check_transition(spec, config, a, b)
                mark = "pass" if j.passed else "VIOLATES"
                cited = ", ".join(str(f) for f in j.fired)
                print(f"  {th} move {i}: {mark}  {cited}")


if __name__ == "__main__":
    main()
