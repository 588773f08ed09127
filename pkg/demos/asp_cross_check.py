"""Emit the answer set program for a planning question and compare the
solver's verdict with the native engine.

Run: python3 demos/asp_cross_check.py   (needs clingo for the solver half)
"""
from cmt.analysis import ONSET, theory_engine
from cmt.aspgen import emit_program, find_solver, solve
from cmt.dsl import ActionTheory, FluentObservation
from cmt.theories import CATALOG, ae_domain, builtin_theory

QUESTIONS = [("HER", "Joy", "Anger"), ("HER", "Fear", "Hope"), ("UER", "Dislike", "Anger"),
             ("UER", "Shame", "Hope")]


def main(horizon=6):
    solver = find_solver()
    for th, init, goal in QUESTIONS:
        native = theory_engine(th, "listing", ONSET).plan(CATALOG[init], CATALOG[goal], horizon)
        obs = tuple(FluentObservation(lit, 0) for lit in CATALOG[init].literals())
        prog = emit_program(ActionTheory(ae_domain(), obs), horizon, ONSET,
                            builtin_theory(th), goal=CATALOG[goal].literals())
        asp = solve(prog.text, solver) if solver else None
        print(f"{th} {init}->{goal}: engine {'SAT' if native else 'UNSAT'}, "
              f"solver {'n/a' if asp is None else 'SAT' if asp else 'UNSAT'}, "
              f"program {len(prog.text.splitlines())} lines")


if __name__ == "__main__":
    main()
