"""Reachability grids and change priority for both rule sets.

Run: python3 demos/reachability_tour.py [horizon]
"""
import sys

from cmt.analysis import ONSET, priority, reachability


def main(horizon=6):
    for th in ("HER", "UER"):
        m = reachability(th, ONSET, horizon)
        print(m.to_text())
        print("\nchange priority of the witness plans:")
        print(priority(m.witnesses(), horizon).to_text())
        print()


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 6)
