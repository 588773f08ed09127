"""Compare every reading of the rule sets (source x orientation x firing)
against the published dialogue verdicts and sample tables.

Run: python3 demos/semantics_readings.py
"""
from cmt.analysis import discrepancy_report


def main():
    print(discrepancy_report().to_text())


if __name__ == "__main__":
    main()
