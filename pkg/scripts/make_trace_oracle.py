"""Exact AoI/AoII values for data/sample_trace.csv, by rational arithmetic.

Ages are evaluated pointwise from the raw events and integrated with Fractions;
nothing is shared with semalloc.metrics.  Output: data/sample_trace_oracle.csv.
"""

import csv
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
HORIZON = Fraction(12)


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(Fraction(r["t"]), r["source"], r["estimate"], Fraction(r["gen_time"])) for r in rows]


def state_at(events, t):
    cur = None
    for e in events:
        if e[0] <= t:
            cur = e
    return cur


def integrate(f, events, horizon):
    # each integrand is linear between consecutive event times, so the
    # midpoint rule is exact piece by piece
    cuts = sorted({e[0] for e in events if e[0] < horizon} | {horizon})
    area = sum(((b - a) * f((a + b) / 2) for a, b in zip(cuts, cuts[1:])), Fraction(0))
    return area / horizon


def main():
    events = load(ROOT / "data" / "sample_trace.csv")

    def aoi(t):
        return t - state_at(events, t)[3]

    def last_correct(t):
        v = Fraction(0)
        for e in events:
            if e[0] > t:
                break
            if e[1] == e[2]:
                v = None
            elif v is None:
                v = e[0]
        return v

    def aoii(t):
        e = state_at(events, t)
        if e[1] == e[2]:
            return Fraction(0)
        return t - last_correct(t)

    rows = [("aoi", integrate(aoi, events, HORIZON)), ("aoii", integrate(aoii, events, HORIZON))]
    out = ROOT / "data" / "sample_trace_oracle.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "horizon", "exact", "value"])
        for name, val in rows:
            w.writerow([name, str(HORIZON), str(val), repr(float(val))])
    print(out.read_text(), end="")


if __name__ == "__main__":
    sys.exit(main())
