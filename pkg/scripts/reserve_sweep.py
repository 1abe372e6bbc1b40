"""Brute-force optimal reserve for N i.i.d. uniform[0,1] bidders.

Sweeps a second-price auction with reserve r over a grid and reports the
revenue-maximising reserve; for two bidders the analytic optimum is
r = 1/2 with revenue 5/12.
"""

import argparse

import numpy as np


def reserve_revenue(values: np.ndarray, reserve: float) -> float:
    top = np.sort(values, axis=1)
    first = top[:, -1]
    second = top[:, -2] if values.shape[1] > 1 else np.zeros(len(values))
    pay = np.where(first >= reserve, np.maximum(second, reserve), 0.0)
    return float(pay.mean())


def sweep(bidders: int, samples: int, seed: int, grid: int = 101):
    values = np.random.default_rng(seed).uniform(size=(samples, bidders))
    reserves = np.linspace(0.0, 1.0, grid)
    revenue = np.array([reserve_revenue(values, r) for r in reserves])
    best = int(np.argmax(revenue))
    return reserves[best], revenue[best], reserves, revenue


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--bidders", type=int, default=2)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    r, rev, _, _ = sweep(args.bidders, args.samples, args.seed)
    print(f"bidders={args.bidders} best_reserve={r:.2f} revenue={rev:.5f}")


if __name__ == "__main__":
    main()
