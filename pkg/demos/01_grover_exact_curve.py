"""Exact amplification curves for permutation inversion.

Runs the inversion search at several domain sizes, capturing the exact
success probability after every round, and checks the whole curve against
the closed form sin^2((2k+1) * asin(1/sqrt(N))).  One oracle query per round.
"""

import math

import numpy as np

from advice_lab import PermutationOracle, grover_spec, measurement_distribution, run
from advice_lab.qsim import default_grover_iterations


def curve(n: int, rounds: int, seed: int):
    rng = np.random.default_rng(seed)
    f = PermutationOracle(rng.permutation(n))
    y = int(rng.integers(n))
    marked = int(np.flatnonzero(f.table == y)[0])
    theta = math.asin(1 / math.sqrt(n))
    rows = []
    for k in range(rounds + 1):
        final, trace = run(grover_spec(n, k), f, y)
        p = float(measurement_distribution(final, "position")[marked])
        closed = math.sin((2 * k + 1) * theta) ** 2
        rows.append((k, p, closed, abs(p - closed), float(trace.totals.sum())))
    return rows


def main():
    print("=" * 72)
    print("  EXACT AMPLIFICATION CURVES")
    print("=" * 72)
    for n in (4, 16, 64):
        best = default_grover_iterations(n)
        print(f"\n  N = {n}   (suggested rounds: {best})")
        print(f"  {'k':>3}  {'P(marked)':>12}  {'closed form':>12}  {'|err|':>9}  {'queries':>7}")
        for k, p, closed, err, queries in curve(n, best + 2, seed=n):
            flag = " <- suggested" if k == best else ""
            print(f"  {k:>3}  {p:12.8f}  {closed:12.8f}  {err:9.2e}  {queries:7.0f}{flag}")
    print("\n  The curve is the pure sinusoid; the simulator matches it to")
    print("  machine precision, and every round costs exactly one query.")


if __name__ == "__main__":
    main()
