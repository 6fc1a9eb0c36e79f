"""Rescaled eigenvalue correction against k, at two grid sizes.

Usage: python3 scripts/sweep_convergence.py [--k 1e3 1e4 1e5 1e6] [--N 4000 6000]
"""

import argparse
import os

from prandtl_lab.prandtl_sim import SimConfig, sweep_k

TARGET = -0.92614 - 0.92614j


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=float, nargs="+", default=[1e3, 1e4, 1e5, 1e6])
    p.add_argument("--N", type=int, nargs="+", default=[4000, 6000])
    args = p.parse_args()
    ks = sorted(int(k) for k in args.k)
    print(f"{'N':>6} {'k':>9} {'rescaled':>24} {'|err|':>8} {'conv':>5} {'sec':>6}")
    for N in args.N:
        for r in sweep_k(ks, SimConfig(N=N), threads=os.cpu_count() or 1):
            z = r.rescaled
            print(f"{N:>6} {r.k:>9} {z.real:+11.5f} {z.imag:+11.5f}i {abs(z - TARGET):8.4f} {r.converged!s:>5} {r.wall_seconds:6.1f}")


if __name__ == "__main__":
    main()
