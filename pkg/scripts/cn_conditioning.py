"""Conditioning of the Crank-Nicolson step and its effect on linearity.

Usage: python3 scripts/cn_conditioning.py [--cases 1000:1e-4 2000:1e-5 4000:1e-6] [--cond]
"""

import argparse

import numpy as np

from prandtl_lab.baseflow import gaussian_shear_flow
from prandtl_lab.prandtl_sim import KL, KU, ModeState, SimConfig, assemble, build_grid, cn_step, random_state


def dense_lhs(ops, dth):
    band = np.asarray(ops.factor(dth)[3], dtype=complex)
    n = ops.n
    D = np.zeros((n, n), dtype=complex)
    for d in range(-KL, KU + 1):
        j = np.arange(max(d, 0), min(n, n + d))
        D[j - d, j] = band[KU - d, j]
    return D


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cases", nargs="+", default=["1000:1e-4", "2000:1e-5", "4000:1e-6"])
    p.add_argument("--cond", action="store_true", help="also compute dense condition numbers")
    p.add_argument("--trials", type=int, default=10)
    args = p.parse_args()
    flow = gaussian_shear_flow()
    rng = np.random.default_rng(0)
    for case in args.cases:
        N, eps = int(case.split(":")[0]), float(case.split(":")[1])
        grid = build_grid(N, 10.0, flow.a, (2 * eps) ** 0.25 / abs(flow.curvature) ** 0.25)
        ops = assemble(grid, flow, eps)
        dth = SimConfig().dtheta(round(1 / eps))
        line = f"N={N:<5} eps={eps:.0e} dtheta={dth:.3g}"
        for refine in (0, 2):

            def step(V):
                return cn_step(ModeState(eps, 0.0, V), ops, dth, refine=refine).amplitude()

            worst = 0.0
            for t in range(args.trials):
                a, b = random_state(grid, eps, t).V, random_state(grid, eps, t + 100).V
                c = 3 * complex(*rng.normal(size=2))
                sa, sb = step(a), step(b)
                err = np.max(np.abs(step(a + c * b) - sa - c * sb))
                worst = max(worst, err / (np.max(np.abs(sa)) + abs(c) * np.max(np.abs(sb))))
            line += f"  linearity(refine={refine}) {worst:.1e}"
        if args.cond:
            D = dense_lhs(ops, dth)
            Dr = D / np.abs(D).max(axis=1)[:, None]
            line += f"  cond {np.linalg.cond(D):.1e}  row-scaled {np.linalg.cond(Dr):.1e}"
        print(line)


if __name__ == "__main__":
    main()
