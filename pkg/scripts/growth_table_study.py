"""R^2 of log propagator norm against k, at every tabulated time and two grids.

Shows how far log-growth over k in {10, 30, 100} is from linear.

Usage: python3 scripts/growth_table_study.py [--k 10 30 100]
"""

import argparse

import numpy as np

from prandtl_lab.baseflow import gaussian_shear_flow
from prandtl_lab.heat_halfspace import growth_table

TIMES = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=float, nargs="+", default=[10, 30, 100])
    args = p.parse_args()
    flow = gaussian_shear_flow()
    for h, dt in ((0.04, 2e-3), (0.02, 1e-3)):
        tab = growth_table(args.k, TIMES, flow, h=h, dt=dt)
        print(f"h = {h}, dt = {dt}, rho = {tab.rho:.4f}")
        for j, t in enumerate(tab.times):
            logs = tab.log_growth[:, j]
            per_kt = logs / (np.asarray(tab.k_list) * t)
            print(f"  t={t:<5} log norm {np.round(logs, 4)}  per k t {np.round(per_kt, 4)}  R^2 {tab.r_squared[j]:.5f}")
        # sqrt(k) fit, for contrast with the linear one
        s = np.sqrt(np.asarray(tab.k_list, dtype=float))
        y = tab.log_growth[:, -1]
        r2 = np.corrcoef(s, y)[0, 1] ** 2
        print(f"  R^2 against sqrt(k) at t={tab.times[-1]}: {r2:.5f}")


if __name__ == "__main__":
    main()
