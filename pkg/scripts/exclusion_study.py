"""Outer and inner mode mismatch against the exclusion radius and inner window.

Usage: python3 scripts/exclusion_study.py [--eps 1e-6] [--widths 3 5 8] [--radii 3 5 8]
"""

import argparse

from prandtl_lab.complexode import default_root, integrate_backward
from prandtl_lab.mode_compare import compare
from prandtl_lab.prandtl_sim import SimConfig, extract_mode, run_k
from prandtl_lab.shear_layer import build_heteroclinic, build_V


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--widths", type=float, nargs="+", default=[3, 5, 8])
    p.add_argument("--radii", type=float, nargs="+", default=[3, 5, 8])
    args = p.parse_args()
    root = default_root()
    profile = build_V(build_heteroclinic(root, integrate_backward(root.tau, root.z0, root.steps)))
    cfg = SimConfig()
    row, state, ops, _ = run_k(round(1 / args.eps), cfg, return_state=True)
    mode = extract_mode(state)
    print(f"eps = {args.eps:.0e}, rescaled correction {row.rescaled:.5f}, converged {row.converged}")
    for w in args.widths:
        for r in args.radii:
            rep = compare(mode, ops.grid.nodes, cfg.flow, profile, args.eps, w, r)
            print(f"  exclusion {w:g} widths, inner |z| <= {r:g}: outer {rep.outer_sup_err:.4f}  inner {rep.inner_sup_err:.4f}")


if __name__ == "__main__":
    main()
