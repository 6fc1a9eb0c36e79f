"""Command-line driver: ``prandtl-lab <command> [flags]``.

Exit codes: 0 success with every convergence flag set, 1 invalid input or
unexpected failure, 2 non-convergence, 3 spectral-condition alarm. Failures
also write ``error.json`` into the output directory.
"""

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import ConvergenceError, LabError, SCViolation
from .io import figure, read_csv, save_svg, write_csv, write_json

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_SC = 0, 1, 2, 3

COMMANDS = {
    "find-tau": "find_tau",
    "spectrum": "spectrum",
    "sweep": "sweep",
    "compare": "compare",
    "quasimode": "quasimode",
    "heat-check": "heat",
}


def _summary(out, name, lines):
    text = "\n".join(lines) + "\n"
    (out / name).write_text(text)
    print(text, end="")


def _root(c, out, scan_only=False):
    from .complexode import mismatch_field, newton_tau, scan_lattice

    ft = c.find_tau
    if ft.tau0 is not None and not scan_only:
        return newton_tau(ft.tau0, ft.tol, ft.maxit, ft.z0, ft.steps)
    lattice = scan_lattice((ft.re_min, ft.re_max), (ft.im_min, ft.im_max), ft.scan_n)
    mags = mismatch_field(lattice, ft.z0, ft.steps)
    if scan_only:
        rows = [(t.real, t.imag, m) for t, m in zip(lattice.ravel(), mags.ravel())]
        write_csv(
            out / "scan.csv",
            ["re_tau", "im_tau", "abs_G"],
            rows,
            notes=[
                "Evans mismatch |G(tau)| on a uniform lattice; dimensionless",
                f"z0 = {ft.z0!r}, RK4 steps = {ft.steps}; inf marks lattice points on the singular path",
            ],
        )
        return None
    i = int(np.argmin(mags))
    return newton_tau(lattice.flat[i], ft.tol, ft.maxit, ft.z0, ft.steps, scale=float(mags.flat[i]))


def cmd_find_tau(c, out, scan_only=False):
    from .complexode import integral_X, integrate_backward
    from .shear_layer import decay_rate

    root = _root(c, out, scan_only)
    if root is None:
        print(f"wrote {out / 'scan.csv'}")
        return EXIT_OK
    traj = integrate_backward(root.tau, root.z0, root.steps)
    rep = integral_X(traj, c.find_tau.sc_floor)
    fit = decay_rate(traj.z_nodes, traj.X)
    write_csv(
        out / "tau.csv",
        ["re_tau", "im_tau", "residual", "abs_int_X", "decay_rate", "iterations"],
        [(root.tau.real, root.tau.imag, root.residual, rep.modulus, fit.rate, root.iterations)],
        notes=[
            "root of the Evans mismatch G(tau) = X'(0) for the decaying branch seeded with X(z0) = 1; dimensionless",
            "abs_int_X = |int_0^z0 X dz| (Simpson); decay_rate = slope of -log|X| / z^2 on z in [2, z0]",
        ],
    )
    _summary(
        out,
        "tau_summary.txt",
        [
            f"tau         = {root.tau.real:+.10f} {root.tau.imag:+.10f}i",
            f"|G(tau)|    = {root.residual:.3e} after {root.iterations} Newton steps",
            f"|int X|     = {rep.modulus:.6f} (floor {rep.floor:.3e})",
            f"decay rate  = {fit.rate:.4f}",
        ],
    )
    if rep.alarm:
        raise SCViolation("integral of X below the configured floor", modulus=rep.modulus, floor=rep.floor)
    return EXIT_OK


def cmd_spectrum(c, out):
    from .spectral_operator import alpha_to_tau, assemble, quadratic_form, top_eigenvalue

    sc = c.spectrum
    op = assemble(sc.Z, sc.N, sc.order)
    z = op.z_nodes
    q = quadratic_form(op, np.exp(-2 * z**2))
    q_exact = 439.0 / 512.0 * np.sqrt(np.pi)
    alpha, _ = top_eigenvalue(op)
    tau = alpha_to_tau(alpha)
    row = [sc.Z, sc.N, q, (q - q_exact) / q_exact, alpha, tau.real, tau.imag]
    cols = ["Z", "N", "quad_form", "quad_form_rel_err", "alpha", "re_tau", "im_tau"]
    lines = [
        f"(Au|u) for u = exp(-2 z^2): {q:.10f} (relative error {(q - q_exact) / q_exact:+.2e})",
        f"top eigenvalue alpha      : {alpha:.10f}",
        f"alpha_to_tau(alpha)       : {tau.real:+.10f} {tau.imag:+.10f}i",
    ]
    tau_csv = out / "tau.csv"
    if tau_csv.exists():
        _, cols_t, rows_t = read_csv(tau_csv)
        shoot = complex(rows_t[0][cols_t.index("re_tau")], rows_t[0][cols_t.index("im_tau")])
        row.append(abs(tau - shoot))
        cols.append("mismatch_vs_shooting")
        lines.append(f"|tau_spectral - tau_shoot|: {abs(tau - shoot):.3e}")
    write_csv(
        out / "spectrum.csv",
        cols,
        [row],
        notes=[
            "fourth-order weighted operator on [-Z, Z] with N cells; dimensionless",
            "tau = -sqrt(alpha / 2) (1 + i) from the top eigenvalue alpha",
        ],
    )
    _summary(out, "spectrum_summary.txt", lines)
    return EXIT_OK


def _sim_config(c, base_seed=None, N=None, L=None):
    from .prandtl_sim import SimConfig

    s = c.sweep
    return SimConfig(
        L=s.L if L is None else L,
        N=s.N if N is None else N,
        steps_per_efold=s.steps_per_efold,
        efolds=s.efolds,
        base_seed=s.base_seed if base_seed is None else base_seed,
        tol=s.tol,
    )


def cmd_sweep(c, out):
    from .prandtl_sim import sweep_k

    rows = sweep_k(sorted(c.sweep.k_list), _sim_config(c), threads=c.threads)
    cols = ["k", "re_omega", "im_omega", "re_rescaled", "im_rescaled", "spread_y", "spread_theta", "n_nodes", "dtheta", "wall_seconds"]
    write_csv(
        out / "sweep.csv",
        cols,
        [
            (r.k, r.omega.real, r.omega.imag, r.rescaled.real, r.rescaled.imag, r.spread_y, r.spread_theta, r.n_nodes, r.dtheta, r.wall_seconds)
            for r in rows
        ],
        notes=[
            "omega convention: log-ratio / (i dtheta), time variable theta = k t",
            "rescaled = (omega + U_s(a)) sqrt(k); eps = 1/k; wall_seconds varies between runs",
            f"base_seed = {c.sweep.base_seed}, per-k seed = base_seed xor k",
        ],
    )
    lines = [f"k={r.k:>9d}  rescaled={r.rescaled.real:+.5f} {r.rescaled.imag:+.5f}i  converged={r.converged}" + (f"  error={r.error}" if r.error else "") for r in rows]
    _summary(out, "sweep_summary.txt", lines)
    if c.emit_svg:
        fig, ax = figure(1, 2, figsize=(9, 3.5))
        ks = [r.k for r in rows]
        for a, part, lab in ((ax[0], np.real, "Re"), (ax[1], np.imag, "Im")):
            a.semilogx(ks, [part(r.rescaled) for r in rows], "o-", label="simulation")
            a.axhline(-0.92614, color="k", ls="--", label="asymptotic")
            a.set_xlabel("k")
            a.set_ylabel(f"{lab} of rescaled correction")
            a.legend()
        fig.tight_layout()
        save_svg(fig, out / "sweep.svg")
    if not all(r.converged for r in rows):
        raise ConvergenceError("sweep estimator did not converge for every k", k=[r.k for r in rows if not r.converged])
    return EXIT_OK


def _profile(c):
    from .complexode import default_root, integrate_backward, newton_tau
    from .shear_layer import build_heteroclinic, build_V

    ft = c.find_tau
    if ft.tau0 is not None:
        root = newton_tau(ft.tau0, ft.tol, ft.maxit, ft.z0, ft.steps)
    else:
        root = default_root(ft.z0, ft.steps)
    traj = integrate_backward(root.tau, root.z0, root.steps)
    return build_V(build_heteroclinic(root, traj, c.find_tau.sc_floor))


def cmd_compare(c, out):
    from .mode_compare import compare
    from .prandtl_sim import extract_mode, run_k

    cc = c.compare
    profile = _profile(c)
    k = int(round(1.0 / cc.epsilon))
    row, state, ops, est = run_k(k, _sim_config(c, N=cc.N, L=cc.L), return_state=True)
    mode = extract_mode(state)
    y_src = ops.grid.nodes
    flow = _sim_config(c).flow
    rep = compare(mode, y_src, flow, profile, 1.0 / k, cc.exclusion_widths, cc.inner_radius)
    for name, xname, note in (
        ("outer", "y", "outer correction (v / v(inf) - v_a / v_a(inf)) / sqrt(eps) against y"),
        ("inner", "z", "inner curve at y = a + eps^(1/4) z, regular part removed, divided by sqrt(eps)"),
    ):
        x, th, nu = rep.curves[name]
        write_csv(
            out / f"{name}.csv",
            [xname, "re_theory", "im_theory", "re_numeric", "im_numeric"],
            zip(x, th.real, th.imag, nu.real, nu.imag),
            notes=[note, f"eps = {rep.epsilon!r}; dimensionless"],
        )
        if c.emit_svg:
            fig, ax = figure(1, 2, figsize=(9, 3.5))
            for a, part, lab in ((ax[0], np.real, "Re"), (ax[1], np.imag, "Im")):
                a.plot(x, part(th), "k-", label="theory")
                a.plot(x, part(nu), "r--", label="simulation")
                a.set_xlabel(xname)
                a.set_title(f"{lab}, {name}")
                a.legend()
            fig.tight_layout()
            save_svg(fig, out / f"{name}.svg")
    write_csv(
        out / "compare.csv",
        ["epsilon", "outer_sup_err", "inner_sup_err", "exclusion_radius", "layer_width", "re_omega", "im_omega"],
        [(rep.epsilon, rep.outer_sup_err, rep.inner_sup_err, rep.exclusion_radius, rep.layer_width, row.omega.real, row.omega.imag)],
        notes=["relative sup mismatches sup|num - th| / sup|th|", "omega convention: log-ratio / (i dtheta)"],
    )
    _summary(
        out,
        "compare_summary.txt",
        [
            f"eps = {rep.epsilon:.1e}, layer width {rep.layer_width:.4f}, exclusion radius {rep.exclusion_radius:.4f}",
            f"outer relative sup mismatch: {rep.outer_sup_err:.4f}",
            f"inner relative sup mismatch: {rep.inner_sup_err:.4f}",
        ],
    )
    if not row.converged:
        raise ConvergenceError("growth-rate estimator did not converge", spread_y=row.spread_y, spread_theta=row.spread_theta)
    return EXIT_OK


def cmd_quasimode(c, out):
    from .baseflow import gaussian_shear_flow
    from .quasimode import Cutoff, growth_envelope, residual

    q = c.quasimode
    profile = _profile(c)
    flow = gaussian_shear_flow()
    cut = Cutoff(q.cutoff_inner, q.cutoff_outer)
    rows, lines = [], []
    for eps in q.eps_list:
        ts = np.linspace(0.0, q.t_span * np.sqrt(eps), q.n_times)
        env = growth_envelope(flow, profile, eps, ts, cutoff=cut, alpha_w=q.alpha_w)
        res = residual(flow, profile, eps, ts, cutoff=cut, alpha_w=q.alpha_w)
        rows += list(zip([eps] * len(ts), ts, env.norms, env.ratio, res.residual_norm, res.envelope_ratio))
        lines.append(f"eps={eps:.0e}  sandwich [{env.lower:.4f}, {env.upper:.4f}]  residual constant {res.constant:.4f}")
    write_csv(
        out / "envelope.csv",
        ["epsilon", "t", "norm_U", "ratio_U", "norm_R", "ratio_R"],
        rows,
        notes=[
            "norms: weighted sup with weight exp(alpha_w y), phase modulus restored",
            f"ratio_X = norm_X exp(-sigma0 t / sqrt(eps)), sigma0 = {res.sigma0!r}",
        ],
    )
    lines.append(f"sigma0 = {res.sigma0:.6f}")
    _summary(out, "quasimode_summary.txt", lines)
    return EXIT_OK


def cmd_heat_check(c, out):
    from .baseflow import gaussian_shear_flow
    from .heat_halfspace import growth_exponent, growth_table, manufactured_errors
    from .prandtl_sim import SimConfig, run_k

    hc = c.heat
    flow = gaussian_shear_flow()
    free, forced = manufactured_errors()
    tab = growth_table(hc.k_list, hc.table_times, flow, h=hc.table_h, dt=hc.table_dt)
    write_csv(
        out / "growth_table.csv",
        ["t"] + [f"log_norm_k{int(k)}" for k in tab.k_list] + ["r_squared", "slope"],
        [(t, *tab.log_growth[:, j], tab.r_squared[j], tab.slopes[j]) for j, t in enumerate(tab.times)],
        notes=[
            "log of the weighted sup operator norm of the mode-k propagator, weight exp(alpha y)",
            "r_squared and slope from a linear fit of log norm against k at fixed t",
            f"rho = max log_norm / (k t) = {tab.rho!r}",
        ],
    )
    k = hc.cross_k
    g_heat = growth_exponent(k, flow, hc.T, hc.dt, hc.L, hc.h)
    sim = run_k(k, SimConfig(growth_guess=g_heat / np.sqrt(k), base_seed=c.sweep.base_seed))
    g_sim = -sim.omega.imag * k
    mismatch = abs(g_sim - g_heat) / abs(g_heat)
    j = list(tab.times).index(hc.table_t)
    write_csv(
        out / "heat.csv",
        ["free_sup_err", "forced_sup_err", "r_squared_at_table_t", "rho", "growth_heat", "growth_sim", "cross_rel_mismatch"],
        [(free, forced, tab.r_squared[j], tab.rho, g_heat, g_sim, mismatch)],
        notes=[
            "manufactured solutions exp(-t) sin y and (1 - exp(-t)) sin y at t = 1, sup error",
            f"growth exponents per unit t at k = {k}; sim exponent = -Im(omega) k",
        ],
    )
    _summary(
        out,
        "heat_summary.txt",
        [
            f"manufactured sup errors: free {free:.2e}, forced {forced:.2e}",
            f"growth table R^2 at t={hc.table_t}: {tab.r_squared[j]:.4f}; rho = {tab.rho:.4f}",
            f"k={k}: heat {g_heat:.5f}, simulation {g_sim:.5f}, relative mismatch {mismatch:.2e}",
        ],
    )
    if not sim.converged:
        raise ConvergenceError("growth-rate estimator did not converge", k=k)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="key = value config file")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base seed for random initial data")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes for the sweep")
    common.add_argument("--svg", action="store_true", default=argparse.SUPPRESS, help="also write SVG plots")
    common.add_argument("--set", action="append", default=argparse.SUPPRESS, metavar="KEY=VALUE", help="override a config key")
    p = argparse.ArgumentParser(prog="prandtl-lab", parents=[common], description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "find-tau":
            sp.add_argument("--scan-only", action="store_true", help="write the |G| lattice scan and stop")
    return p


def _error_record(exc, command):
    if isinstance(exc, LabError):
        rec = dict(exc.record)
    else:
        rec = {"kind": type(exc).__name__, "message": str(exc)}
    rec["command"] = command
    return rec


def main(argv=None):
    args = build_parser().parse_args(argv)
    section = COMMANDS[args.command]
    out = Path(os.environ.get("PRANDTL_LAB_OUT") or getattr(args, "out", None) or "prandtl_lab_out")
    try:
        c = cfgmod.load(getattr(args, "config", None), getattr(args, "set", []) or [], section)
        if hasattr(args, "seed"):
            c.sweep.base_seed = args.seed
        if hasattr(args, "threads"):
            c.threads = args.threads
        if getattr(args, "svg", False):
            c.emit_svg = True
        c.output_dir = out
        c.validate(section)
    except (ValueError, OSError) as exc:
        print(f"prandtl-lab: {exc}", file=sys.stderr)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", {"kind": "ConfigError", "message": str(exc), "command": args.command, "exit_code": EXIT_INPUT})
        return EXIT_INPUT
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfgmod.dump(c))
    handler = {
        "find-tau": lambda: cmd_find_tau(c, out, getattr(args, "scan_only", False)),
        "spectrum": lambda: cmd_spectrum(c, out),
        "sweep": lambda: cmd_sweep(c, out),
        "compare": lambda: cmd_compare(c, out),
        "quasimode": lambda: cmd_quasimode(c, out),
        "heat-check": lambda: cmd_heat_check(c, out),
    }[args.command]
    t0 = time.perf_counter()
    try:
        code = handler()
    except SCViolation as exc:
        code, rec = EXIT_SC, _error_record(exc, args.command)
    except ConvergenceError as exc:
        code, rec = EXIT_NONCONVERGED, _error_record(exc, args.command)
    except (LabError, ValueError) as exc:
        code, rec = EXIT_INPUT, _error_record(exc, args.command)
    else:
        (out / "error.json").unlink(missing_ok=True)
        return code
    rec["exit_code"] = code
    rec["wall_seconds"] = time.perf_counter() - t0
    write_json(out / "error.json", rec)
    print(f"prandtl-lab {args.command}: {rec.get('message', '')} (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
