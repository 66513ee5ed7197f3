"""Command-line entry points: simulate | verify | fik.

Exit-code contract: 0 success, 2 usage error, 3 I/O error, 4 numerical
failure.
"""

import argparse
import datetime
import os
import sys

import numpy as np

from . import __version__, geometry, perturbation, soliton
from .flow import (
    FAILED_NONFINITE,
    FAILED_NONPOSITIVE,
    FlowConfig,
    FlowState,
    run,
)
from .grid import StaggeredGrid
from .run_io import (
    CheckpointError,
    TimeseriesWriter,
    fmt,
    read_checkpoint,
    write_checkpoint,
    write_manifest,
    write_snapshot,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cp2flow",
        description=(
            "Evolve unstable conformal perturbations of the round CP^2 metric "
            "by gauge-fixed Ricci flow and fingerprint the resulting local "
            "singularity."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the flow and write CSV/checkpoint output")
    sim.add_argument("--epsilon", type=float, default=0.1, help="perturbation amplitude in [0, 1/3)")
    sim.add_argument("--cells", type=int, default=2048, help="number of grid cells")
    sim.add_argument("--cfl", type=float, default=0.5, help="CFL safety factor in (0, 1]")
    sim.add_argument("--t-max", type=float, default=1.0 / 12.0, help="final time bound")
    sim.add_argument("--stop-inv-kappa", type=float, default=1e-6,
                     help="halt when fiber 1/kappa_23 falls to this value")
    sim.add_argument("--snapshot-every", type=int, default=200_000, help="steps between snapshots")
    sim.add_argument("--timeseries-every", type=int, default=500, help="steps between timeseries rows")
    sim.add_argument("--checkpoint-every", type=int, default=0,
                     help="minimum steps between restart checkpoints, written at "
                          "timeseries events (0: final checkpoint only)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--resume", default=None, help="checkpoint file to resume from")

    ver = sub.add_parser("verify", help="run the closed-form oracle self-tests")
    ver.add_argument("--cells", type=int, default=256, help="grid size for the discrete checks")

    fik = sub.add_parser("fik", help="integrate the blowdown-soliton profile ODE")
    fik.add_argument("--phi-end", type=float, default=1e6, help="integrate until phi reaches this value")
    fik.add_argument("--tol", type=float, default=1e-10, help="local error tolerance per unit r")
    fik.add_argument("--out", default=None, help="trajectory CSV path")

    return parser


def cmd_simulate(args):
    try:
        config = FlowConfig(
            epsilon=args.epsilon,
            n_cells=args.cells,
            cfl_safety=args.cfl,
            t_max=args.t_max,
            stop_inv_kappa=args.stop_inv_kappa,
            snapshot_every=args.snapshot_every,
            timeseries_every=args.timeseries_every,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    initial_state = None
    if args.resume is not None:
        try:
            cp = read_checkpoint(args.resume)
        except CheckpointError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        if cp.n_cells != config.n_cells or cp.epsilon != config.epsilon:
            print(
                "error: checkpoint (n_cells, epsilon) = "
                f"({cp.n_cells}, {cp.epsilon}) does not match flags "
                f"({config.n_cells}, {config.epsilon})",
                file=sys.stderr,
            )
            return EXIT_USAGE
        initial_state = cp.to_state()

    outdir = args.out
    try:
        os.makedirs(outdir, exist_ok=True)
        probe = os.path.join(outdir, ".writetest")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        print(f"error: cannot write to {outdir}: {exc}", file=sys.stderr)
        return EXIT_IO

    started = datetime.datetime.now(datetime.timezone.utc)
    inventory = []
    snap_count = 0
    cp_count = 0
    last_cp_step = None

    ts_writer = TimeseriesWriter(os.path.join(outdir, "timeseries.csv"))

    def on_snapshot(profile, diag):
        nonlocal snap_count, cp_count, last_cp_step
        name = f"snapshot_{snap_count:04d}.csv"
        write_snapshot(os.path.join(outdir, name), profile, diag)
        inventory.append(
            {
                "file": name,
                "kind": "snapshot",
                "step": diag.step_index,
                "t": diag.t,
                "inv_kappa23_fiber": diag.inv_kappa23_fiber,
            }
        )
        snap_count += 1
        if args.checkpoint_every > 0 and (
            last_cp_step is None or diag.step_index - last_cp_step >= args.checkpoint_every
        ):
            cname = f"checkpoint_{cp_count:04d}.txt"
            state = FlowState(t=diag.t, step_index=diag.step_index, profile=profile)
            write_checkpoint(os.path.join(outdir, cname), state, config.epsilon)
            inventory.append(
                {"file": cname, "kind": "checkpoint", "step": diag.step_index, "t": diag.t}
            )
            cp_count += 1
            last_cp_step = diag.step_index

    try:
        final_state = run(
            config,
            on_timeseries=ts_writer.write,
            on_snapshot=on_snapshot,
            initial_state=initial_state,
        )
    finally:
        ts_writer.close()

    write_checkpoint(os.path.join(outdir, "checkpoint_final.txt"), final_state, config.epsilon)
    inventory.append(
        {
            "file": "checkpoint_final.txt",
            "kind": "checkpoint",
            "step": final_state.step_index,
            "t": final_state.t,
        }
    )
    inventory.insert(0, {"file": "timeseries.csv", "kind": "timeseries", "rows": ts_writer.rows_written})

    from .flow import inv_kappa23_fiber

    ended = datetime.datetime.now(datetime.timezone.utc)
    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "started": started.isoformat(),
        "ended": ended.isoformat(),
        "final_status": final_state.status,
        "final_t": final_state.t,
        "final_step": final_state.step_index,
        "final_inv_kappa23_fiber": inv_kappa23_fiber(final_state.profile),
        "files": inventory,
    }
    write_manifest(os.path.join(outdir, "manifest.json"), manifest)

    print(
        f"status={final_state.status} t={fmt(final_state.t)} "
        f"steps={final_state.step_index} "
        f"inv_kappa23={fmt(manifest['final_inv_kappa23_fiber'])}"
    )
    if final_state.status in (FAILED_NONFINITE, FAILED_NONPOSITIVE):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args):
    n = args.cells
    checks = []

    def add(name, value, tol):
        checks.append((name, value, tol, abs(value) <= tol))

    i1, i3 = perturbation.volume_integral_checks(4096)
    add("mean integral of psi (n_quad=4096)", i1, 1e-8)
    add("cubed integral of psi - 2/5", i3 - 0.4, 1e-7)

    theta = np.linspace(0.01, np.pi / 2 - 0.01, 100)
    add("nullspace ODE residual (100 pts)", float(np.max(np.abs(perturbation.nullspace_residual(theta)))), 1e-10)

    grid = StaggeredGrid(n)
    params0 = perturbation.PerturbationParams(0.0)
    jet_fs = perturbation.initial_profile_jet(params0, grid.theta)
    r00, r11, r22 = geometry.ricci_diagonal(geometry.sectional_curvatures(jet_fs))
    einstein_err = max(
        float(np.max(np.abs(r00 - 6.0))),
        float(np.max(np.abs(r11 - 6.0))),
        float(np.max(np.abs(r22 - 6.0))),
    )
    add(f"Einstein check, closed-form derivatives (n={n})", einstein_err, 1e-10)

    # discrete-derivative convergence on the perturbed data, against the
    # closed-form route
    params = perturbation.PerturbationParams(0.1)

    def fd_ricci_error(m):
        g = StaggeredGrid(m)
        abc, _ = perturbation.initial_profiles(params, g)
        exact = geometry.ricci_diagonal(
            geometry.sectional_curvatures(perturbation.initial_profile_jet(params, g.theta))
        )
        approx = geometry.ricci_diagonal(geometry.sectional_curvatures(geometry.fd_jet(abc)))
        return max(float(np.max(np.abs(e - a))) for e, a in zip(exact, approx))

    ratio = fd_ricci_error(n) / fd_ricci_error(2 * n)
    add(f"FD Ricci convergence ratio (n={n} vs {2 * n}) - 4", ratio - 4.0, 0.6)

    jet_pert = perturbation.initial_profile_jet(params, grid.theta)
    h = perturbation.conformal_factor(params, grid.theta)
    v_closed = 12.0 * params.epsilon * np.sin(2.0 * grid.theta) / h**3
    add(
        "gauge vector vs closed form (eps=0.1)",
        float(np.max(np.abs(geometry.deturck_v(jet_pert) - v_closed))),
        1e-10,
    )
    add(
        "gauge vector on round profiles",
        float(np.max(np.abs(geometry.deturck_v(jet_fs)))),
        1e-12,
    )

    th = grid.theta
    chr_fs = geometry.radial_christoffels(jet_fs)
    err_fs = max(
        float(np.max(np.abs(chr_fs.gamma00))),
        float(np.max(np.abs(chr_fs.gamma11 + 0.25 * np.sin(4.0 * th)))),
        float(np.max(np.abs(chr_fs.gamma22 + 0.5 * np.sin(2.0 * th)))),
    )
    add("round connection vs closed form", err_fs, 1e-10)

    eps = params.epsilon
    chr_p = geometry.radial_christoffels(jet_pert)
    g00 = -6.0 * eps * np.sin(2.0 * th) / h
    g11 = -np.sin(2.0 * th) * (np.cos(2.0 * th) + 3.0 * eps * np.cos(4.0 * th)) / (2.0 * h)
    g22 = -np.sin(th) * np.cos(th) * (1.0 - 6.0 * eps + 9.0 * eps * np.cos(2.0 * th)) / h
    err_pert = max(
        float(np.max(np.abs(chr_p.gamma00 - g00))),
        float(np.max(np.abs(chr_p.gamma11 - g11))),
        float(np.max(np.abs(chr_p.gamma22 - g22))),
    )
    add("perturbed connection vs closed form", err_pert, 1e-10)

    add(
        "Kahler ratio on round profiles - 1",
        float(np.max(np.abs(geometry.kahler_ratio(jet_fs) - 1.0))),
        1e-12,
    )

    rng = np.random.default_rng(7)
    coeffs = rng.uniform(-0.2, 0.2, size=(3, 3))
    basis = np.stack([np.cos(2.0 * k * grid.theta) for k in range(3)])
    abc_rand = geometry.ProfileABC(grid, *(coeffs @ basis))
    rfg1 = geometry.abc_to_rfg(abc_rand)
    rfg2 = geometry.abc_to_rfg(geometry.rfg_to_abc(rfg1))
    rt_err = max(
        float(np.max(np.abs(rfg2.rho / rfg1.rho - 1.0))),
        float(np.max(np.abs(rfg2.f / rfg1.f - 1.0))),
        float(np.max(np.abs(rfg2.g / rfg1.g - 1.0))),
    )
    add("representation round trip (relative)", rt_err, 1e-12)

    width = max(len(name) for name, *_ in checks)
    all_ok = True
    for name, value, tol, ok in checks:
        all_ok &= ok
        print(f"{name:<{width}}  {value: .3e}  (tol {tol:.0e})  {'PASS' if ok else 'FAIL'}")
    print("verify:", "all checks passed" if all_ok else "FAILURES present")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def cmd_fik(args):
    try:
        traj = soliton.integrate_profile(1.0 + 1e-6, args.phi_end, args.tol)
    except (ValueError, soliton.SolitonIntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    ratio = traj.phi_r / traj.phi
    drift = traj.invariant_drift()
    if args.out is not None:
        try:
            with open(args.out, "w") as fh:
                fh.write("r,phi,phi_r,phi_r_over_phi,invariant_drift\n")
                for i in range(len(traj.r)):
                    fh.write(
                        ",".join(
                            fmt(x)
                            for x in (traj.r[i], traj.phi[i], traj.phi_r[i], ratio[i], drift[i])
                        )
                        + "\n"
                    )
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    target = 1.0 / np.sqrt(2.0)
    print(f"samples: {len(traj.r)}")
    print(f"final phi: {fmt(traj.phi[-1])}")
    print(f"asymptotic phi_r/phi: {fmt(ratio[-1])}")
    print(f"gap to 1/sqrt(2): {fmt(ratio[-1] - target)}")
    print(f"max invariant drift: {fmt(float(np.max(np.abs(drift))))}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "simulate":
        return cmd_simulate(args)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "fik":
        return cmd_fik(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
