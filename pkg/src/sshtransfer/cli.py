"""Command-line front end.

Each subcommand writes one data file (CSV or JSON) and, for CSV, a
``<out>.provenance.json`` sidecar holding the fully resolved configuration.
``sshtransfer rerun <provenance.json> --out <path>`` replays a run from it.

Exit codes: 0 success, 1 usage or parameter error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .dynamics import DEFAULT_DT, EvolutionConfig
from .edgestates import edge_energies
from .ensemble import EnsembleSpec, collapse_axis, default_w_grid, default_workers, gap_scan, run_ensemble
from .errors import ContractError, ConvergenceError, IntegrationError
from .hamiltonian import bulk_edge_gap, hamiltonian_for, spectrum_sweep
from .model import ChainSpec, RampSchedule, sample_disorder
from .protocols import fidelity, protocol_endpoints, transfer_p2, transfer_p3

log = logging.getLogger("sshtransfer")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

# flags that never change the numbers and so stay out of provenance
_NON_PROVENANCE = {"command", "out", "config", "workers", "trajectory_out", "verbose", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """Round-trip float formatting (17 significant digits)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + ".provenance.json")


def provenance(args: argparse.Namespace, **extra) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NON_PROVENANCE}
    out = {
        "tool": "sshtransfer",
        "version": __version__,
        "backend": kernels.BACKEND,
        "command": args.command,
        "config": cfg,
        "units": "energies in g1, times in 1/g1 (hbar = 1)",
    }
    out.update(extra)
    return out


def physical_block(args, **quantities) -> dict | None:
    """Unit conversion only, g1 = 2 pi * g1_mhz MHz; never feeds back into the numbers."""
    if not getattr(args, "physical", False):
        return None
    g1 = 2 * math.pi * args.g1_mhz * 1e6  # rad/s
    out = {"g1_over_2pi_mhz": args.g1_mhz}
    for name, (value, kind) in quantities.items():
        if value is None:
            continue
        if kind == "time":
            out[name + "_s"] = value / g1
            out[name + "_us"] = value / g1 * 1e6
        else:
            out[name + "_over_2pi_mhz"] = value * args.g1_mhz
    return out


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _chain(args) -> ChainSpec:
    g0 = args.g0
    if g0 is None:
        g0 = 1.0 if args.p == 2 else 0.0
    return ChainSpec(args.p, args.qubits, g0, args.g1)


def _protocol(p: int) -> str:
    if p not in (2, 3):
        raise ContractError(f"transfer protocols exist for p=2 and p=3, got p={p}")
    return f"p{p}"


def _warn_margin(margin: float, qubits: int, omega: float) -> None:
    if margin >= 1.0:
        log.warning(
            "adiabatic margin sqrt(g1*omega)/gap = %.3f >= 1 for M=%d, omega=%g; transfer may not be adiabatic",
            margin, qubits, omega,
        )


# ---------------------------------------------------------------- commands


def cmd_spectrum(args) -> None:
    chain = _chain(args)
    grid = np.linspace(args.theta_min, args.theta_max, args.theta_steps)
    disorder = None
    if args.disorder_w > 0:
        disorder = sample_disorder(args.disorder_w, chain.bonds, args.seed)
    spectra = spectrum_sweep(chain, grid, disorder)
    out = Path(args.out)
    header = ["theta"] + [f"e_{k}" for k in range(1, chain.qubits + 1)]
    write_csv(out, header, ([th, *s.eigenvalues] for th, s in zip(grid, spectra)))
    extra = {}
    if disorder is not None:
        extra["disorder_offsets"] = [float(x) for x in disorder.offsets]
    write_json(sidecar_path(out), provenance(args, **extra))


def cmd_transfer(args) -> None:
    chain = _chain(args)
    protocol = _protocol(args.p)
    disorder = None
    if args.disorder_w > 0:
        disorder = sample_disorder(args.disorder_w, chain.bonds, args.seed)
    cfg = EvolutionConfig(dt=args.dt, record_every=args.record_every,
                          convergence_check=not args.no_convergence_check)
    if protocol == "p2":
        sup = None if args.alpha is None else (args.alpha, args.beta if args.beta is not None else 0.0)
        report = transfer_p2(chain, args.omega, disorder, cfg, superposition=sup)
    else:
        report = transfer_p3(chain, args.omega, args.branch, disorder, cfg)
    _warn_margin(report.adiabatic_margin, chain.qubits, args.omega)
    payload = report.to_dict()
    if disorder is not None:
        payload["disorder_offsets"] = [float(x) for x in disorder.offsets]
    payload["physical"] = physical_block(
        args, t_final=(report.t_final, "time"), omega=(report.omega, "energy"), gap=(report.gap, "energy")
    )
    payload["provenance"] = provenance(args)
    write_json(Path(args.out), payload)

    if args.trajectory_out:
        _, target, (lo, _) = protocol_endpoints(chain, protocol, args.branch)
        schedule = RampSchedule.sweep(lo, lo + report.omega * report.t_final, report.omega)
        rows = []
        for t, psi in zip(report.trajectory.times, report.trajectory.states):
            t = min(t, schedule.t_final)
            th = schedule.theta(t)
            h = hamiltonian_for(chain, th, disorder)
            rows.append([t, th, psi.norm(), fidelity(target, psi), h.expectation(psi)])
        write_csv(Path(args.trajectory_out),
                  ["t", "theta", "norm", "fidelity_to_target", "edge_energy_expectation"], rows)


def _w_grid(args, protocol: str) -> list[float]:
    w_max = args.w_max
    if w_max is None:
        w_max = default_w_grid(protocol)[-1]
    if args.w_steps < 1:
        raise ContractError("--w-steps must be >= 1")
    if args.w_steps == 1:
        return [float(args.w_min)]
    return [float(w) for w in np.linspace(args.w_min, w_max, args.w_steps)]


def cmd_ensemble(args) -> None:
    chain = _chain(args)
    protocol = _protocol(args.p)
    spec = EnsembleSpec(protocol, chain, args.omega, tuple(_w_grid(args, protocol)),
                        args.samples, args.master_seed, args.branch, args.dt)
    result = run_ensemble(spec, workers=args.workers)
    margin = math.sqrt(chain.g1 * args.omega) / result.gap
    _warn_margin(margin, chain.qubits, args.omega)
    out = Path(args.out)
    write_csv(out, ["w", "mean_fidelity", "std_dev"],
              ([pt.w, pt.mean_fidelity, pt.std_dev] for pt in result.points))
    extra = {
        "ensemble": result.provenance,
        "adiabatic_margin": margin,
        "physical": physical_block(args, gap=(result.gap, "energy"), omega=(args.omega, "energy")),
    }
    write_json(sidecar_path(out), provenance(args, **extra))


def cmd_gap_scan(args) -> None:
    g0 = args.g0
    rows, errors = [], {}
    for m in _ints(args.qubits_list):
        try:
            [(_, gap)] = gap_scan(args.p, [m], grid_points=args.theta_steps, g0=g0)
            rows.append([m, gap])
        except ContractError as exc:
            log.error("M=%d: %s", m, exc)
            errors[str(m)] = str(exc)
            rows.append([m, "nan"])
    out = Path(args.out)
    write_csv(out, ["qubits", "gap"], rows)
    write_json(sidecar_path(out), provenance(args, errors=errors))


def cmd_collapse(args) -> None:
    protocol = _protocol(args.p)
    sizes = _ints(args.qubits_list)
    omegas = _floats(args.omega_list)
    if len(omegas) == 1:
        omegas = omegas * len(sizes)
    if len(omegas) != len(sizes):
        raise ContractError("--omega-list must have one entry or one per size")
    rows, gaps, skipped = [], {}, 0
    for m, om in zip(sizes, omegas):
        g0 = args.g0 if args.g0 is not None else (1.0 if args.p == 2 else 0.0)
        chain = ChainSpec(args.p, m, g0, args.g1)
        gap = bulk_edge_gap(chain)
        gaps[str(m)] = gap
        if args.x_steps:
            xs = np.linspace(args.x_min, args.x_max, args.x_steps)
            grid = [float(gap * 10.0**x) for x in xs]
        else:
            grid = _w_grid(args, protocol)
        spec = EnsembleSpec(protocol, chain, om, tuple(grid), args.samples, args.master_seed, args.branch, args.dt)
        result = run_ensemble(spec, workers=args.workers, gap=gap)
        skipped += sum(1 for pt in result.points if pt.w == 0)
        rows.extend([m, x, f] for x, f in collapse_axis(result))
    if skipped:
        log.info("skipped %d W=0 point(s): lg(W/gap) is undefined there", skipped)
    out = Path(args.out)
    write_csv(out, ["qubits", "lg_w_over_gap", "mean_fidelity"], rows)
    write_json(sidecar_path(out), provenance(args, gaps=gaps, skipped_w0_points=skipped))


# chain sizes and ramp rates per figure
FIG2B = [(9, 0.04), (15, 0.02), (21, 0.01)]
FIG3B = [(8, 0.01), (14, 0.004), (20, 0.001)]


def cmd_reproduce(args) -> None:
    root = Path(args.out) / time.strftime("reproduce-%Y%m%d-%H%M%S")
    root.mkdir(parents=True, exist_ok=False)
    fig2b = FIG2B[:1] if args.quick else FIG2B
    fig3b = FIG3B[:1] if args.quick else FIG3B
    common = ["--samples", str(args.samples), "--w-steps", str(args.w_steps),
              "--master-seed", str(args.master_seed), "--workers", str(args.workers)]
    jobs = [
        ("fig2a", ["spectrum", "--p", "2", "--qubits", "9", "--g0", "1", "--theta-max", str(2 * math.pi)]),
        ("fig2c", ["spectrum", "--p", "2", "--qubits", "9", "--g0", "1", "--theta-max", str(2 * math.pi),
                   "--disorder-w", "0.6", "--seed", "7"]),
        ("fig2d", ["spectrum", "--p", "2", "--qubits", "9", "--g0", "1", "--theta-max", str(2 * math.pi),
                   "--disorder-w", "0.8", "--seed", "7"]),
        ("fig3a", ["spectrum", "--p", "3", "--qubits", "8", "--g0", "0", "--theta-max", str(2 * math.pi)]),
        ("fig4a_p2", ["gap-scan", "--p", "2", "--qubits-list", "9,15,21,31,41,51"]),
        ("fig4a_p3", ["gap-scan", "--p", "3", "--qubits-list", "8,14,20,26,32"]),
    ]
    for m, om in fig2b:
        jobs.append((f"fig2b_M{m}", ["ensemble", "--p", "2", "--qubits", str(m), "--omega", str(om), *common]))
    for m, om in fig3b:
        jobs.append((f"fig3b_M{m}", ["ensemble", "--p", "3", "--qubits", str(m), "--omega", str(om), *common]))
    for p, sizes in ((2, fig2b), (3, fig3b)):
        jobs.append((f"fig4b_p{p}", [
            "collapse", "--p", str(p),
            "--qubits-list", ",".join(str(m) for m, _ in sizes),
            "--omega-list", ",".join(str(o) for _, o in sizes),
            "--x-min", "-2", "--x-max", "0.5", "--x-steps", str(max(args.w_steps, 2)), *common,
        ]))
    for name, argv in jobs:
        log.info("reproduce: %s", name)
        code = main([*argv, "--out", str(root / f"{name}.csv")])
        if code != EXIT_OK:
            raise UsageError(f"reproduce step {name} failed with exit code {code}")
    print(root)


def cmd_rerun(args) -> None:
    with open(args.provenance) as fh:
        prov = json.load(fh)
    if "provenance" in prov:  # transfer reports embed it
        prov = prov["provenance"]
    argv = provenance_to_argv(prov)
    code = main([*argv, "--out", args.out])
    if code != EXIT_OK:
        raise UsageError(f"rerun failed with exit code {code}")


def provenance_to_argv(prov: dict) -> list[str]:
    argv = [prov["command"]]
    for key, value in prov["config"].items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif value is None:
            continue
        else:
            argv += [flag, value if isinstance(value, str) else repr(value)]
    return argv


# ---------------------------------------------------------------- parser


def _add_chain(sp, need_qubits=True):
    sp.add_argument("--p", type=int, required=True, help="unit-cell period")
    if need_qubits:
        sp.add_argument("--qubits", type=int, required=True, help="total qubit count M")
    sp.add_argument("--g0", type=float, default=None, help="coupling offset (default 1 for p=2, 0 for p=3)")
    sp.add_argument("--g1", type=float, default=1.0, help="coupling amplitude (energy unit)")


def _add_common(sp):
    sp.add_argument("--out", required=True, help="output file")
    sp.add_argument("--config", help="flat key = value file; command-line flags override it")
    sp.add_argument("--physical", action="store_true", help="annotate outputs in seconds / MHz")
    sp.add_argument("--g1-mhz", type=float, default=250.0, help="g1/2pi in MHz for --physical")
    sp.add_argument("-v", "--verbose", action="store_true")


def _add_ensemble_flags(sp):
    sp.add_argument("--w-min", type=float, default=0.0)
    sp.add_argument("--w-max", type=float, default=None, help="default 1.0 (p=2) or 0.5 (p=3)")
    sp.add_argument("--w-steps", type=int, default=21)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--master-seed", type=int, default=0)
    sp.add_argument("--branch", choices=("plus", "minus"), default="plus")
    sp.add_argument("--dt", type=float, default=DEFAULT_DT)
    sp.add_argument("--workers", type=int, default=default_workers())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sshtransfer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", help="eigenvalues vs theta")
    _add_chain(sp)
    sp.add_argument("--theta-min", type=float, default=0.0)
    sp.add_argument("--theta-max", type=float, default=2 * math.pi)
    sp.add_argument("--theta-steps", type=int, default=200)
    sp.add_argument("--disorder-w", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("transfer", help="one adiabatic transfer run")
    _add_chain(sp)
    sp.add_argument("--omega", type=float, required=True)
    sp.add_argument("--branch", choices=("plus", "minus"), default="plus")
    sp.add_argument("--disorder-w", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=DEFAULT_DT)
    sp.add_argument("--record-every", type=int, default=0)
    sp.add_argument("--trajectory-out", default=None, help="trajectory CSV path (needs --record-every)")
    sp.add_argument("--no-convergence-check", action="store_true", help="skip the dt/2 rerun")
    sp.add_argument("--alpha", type=float, default=None, help="p=2: also transfer alpha|e>+beta|g>")
    sp.add_argument("--beta", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("ensemble", help="disorder-averaged fidelity vs W")
    _add_chain(sp)
    sp.add_argument("--omega", type=float, required=True)
    _add_ensemble_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("gap-scan", help="bulk-edge gap vs qubit count")
    _add_chain(sp, need_qubits=False)
    sp.add_argument("--qubits-list", required=True, help="comma-separated qubit counts")
    sp.add_argument("--theta-steps", type=int, default=201)
    _add_common(sp)
    sp.set_defaults(func=cmd_gap_scan)

    sp = sub.add_parser("collapse", help="fidelity vs lg(W/gap) for several chain sizes")
    _add_chain(sp, need_qubits=False)
    sp.add_argument("--qubits-list", required=True)
    sp.add_argument("--omega-list", required=True, help="one ramp rate, or one per size")
    sp.add_argument("--x-min", type=float, default=-2.0)
    sp.add_argument("--x-max", type=float, default=0.5)
    sp.add_argument("--x-steps", type=int, default=0,
                    help="if > 0, use W = gap * 10**x on this grid instead of the --w-* grid")
    _add_ensemble_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_collapse)

    sp = sub.add_parser("reproduce", help="run the whole figure suite")
    sp.add_argument("--out", required=True, help="parent directory; a timestamped subdirectory is created")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--w-steps", type=int, default=21)
    sp.add_argument("--master-seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=default_workers())
    sp.add_argument("--quick", action="store_true", help="smallest chain per figure only")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.add_argument("--config", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("rerun", help="replay a run from its provenance block")
    sp.add_argument("provenance", help="a .provenance.json sidecar or transfer report")
    sp.add_argument("--out", required=True)
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.add_argument("--config", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_rerun)
    return parser


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into flags (``true``/``false`` toggle switches)."""
    argv = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "yes", "on"):
                argv.append(flag)
            elif value.lower() in ("false", "no", "off"):
                continue
            else:
                argv += [flag, value]
    return argv


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    # file values go first so explicit flags win
    return rest[:1] + read_config(path) + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (UsageError, OSError) as exc:
        print(f"sshtransfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (ConvergenceError, IntegrationError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ContractError, UsageError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
