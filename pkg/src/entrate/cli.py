"""Command-line front end.

Subcommands: spectrum, entanglement, rate, stability, sweep, verify,
pair-rate, wannier-check. Output is CSV (schema-versioned header comment,
17-significant-digit floats, deterministic row order) or JSON via
--format json. Exit codes: 0 ok, 1 verification/physics failure, 2 usage
error. All frequencies and rates are in units of kappa.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, closedforms, models, rates, scattering, verify, wannier
from .errors import EntrateError, UnstableSystemError
from .sweep import (CSV_SCHEMA_LINE, SweepAxis, SweepConfig, format_float,
                    run_sweep)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("full", "effective"), default="full")
    p.add_argument("--g", type=float, default=5.0, help="coupling rate [kappa]")
    p.add_argument("--kappa", type=float, default=1.0, help="optical decay (the unit)")
    p.add_argument("--gamma", type=float, default=1e-3,
                   help="mechanical damping [kappa] (full model)")
    p.add_argument("--delta", type=float, default=0.0,
                   help="frequency mismatch delta [kappa]")
    p.add_argument("--Delta", type=float, default=0.0, help="laser detuning [kappa]")
    p.add_argument("--nth", type=float, default=0.0,
                   help="mechanical thermal occupation (full model)")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega-min", type=float, default=-15.0)
    p.add_argument("--omega-max", type=float, default=15.0)
    p.add_argument("--omega-steps", type=int, default=601)


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _build_drift(args) -> tuple[models.DriftMatrix, float]:
    if args.model == "full":
        params = models.FullModelParams(g=args.g, Gamma=args.gamma, kappa=args.kappa,
                                        Delta=args.Delta, delta=args.delta,
                                        n_th=args.nth)
        return models.drift_full(params), args.nth
    params = models.EffectiveModelParams(g=args.g, delta=args.delta,
                                         kappa=args.kappa, Delta=args.Delta)
    return models.drift_effective(params), 0.0


def _open_output(args):
    if args.output:
        return open(args.output, "w", encoding="utf-8", newline="\n")
    return sys.stdout


def _emit(args, header: list[str], rows: list[list[float | str]]) -> None:
    fh = _open_output(args)
    try:
        if args.format == "json":
            doc = [dict(zip(header, row)) for row in rows]
            json.dump(doc, fh, indent=2, default=float)
            fh.write("\n")
        else:
            fh.write(CSV_SCHEMA_LINE + "\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(
                    c if isinstance(c, str) else format_float(c) for c in row) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _require_stable_or_exit(drift: models.DriftMatrix) -> None:
    rep = models.stability(drift)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)


def cmd_spectrum(args) -> int:
    drift, n_th = _build_drift(args)
    _require_stable_or_exit(drift)
    omegas = np.linspace(args.omega_min, args.omega_max, args.omega_steps)
    e_vals = rates.spectral_density_batch(drift, omegas, n_th)
    rows = []
    for w, e in zip(omegas, e_vals):
        pt = scattering.output_spectrum(drift, float(w), n_th)
        rows.append([pt.omega, pt.total, pt.optical_part, pt.mechanical_part, float(e)])
    _emit(args, ["omega [kappa]", "total", "optical", "mechanical", "E"], rows)
    return 0


def cmd_entanglement(args) -> int:
    drift, n_th = _build_drift(args)
    _require_stable_or_exit(drift)
    omegas = np.linspace(args.omega_min, args.omega_max, args.omega_steps)
    e_vals = rates.spectral_density_batch(drift, omegas, n_th)
    rows = [[float(w), float(e)] for w, e in zip(omegas, e_vals)]
    _emit(args, ["omega [kappa]", "E"], rows)
    return 0


def cmd_rate(args) -> int:
    drift, n_th = _build_drift(args)
    rr = rates.entanglement_rate(drift, n_th=n_th, tol=args.tol)
    _emit(args, ["gamma_E [kappa]", "E_max", "omega_max [kappa]", "fwhm [kappa]",
                 "quadrature_error [kappa]", "secondary_peaks"],
          [[rr.gamma_E, rr.E_max, rr.omega_max, rr.fwhm, rr.quadrature_error,
            float(rr.secondary_peaks)]])
    return 0


def cmd_stability(args) -> int:
    drift, _ = _build_drift(args)
    rep = models.stability(drift)
    row: list[float | str] = [1.0 if rep.stable else 0.0, rep.max_real_part,
                              1.0 if rep.marginal else 0.0]
    header = ["stable", "max_real_part [kappa]", "marginal"]
    if args.model == "effective":
        roots = models.stability_boundary_effective(args.g, args.kappa, args.delta)
        header += ["boundary_root_1 [kappa]", "boundary_root_2 [kappa]"]
        row += [roots[0] if roots else float("nan"),
                roots[1] if roots else float("nan")]
    _emit(args, header, [row])
    return 0


def cmd_pair_rate(args) -> int:
    params = models.EffectiveModelParams(g=args.g, delta=args.delta,
                                         kappa=args.kappa, Delta=args.Delta)
    numeric = scattering.pair_rate_numeric(params)
    closed = closedforms.pair_rate_closed(args.g, args.kappa, args.delta, args.Delta)
    rel = abs(numeric - closed) / abs(closed) if closed else 0.0
    _emit(args, ["numeric [kappa]", "closed_form [kappa]", "rel_deviation"],
          [[numeric, closed, rel]])
    return 0


def cmd_wannier_check(args) -> int:
    rows = []
    ok = True
    l_values = range(args.M) if args.l is None else [args.l]
    for l in l_values:
        partial = wannier.kernel_normalization(args.M, l, args.cutoff)
        bound = wannier.kernel_tail_bound(args.M, args.cutoff)
        gap = abs(1.0 - partial)
        ok = ok and gap <= bound
        rows.append([float(args.M), float(l), partial, gap, bound,
                     "ok" if gap <= bound else "fail"])
    _emit(args, ["M", "l", "partial_sum", "deviation", "tail_bound", "status"], rows)
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    if args.config:
        config = SweepConfig.from_json(args.config)
    else:
        if not args.axis:
            print("sweep requires --config or at least one --axis", file=sys.stderr)
            return 2
        config = SweepConfig(
            model=args.model,
            fixed={"g": args.g, "kappa": args.kappa, "Gamma": args.gamma,
                   "Delta": args.Delta, "delta": args.delta, "n_th": args.nth},
            axes=[_parse_axis(s) for s in args.axis],
            quantities=args.quantity or ["gamma_E"],
            tol=args.tol)
    # flags override config values of the same name
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.output is not None:
        config.output = args.output
    result = run_sweep(config)
    fh = open(config.output, "w", encoding="utf-8", newline="\n") \
        if config.output else sys.stdout
    try:
        if args.format == "json":
            doc = [dict(zip([*result.header(), "status"],
                            [*row.axis_values,
                             *[row.values.get(c, float("nan"))
                               for c in result.columns()
                               if c not in {a.name for a in config.axes}],
                             row.status]))
                   for row in result.rows]
            json.dump(doc, fh, indent=2, default=float)
            fh.write("\n")
        else:
            result.write_csv(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _parse_axis(raw: str) -> SweepAxis:
    parts = raw.split(":")
    if len(parts) not in (4, 5):
        raise ValueError(f"axis must be name:min:max:steps[:log], got {raw!r}")
    log = len(parts) == 5 and parts[4] == "log"
    return SweepAxis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), log)


def cmd_verify(args) -> int:
    names = None
    if args.only:
        names = [n for n in verify.CHECKS if args.only in n]
        if not names:
            print(f"no checks match {args.only!r}", file=sys.stderr)
            return 2
    results = verify.run_checks(names, jobs=args.jobs if args.jobs is not None else 0)
    if args.format == "json":
        fh = _open_output(args)
        try:
            json.dump([r.to_dict() for r in results], fh, indent=2)
            fh.write("\n")
        finally:
            if fh is not sys.stdout:
                fh.close()
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status}  {r.name:<26s} measured={r.measured:.3e} "
                  f"tol={r.tolerance:.3e} time={r.seconds:.2f}s  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    if n_fail:
        print(f"{n_fail} of {len(results)} checks failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrate",
        description="Entanglement rates and spectra of Gaussian beams from "
                    "linear bosonic networks (all rates in units of kappa).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="output intensity spectrum and E[omega]")
    _add_model_flags(p); _add_grid_flags(p); _add_io_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("entanglement", help="spectral density of entanglement E[omega]")
    _add_model_flags(p); _add_grid_flags(p); _add_io_flags(p)
    p.set_defaults(func=cmd_entanglement)

    p = sub.add_parser("rate", help="total entanglement rate and peak statistics")
    _add_model_flags(p); _add_io_flags(p)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="absolute quadrature tolerance on gamma_E [kappa]")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("stability", help="drift eigenvalue stability report")
    _add_model_flags(p); _add_io_flags(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("pair-rate", help="effective-model photon pair rate")
    _add_model_flags(p); _add_io_flags(p)
    p.set_defaults(func=cmd_pair_rate)

    p = sub.add_parser("wannier-check", help="coarse-graining kernel normalization")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--cutoff", type=int, default=wannier.DEFAULT_CUTOFF)
    _add_io_flags(p)
    p.set_defaults(func=cmd_wannier_check)

    p = sub.add_parser("sweep", help="grid sweep over model parameters")
    _add_model_flags(p); _add_io_flags(p)
    p.add_argument("--config", default=None, help="JSON sweep configuration")
    p.add_argument("--axis", action="append", default=None,
                   metavar="name:min:max:steps[:log]")
    p.add_argument("--quantity", action="append", default=None,
                   choices=("stability_margin", "E_max", "gamma_E", "fwhm",
                            "pair_rate", "spectrum"))
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (0 = all cores)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle cross-check suite")
    _add_io_flags(p)
    p.add_argument("--only", default=None, help="substring filter on check names")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EntrateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
