"""Command-line front end: ``nlqm simulate | sweep | verify | estimate``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import scenarios
from .config import ConfigError, bundled_config, load, parse_sweep_values
from .dynamics import COLUMNS, TrajectoryRecord

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4
SUMMARY_COLUMNS = ("status", "blocked", "max_D_N", "max_E_nl", "budget", "bound_ok")


def _num(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_trajectory(rec: TrajectoryRecord, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rec.rows():
            w.writerow([_num(v) for v in row])


def _write_table(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def write_plot(rec: TrajectoryRecord, path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "nlqm"
    t = rec.column("t")
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    ax1.plot(t, rec.column("D_N"))
    ax1.set_ylabel("D_N")
    ax1.set_title(title)
    ax2.plot(t, rec.column("E_nl"))
    ax2.set_ylabel("E_nl")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _err(msg: str) -> None:
    print(f"nlqm: {msg}", file=sys.stderr)


def _resolve_config(arg: str) -> Path:
    p = Path(arg)
    if p.exists() or p.suffix:
        return p
    return bundled_config(arg)


def _load(args):
    out = Path(args.out)
    rc = load(_resolve_config(args.config), natural=args.natural_units, out_dir=out)
    out.mkdir(parents=True, exist_ok=True)
    return rc


def _summary(rec: TrajectoryRecord, status: str, extra=None) -> list:
    extra = extra or {}
    return [
        status,
        extra.get("blocked", ""),
        float(np.nanmax(rec.column("D_N"))),
        float(np.nanmax(rec.column("E_nl"))),
        extra.get("budget", ""),
        extra.get("bound_ok", ""),
    ]


def cmd_simulate(args) -> int:
    rc = _load(args)
    cfg = rc.scenario
    extra = {}
    if cfg.kind == "double_well":
        rep = scenarios.double_well_run(cfg)
        rec, status = rep.record, rep.status
        extra = {"blocked": rep.blocked, "budget": rep.budget, "bound_ok": rep.bound_ok}
    elif cfg.kind == "stern_gerlach":
        rep = scenarios.stern_gerlach_run(cfg)
        rec, status = rep.record, rep.status
        if status == "aborted_edge":
            rec.message = rep.message
        _write_table(rc.out_dir / "populations.csv", ("t", "p_plus", "p_minus"),
                     [(t, *p) for t, p in zip(rep.times, rep.populations)])
    else:
        rec = scenarios.run(cfg)
        status = rec.status
    write_trajectory(rec, rc.out_dir / rc.csv_name)
    _write_table(rc.out_dir / rc.summary_name, SUMMARY_COLUMNS, [_summary(rec, status, extra)])
    if args.plot or rc.plot:
        write_plot(rec, rc.out_dir / (Path(rc.csv_name).stem + ".svg"), cfg.kind)
    print(f"{cfg.kind}: {status}, {len(rec)} samples -> {rc.out_dir / rc.csv_name}")
    if status != "completed":
        _err(f"run {status}: {rec.message}")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep(args) -> int:
    rc = _load(args)
    cfg = rc.scenario
    if cfg.kind != "double_well":
        raise ConfigError("sweep needs a double_well scenario", "kind")
    values = parse_sweep_values(args.param, args.values, rc.natural)
    if not values:
        raise ConfigError("no sweep values given", args.param)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            res = scenarios.sweep(cfg, args.param, values, mapper=pool.map)
    else:
        res = scenarios.sweep(cfg, args.param, values)
    for i, rep in enumerate(res.reports):
        write_trajectory(rep.record, rc.out_dir / f"sweep_{args.param}_{i:03d}.csv")
    _write_table(
        rc.out_dir / "sweep.csv",
        ("param", "value") + SUMMARY_COLUMNS,
        [(args.param, r.value, r.status, r.blocked, r.max_D, r.max_E_nl, r.budget, r.bound_ok) for r in res.rows],
    )
    ratio = None if res.w_estimate is None else res.w_at_transition / res.w_estimate
    _write_table(
        rc.out_dir / "transition.csv",
        ("param", "transition", "w_at_transition", "w_estimate", "ratio", "monotone"),
        [(args.param, res.transition, res.w_at_transition, res.w_estimate, ratio, res.monotone)],
    )
    for r in res.rows:
        print(f"{args.param}={r.value:.6g} blocked={r.blocked} max_D={r.max_D:.4g} max_E_nl={r.max_E_nl:.4g} {r.status}")
    if res.transition is None:
        print("no blocked/unblocked transition inside the swept range")
    else:
        print(f"transition at {args.param}={res.transition:.4g}: w={res.w_at_transition:.4g}, "
              f"estimate_w={res.w_estimate:.4g}, ratio={ratio:.3g}")
    if any(r.status != "completed" for r in res.rows):
        _err("at least one sweep point did not complete")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import INJECTIONS, run_suite

    if args.inject is not None and args.inject not in INJECTIONS:
        raise ConfigError(f"unknown injection {args.inject!r}", "inject")
    results = run_suite(args.inject, echo=print)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _kv(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"expected NAME=VALUE, got {item!r}", item)
        try:
            key = key.strip()
            if key == "boundary":
                out[key] = val.strip()
            elif key == "N":
                out[key] = [float(v) for v in val.split(",")]
            else:
                out[key] = float(val)
        except ValueError:
            raise ConfigError(f"bad number {val!r}", key) from None
    return out


def cmd_estimate(args) -> int:
    params = _kv(args.params)
    kind = args.kind
    try:
        if kind == "w":
            need = {"delta_V", "N_c", "R"}
            if set(params) != need:
                raise ConfigError(f"estimate w needs exactly {sorted(need)}", "w")
            print(f"w = {scenarios.estimate_w(**params):.6g} J/m^2")
        elif kind == "correlation":
            n = params.pop("n", 10_000)
            rep = scenarios.correlation_model(**params, n=int(n))
            for name in ("f2", "C2_quadrature", "C2_exact", "C2_closed", "zero_mean_residual"):
                print(f"{name} = {getattr(rep, name):.6g}")
        elif kind == "scaling":
            Ns = params.pop("N", [1, 2, 3])
            rows = scenarios.scaling_table(Ns, params.get("r", 0.1), params.get("R", 2.0), params.get("w", 1.0))
            print("N,D_product,D_cat,H_nl_product,H_nl_cat")
            for row in rows:
                print(",".join(_num(v) for v in (row.N, row.D_product, row.D_cat, row.H_nl_product, row.H_nl_cat)))
        else:
            kinds = list(scenarios.REFERENCE_INPUTS) if kind == "all" else [kind]
            if kind == "all" and params:
                raise ConfigError("parameters are not accepted with 'all'", "all")
            print("quantity,value,unit,reference,same_order")
            for k in kinds:
                rep = scenarios.paper_estimates(k, **params)
                ref = scenarios.REFERENCE_VALUES[k]
                print(f"{k},{rep.value:.6g},{rep.unit},{ref:.0e},{scenarios.same_order(rep.value, ref)}")
                for name, v in rep.extras.items():
                    ref = scenarios.REFERENCE_VALUES["hydrogen_ratio"]
                    print(f"{k}.{name},{v:.6g},1,{ref:.0e},{scenarios.same_order(v, ref)}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), kind) from exc
    return EXIT_OK


ESTIMATE_KINDS = ("all", *scenarios.REFERENCE_INPUTS, "w", "correlation", "scaling")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlqm", description="Centroid-dispersion nonlinear wave dynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--config", required=True, help="config file, or the name of a bundled config")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots of D_N(t) and E_nl(t)")
        sp.add_argument("--natural-units", action="store_true", help="accept plain numbers without unit suffixes")

    sp = sub.add_parser("simulate", help="run one configuration and write a trajectory CSV")
    run_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="double-well sweep over one parameter")
    run_flags(sp)
    sp.add_argument("--param", required=True, help="one of: " + ", ".join(scenarios.SWEEPABLE))
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--inject", default=None, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("estimate", help="closed-form estimates (SI inputs)")
    sp.add_argument("kind", choices=ESTIMATE_KINDS)
    sp.add_argument("params", nargs="*", metavar="NAME=VALUE")
    sp.set_defaults(func=cmd_estimate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
