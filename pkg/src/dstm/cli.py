"""Command-line interface.

Exit status: 0 on success, 1 when a verification or table check fails,
2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__
from .codebook import coding_gain, diversity_rank, export_codebook, fast_coding_gain, spectral_efficiency
from .constellations import min_angle, optimize_sphere, save_sphere
from .schemes import SCHEMES, SHIPPED, SchemeSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SIM_DEFAULTS = {
    "snr_db": [float(s) for s in range(0, 32, 2)],
    "n_rx": 1,
    "max_blocks": 100_000,
    "max_errors": 200,
    "frame_len": 9,
    "decoder": "groupwise",
    "workers": 1,
}
SIM_KEYS = tuple(SIM_DEFAULTS) + ("seed",)
SCHEME_KEYS = ("scheme", "m", "theta", "sphere", "psk")


class UsageError(Exception):
    pass


def default_seed() -> int:
    env = os.environ.get("DSTM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"DSTM_SEED must be an integer, got {env!r}") from None


def _snr_list(tokens) -> list[float]:
    if isinstance(tokens, (str, int, float)):
        tokens = [tokens]
    out = []
    for tok in tokens:
        if ":" in str(tok):
            try:
                start, stop, step = (float(x) for x in str(tok).split(":"))
            except ValueError:
                raise UsageError(f"bad SNR range {tok!r}; use start:stop:step") from None
            if step <= 0 or stop < start:
                raise UsageError(f"bad SNR range {tok!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            out += [start + i * step for i in range(n)]
        else:
            try:
                out.append(float(tok))
            except ValueError:
                raise UsageError(f"bad SNR value {tok!r}") from None
    return out


def _add_scheme_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--scheme", choices=SCHEMES, required=required)
    p.add_argument("--m", type=int, help="pairs per half of the QO constellation (M)")
    p.add_argument("--theta", help="QO rotation: radians, 'pi/8' style, or 'theorem1'")
    p.add_argument("--sphere", help="spherical code: builtin:DxN or a coordinate file")
    p.add_argument("--psk", type=int, help="PSK size for the baseline schemes")


def _spec_from(d: dict) -> SchemeSpec:
    kw = {k: d[k] for k in SCHEME_KEYS if d.get(k) is not None}
    if "scheme" not in kw:
        raise UsageError("no scheme given")
    if "theta" in kw and kw["scheme"] not in ("qo4", "qo8"):
        raise UsageError("--theta applies to the qo4 and qo8 schemes only")
    try:
        return SchemeSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- gain


def cmd_gain(args) -> int:
    spec = _spec_from(vars(args))
    try:
        cb = spec.build()
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    t0 = time.perf_counter()
    gain = coding_gain(cb)
    elapsed = time.perf_counter() - t0
    print(f"scheme: {spec.label}")
    print(f"transmit antennas: {cb.n_tx}")
    print(f"codebook size: {cb.size}")
    print(f"spectral efficiency: {spectral_efficiency(cb):g} bps/Hz")
    print(f"diversity rank: {diversity_rank(cb)}")
    print(f"coding gain: {gain:.4f}")
    print(f"coding gain (closed form): {fast_coding_gain(cb):.4f}")
    print(f"parallel decoders: {len(cb.groups)}")
    print(f"search space per decoder: {max(cb.group_sizes)}")
    print(f"brute force time: {elapsed:.2f} s")
    if args.export:
        try:
            export_codebook(cb, args.export)
        except OSError as exc:
            raise UsageError(f"cannot write {args.export}: {exc}") from None
        print(f"codebook written to {args.export}")
    return EXIT_OK


# ---------------------------------------------------------------- design-sphere


def cmd_design_sphere(args) -> int:
    if args.d < 2 or args.n < 2:
        raise UsageError("need -d >= 2 and -n >= 2")
    seed = default_seed() if args.seed is None else args.seed
    if args.output:
        out = Path(args.output)
        if not out.parent.exists() or (out.exists() and not os.access(out, os.W_OK)):
            raise UsageError(f"cannot write {out}")
    code = optimize_sphere(args.d, args.n, seed=seed, iterations=args.iterations, restarts=args.restarts)
    angle = min_angle(code)
    print(f"d={args.d} n={args.n} seed={seed} min angle: {angle:.4f} deg")
    if args.output:
        comment = (f"{args.n}-point spherical code in {args.d} dimensions, unit radius\n"
                   f"min angle {angle:.4f} deg; seed={seed} iterations={args.iterations} "
                   f"restarts={args.restarts}")
        try:
            save_sphere(code, args.output, comment)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc}") from None
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    from .verify import equivalence_check, theorem1_check, unitarity_check

    seed = default_seed() if args.seed is None else args.seed
    failed = 0
    print("rotation sweep")
    for c in theorem1_check():
        got = ", ".join(f"{b * c.M / math.pi:g}pi/M" for b in c.best)
        want = ", ".join(f"{e * c.M / math.pi:g}pi/M" for e in c.expected)
        print(f"  M={c.M:<3d} best {got:<22s} expected {want:<22s} {'PASS' if c.passed else 'FAIL'}")
        failed += not c.passed
    print(f"decoder equivalence ({args.trials} instances per codebook)")
    for i, spec in enumerate(SHIPPED):
        cb = spec.build()
        bad = equivalence_check(cb, args.trials, seed=seed + i)
        print(f"  {spec.label:<14s} mismatches {bad:<6d} {'PASS' if bad == 0 else 'FAIL'}")
        failed += bad != 0
    print("unitarity")
    for spec in SHIPPED:
        d = unitarity_check(spec.build())
        ok = d <= 1e-10
        print(f"  {spec.label:<14s} max defect {d:.2e} {'PASS' if ok else 'FAIL'}")
        failed += not ok
    print("all checks passed" if not failed else f"{failed} check(s) failed")
    return EXIT_OK if not failed else EXIT_FAIL


# ---------------------------------------------------------------- tables


def cmd_tables(args) -> int:
    from .tables import evaluate_row, FOUR_TX_ROWS, EIGHT_TX_ROWS

    failed = 0
    for title, rows in (("Four transmit antennas", FOUR_TX_ROWS), ("Eight transmit antennas", EIGHT_TX_ROWS)):
        print(title)
        print(f"  {'Eff':>4s}  {'scheme':<26s} {'constellation':<22s} {'gain':>7s} {'publ.':>6s} "
              f"{'dec':>4s} {'space':>6s}  result")
        for row in rows:
            r = evaluate_row(row)
            if r.external:
                print(f"  {row.eff:>4g}  {row.scheme:<26s} {row.constellation:<22s} {'-':>7s} "
                      f"{row.published_gain:>6.2f} {row.published_decoders:>4d} {row.published_search:>6d}  {r.note}")
                continue
            status = "pass" if r.passed else "FAIL"
            extra = f" ({r.note})" if r.note else ""
            print(f"  {r.eff:>4g}  {row.scheme:<26s} {row.constellation:<22s} {r.gain:>7.4f} "
                  f"{row.published_gain:>6.2f} {r.decoders:>4d} {r.search:>6d}  {status}{extra}")
            failed += not r.passed
    return EXIT_OK if not failed else EXIT_FAIL


# ---------------------------------------------------------------- simulate


def _load_config(args) -> dict:
    if args.config and args.recipe:
        raise UsageError("give either --config or --recipe, not both")
    try:
        if args.config:
            return json.loads(Path(args.config).read_text())
        if args.recipe:
            text = resources.files("dstm.recipes").joinpath(f"{args.recipe}.json").read_text()
            return json.loads(text)
    except FileNotFoundError as exc:
        raise UsageError(f"config not found: {exc.filename or args.recipe}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid config JSON: {exc}") from None
    return {}


def _sim_settings(args, base: dict) -> dict:
    """Simulation settings: flags override file values override defaults."""
    out = dict(SIM_DEFAULTS, seed=default_seed())
    out.update({k: v for k, v in base.items() if k in SIM_KEYS})
    out["snr_db"] = _snr_list(out["snr_db"])
    flags = {
        "snr_db": _snr_list(args.snr) if args.snr else None,
        "n_rx": args.n_rx,
        "max_blocks": args.blocks,
        "max_errors": args.max_errors,
        "frame_len": args.frame_len,
        "decoder": args.decoder,
        "workers": args.workers,
        "seed": args.seed,
    }
    out.update({k: v for k, v in flags.items() if v is not None})
    if out.get("max_errors") in (0, -1):
        out["max_errors"] = None
    return out


def cmd_simulate(args) -> int:
    from .montecarlo import SimConfig, run_bler, write_csv, write_manifest
    from .plotting import plot_bler

    doc = _load_config(args)
    unknown = set(doc) - set(SIM_KEYS) - set(SCHEME_KEYS) - {"runs", "title", "target"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    settings = _sim_settings(args, doc)

    if args.scheme:
        runs = [{k: getattr(args, k) for k in SCHEME_KEYS}]
    elif "runs" in doc:
        runs = doc["runs"]
    elif "scheme" in doc:
        runs = [{k: doc[k] for k in SCHEME_KEYS if k in doc}]
    else:
        raise UsageError("no scheme: pass --scheme, --config or --recipe")
    if args.out and len(runs) != 1:
        raise UsageError("--out names a single CSV; use --out-dir for several runs")

    configs = []
    for run in runs:
        spec = _spec_from(run)
        local = dict(settings)
        local.update({k: v for k, v in run.items() if k in SIM_KEYS})
        if "snr_db" in run:
            local["snr_db"] = _snr_list(run["snr_db"])
        try:
            configs.append(SimConfig(spec, **local))
            spec.build()
        except (TypeError, ValueError, OSError) as exc:
            raise UsageError(str(exc)) from None

    out_dir = Path(args.out_dir)
    if not args.out:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create {out_dir}: {exc}") from None

    curves = []
    for cfg in configs:
        csv_path = Path(args.out) if args.out else out_dir / f"{cfg.scheme.label}.csv"
        t0 = time.perf_counter()
        points = run_bler(cfg)
        elapsed = time.perf_counter() - t0
        try:
            write_csv(csv_path, cfg, points)
            write_manifest(csv_path.with_suffix(".json"), cfg, points, elapsed)
        except OSError as exc:
            raise UsageError(f"cannot write {csv_path}: {exc}") from None
        print(f"{cfg.scheme.label}: {len(points)} points in {elapsed:.1f} s -> {csv_path}")
        curves.append((cfg.scheme.label, points))

    if args.plot:
        plot_bler(curves, args.plot, title=doc.get("title"), target=doc.get("target"))
        print(f"figure written to {args.plot}")
    return EXIT_OK


# ---------------------------------------------------------------- plot


def cmd_plot(args) -> int:
    from .montecarlo import read_csv
    from .plotting import plot_bler

    curves = []
    for path in args.csv:
        try:
            curves.append(read_csv(path))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
    plot_bler(curves, args.output, title=args.title, target=args.target)
    print(f"figure written to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dstm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gain", help="coding gain, diversity and decoder complexity of a scheme")
    _add_scheme_args(p, required=True)
    p.add_argument("--export", metavar="JSON", help="write the codebook as JSON")
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("design-sphere", help="optimise a spherical code")
    p.add_argument("-d", type=int, required=True, help="dimension")
    p.add_argument("-n", type=int, required=True, help="number of points")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("-o", "--output", help="coordinate file to write")
    p.set_defaults(func=cmd_design_sphere)

    p = sub.add_parser("verify", help="rotation sweep, decoder equivalence and unitarity checks")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", help="recompute the coding-gain comparison tables against published values")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("simulate", help="Monte Carlo BLER versus SNR")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--recipe", choices=("tx4", "tx8"), help="bundled configuration")
    _add_scheme_args(p, required=False)
    p.add_argument("--snr", nargs="+", help="SNR points in dB; 'start:stop:step' ranges allowed")
    p.add_argument("--n-rx", type=int)
    p.add_argument("--blocks", type=int, help="maximum blocks per SNR point")
    p.add_argument("--max-errors", type=int, help="stop a point after this many errors (0: never)")
    p.add_argument("--frame-len", type=int)
    p.add_argument("--decoder", choices=("groupwise", "full-ml"))
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (single run)")
    p.add_argument("--out-dir", default=".", help="directory for per-scheme CSV files")
    p.add_argument("--plot", metavar="PNG", help="also render the curves to this file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="overlay BLER curves from CSV files")
    p.add_argument("csv", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--title")
    p.add_argument("--target", type=float)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dstm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
