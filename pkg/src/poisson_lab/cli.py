"""Command-line front door: scenario runs, file classification, comparison.

Exit codes: 0 all checks passed, 1 a scientific check failed, 2 usage,
configuration or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigInvalid, DomainMismatch, ParseError, PoissonLabError
from .recurrence import (
    TauGrid,
    classify,
    comparability_profile,
    default_classify_config,
)
from .signals import Window, read_signal_csv
from .scenarios import (
    CATALOG,
    build_scenario,
    default_output_dir,
    load_scenario_config,
    run_scenario,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-lab",
        description="monotone nonautonomous systems under Poisson-stable forcing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a built-in scenario or a config file")
    p_run.add_argument("target", help="catalog name or path to a JSON config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--horizon", type=float, default=None,
                       help="override the integration horizon")

    p_cls = sub.add_parser("classify", help="classify a signal CSV")
    p_cls.add_argument("csv")
    p_cls.add_argument("--config", default=None,
                       help="JSON with window/grid/threshold overrides")
    p_cls.add_argument("--out", default=None, help="write the report here")

    p_cmp = sub.add_parser("compare", help="comparability of trajectory vs base")
    p_cmp.add_argument("traj_csv")
    p_cmp.add_argument("base_csv")
    p_cmp.add_argument("--config", default=None)
    p_cmp.add_argument("--out", default=None)

    sub.add_parser("list", help="list the built-in scenario catalog")
    return parser


def _analysis_config(f, path):
    if path is None:
        return default_classify_config(f)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read analysis config: {exc}") from exc
    cfg = default_classify_config(f)
    kwargs = {}
    if "window" in raw:
        kwargs["window"] = Window(*raw["window"])
    if "tau_grid" in raw:
        kwargs["tau_grid"] = TauGrid(*raw["tau_grid"])
    for key in ("bohr_epsilons", "poisson_schedule"):
        if key in raw:
            kwargs[key] = tuple(raw[key])
    for key in ("stationary_tol", "quasi_residual_tol", "poisson_separation",
                "refute_frac", "periodic_verify_rel"):
        if key in raw:
            kwargs[key] = float(raw[key])
    from dataclasses import replace
    return replace(cfg, **kwargs)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _cmd_run(args) -> int:
    from dataclasses import replace

    if args.target in CATALOG:
        cfg = build_scenario(args.target, seed=args.seed, outputs=args.out,
                             horizon=args.horizon)
    else:
        cfg = load_scenario_config(args.target)
        if args.horizon is not None:
            cfg = replace(cfg, integrator=replace(cfg.integrator,
                                                  t_end=args.horizon))
        if args.out:
            cfg = replace(cfg, outputs=args.out)
    outdir = Path(args.out) if args.out else default_output_dir() / cfg.name
    manifest = run_scenario(cfg, outdir)
    for name, entry in manifest.summary.items():
        print(f"[{entry['status']:>4}] {name}"
              + (f" = {entry['value']:g}" if entry["value"] is not None else ""))
    print(f"artifacts: {outdir}")
    return manifest.exit_code


def _cmd_classify(args) -> int:
    sig = read_signal_csv(args.csv)
    cfg = _analysis_config(sig, args.config)
    report = classify(sig, cfg=cfg)
    _emit(report.to_dict(), args.out)
    return 0  # classification is analysis output, not a test


def _cmd_compare(args) -> int:
    traj = read_signal_csv(args.traj_csv)
    base = read_signal_csv(args.base_csv)
    lo = max(traj.t0, base.t0)
    hi = min(traj.t_end, base.t_end)
    if hi - lo <= 4 * max(traj.dt, base.dt):
        raise DomainMismatch("signal domains barely overlap")
    if args.config:
        cfg = _analysis_config(traj, args.config)
        w, grid = cfg.window, cfg.tau_grid
        eps = cfg.bohr_epsilons
    else:
        length = hi - lo
        hw = length / 4
        w = Window(lo + hw, hw)
        grid = TauGrid(0.0, length - 2 * hw,
                       max(traj.dt, (length - 2 * hw) / 100_000))
        eps = (0.5, 0.2, 0.1)
    profile = comparability_profile(traj, base, eps, grid, w)
    payload = {
        "pairs": [[e, ("inf" if d == float("inf") else d)] for e, d in profile.pairs],
        "verdict": profile.verdict,
        "witness": profile.witness,
        "window": {"center": w.center, "half_width": w.half_width},
        "tau_grid": [grid.tau_min, grid.tau_max, grid.tau_step],
    }
    _emit(payload, args.out)
    return 0


def _cmd_list() -> int:
    for name, (_, _, blurb) in CATALOG.items():
        print(f"{name:18s} {blurb}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "classify":
            return _cmd_classify(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "list":
            return _cmd_list()
    except (ConfigInvalid, ParseError, DomainMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PoissonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
