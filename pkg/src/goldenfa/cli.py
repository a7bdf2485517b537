"""Command-line entry point: ``goldenfa {gaps,simulate,sweep,predict,compare}``.

Exit codes: 0 success, 2 configuration or usage error, 3 spoke cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .experiments import (
    SCHEDULER_VARIANTS,
    SweepConfig,
    compare_algorithms,
    predict_discovery_time,
    run_sweep,
)
from .geometry import GOLDEN_ANGLE, PHI, ArenaConfig, SpokeSequence, gap_structure, verify_three_gap
from .sim import (
    DEFAULT_SPOKE_CAP,
    ClusterSpec,
    ConfigError,
    CongestionModel,
    SearcherConfig,
    SpokeCapExceeded,
    SwarmConfig,
    place_cluster,
    place_cluster_at_distance,
    simulate_trial,
)

EXIT_OK, EXIT_CONFIG, EXIT_CAP = 0, 2, 3

RESULTS_COLUMNS = [
    "scheduler", "arena_shape", "extent_m", "delta_m", "n_searchers", "trials",
    "mean_s", "std_s", "p5_s", "p25_s", "p50_s", "p75_s", "p95_s", "outliers",
]
COMPARE_COLUMNS = [
    "scheduler_a", "scheduler_b", "arena_shape", "extent_m", "delta_m", "n_searchers", "trials",
    "mean_a_s", "mean_b_s", "std_a_s", "std_b_s", "mean_diff_s", "std_ratio",
    "ci_low_s", "ci_high_s", "outliers_a", "outliers_b",
]

_COMMON_KEYS = {
    "arena_shape", "extent", "speed", "spoke_cap", "cluster_shape", "cluster_distance",
    "congestion_capacity", "congestion_service_time", "congestion_discipline",
}
SIMULATE_KEYS = _COMMON_KEYS | {"n_searchers", "scheduler", "clusters", "cluster_diameter"}
SWEEP_KEYS = _COMMON_KEYS | {"deltas", "n_searchers", "schedulers", "trials_per_cell", "master_seed"}
CLUSTER_KEYS = {"bearing", "distance", "diameter", "shape"}


def fmt(x) -> str:
    """Locale-free decimal with 17 significant digits."""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# config files


def load_config(path: str, allowed: set[str]) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return raw


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


def _arena(cfg: dict) -> ArenaConfig:
    try:
        return ArenaConfig(cfg.get("arena_shape", "circle"), float(_require(cfg, "extent")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _congestion(cfg: dict):
    keys = ("congestion_capacity", "congestion_service_time", "congestion_discipline")
    if not any(k in cfg for k in keys):
        return None
    return CongestionModel(
        float(cfg.get("congestion_capacity", 1.0)),
        float(cfg.get("congestion_service_time", 1.0)),
        cfg.get("congestion_discipline", "shared"),
    )


def _scheduler(name) -> tuple[str, float]:
    if name not in SCHEDULER_VARIANTS:
        raise ConfigError(f"unknown scheduler {name!r}; expected one of {sorted(SCHEDULER_VARIANTS)}")
    return SCHEDULER_VARIANTS[name]


def build_trial(cfg: dict, seed: int):
    """``(arena, clusters, swarm)`` for a ``simulate`` config."""
    arena = _arena(cfg)
    scheduler, increment = _scheduler(cfg.get("scheduler", "golden"))
    swarm = SwarmConfig(
        n=int(cfg.get("n_searchers", 1)),
        scheduler=scheduler,
        sequence=SpokeSequence(increment),
        searcher=SearcherConfig(float(cfg.get("speed", 1.0))),
        congestion=_congestion(cfg),
        spoke_cap=int(cfg.get("spoke_cap", DEFAULT_SPOKE_CAP)),
    )
    if "clusters" in cfg:
        if "cluster_diameter" in cfg:
            raise ConfigError("give either 'clusters' or 'cluster_diameter', not both")
        clusters = []
        for item in cfg["clusters"]:
            if not isinstance(item, dict) or set(item) - CLUSTER_KEYS:
                raise ConfigError(f"cluster entries take keys {sorted(CLUSTER_KEYS)}, got {item!r}")
            clusters.append(ClusterSpec(float(item.get("bearing", 0.0)), float(_require(item, "distance")),
                                        float(_require(item, "diameter")), item.get("shape", "disk")))
    else:
        diameter = float(_require(cfg, "cluster_diameter"))
        shape = cfg.get("cluster_shape", "disk")
        if cfg.get("cluster_distance") is None:
            clusters = [place_cluster(arena, diameter, seed, shape)]
        else:
            clusters = [place_cluster_at_distance(float(cfg["cluster_distance"]), diameter, seed, shape)]
    return arena, clusters, swarm


def build_sweep(cfg: dict, seed_override=None) -> SweepConfig:
    seed = seed_override if seed_override is not None else cfg.get("master_seed")
    if seed is None:
        raise ConfigError("a master seed is required: set 'master_seed' or pass --seed")
    ns = cfg.get("n_searchers", [1])
    try:
        return SweepConfig(
            arena=_arena(cfg),
            deltas=tuple(_require(cfg, "deltas")),
            ns=tuple(ns if isinstance(ns, list) else [ns]),
            schedulers=tuple(cfg.get("schedulers", ["golden"])),
            trials_per_cell=int(cfg.get("trials_per_cell", 100)),
            master_seed=int(seed),
            congestion=_congestion(cfg),
            cluster_shape=cfg.get("cluster_shape", "disk"),
            cluster_distance=cfg.get("cluster_distance"),
            speed=float(cfg.get("speed", 1.0)),
            spoke_cap=int(cfg.get("spoke_cap", DEFAULT_SPOKE_CAP)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output


def _prepare_out(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def results_rows(cfg: SweepConfig, cells) -> list[list[str]]:
    rows = []
    for c in cells:
        st = c.stats
        rows.append([
            c.key.scheduler, cfg.arena.shape, fmt(cfg.arena.extent), fmt(c.key.delta), str(c.key.n),
            str(st.n), fmt(st.mean), fmt(st.std), fmt(st.p5), fmt(st.p25), fmt(st.p50),
            fmt(st.p75), fmt(st.p95), str(st.outliers),
        ])
    return rows


def comparison_rows(cfg: SweepConfig, report) -> list[list[str]]:
    a, b = report.schedulers
    return [[
        a, b, cfg.arena.shape, fmt(cfg.arena.extent), fmt(r.delta), str(r.n), str(r.first.n),
        fmt(r.first.mean), fmt(r.second.mean), fmt(r.first.std), fmt(r.second.std),
        fmt(r.mean_diff), fmt(r.std_ratio), fmt(r.ci_low), fmt(r.ci_high),
        str(r.first.outliers), str(r.second.outliers),
    ] for r in report.rows]


def _write_manifest(out: Path, command: str, cfg: SweepConfig, files: dict, extra: dict) -> None:
    manifest = {
        "tool": "goldenfa",
        "version": __version__,
        "command": command,
        "started_at": extra.pop("started_at"),
        "master_seed": cfg.master_seed,
        "config": cfg.to_dict(),
        "outputs": {name: hashlib.sha256(data).hexdigest() for name, data in files.items()},
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cell_errors(cells) -> dict:
    return {f"{c.key.scheduler}/{c.key.delta:g}/{c.key.n}": c.errors for c in cells if c.errors}


# ---------------------------------------------------------------------------
# commands


def cmd_gaps(args) -> int:
    seq = SpokeSequence(_increment(args.increment))
    g = gap_structure(args.k, seq)
    rows = [[fmt(w), str(m)] for w, m in g.gaps]
    table = _csv_text(["width_rad", "multiplicity"], rows)
    if args.csv:
        Path(args.csv).write_text(table)
    sys.stdout.write(table)
    print(f"max_gap_rad,{fmt(g.max_gap)}")
    print(f"three_gap,{'pass' if verify_three_gap(g) else 'fail'}")
    return EXIT_OK


def _increment(choice: str) -> float:
    if choice == "phi":
        return PHI
    if choice == "golden-angle":
        return GOLDEN_ANGLE
    try:
        value = float(choice)
    except ValueError:
        raise ConfigError(f"increment must be 'phi', 'golden-angle' or a number, got {choice!r}") from None
    if not value > 0:
        raise ConfigError("increment must be positive")
    return value


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, SIMULATE_KEYS)
    arena, clusters, swarm = build_trial(cfg, args.seed)
    result = simulate_trial(arena, clusters, swarm, args.seed)
    print(json.dumps(result.as_dict(), sort_keys=False))
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    cfg = build_sweep(load_config(args.config, SWEEP_KEYS), args.seed)
    out = _prepare_out(args.out)
    cells = run_sweep(cfg, args.workers)
    files = {"results.csv": _csv_text(RESULTS_COLUMNS, results_rows(cfg, cells)).encode()}
    (out / "results.csv").write_bytes(files["results.csv"])
    if args.plot:
        from .plots import plot_sweep

        plot_sweep(cells, out / "discovery_time.svg", loglog=args.loglog)
        files["discovery_time.svg"] = (out / "discovery_time.svg").read_bytes()
    _write_manifest(out, "sweep", cfg, files, {"started_at": started, "cell_errors": _cell_errors(cells)})
    print(out / "results.csv")
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        value = predict_discovery_time(args.R, args.D, args.N, args.delta, args.c, args.full_form)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(fmt(value))
    return EXIT_OK


def cmd_compare(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    cfg = build_sweep(load_config(args.config, SWEEP_KEYS), args.seed)
    out = _prepare_out(args.out) if args.out else None
    report = compare_algorithms(cfg, args.workers, args.resamples)
    text = _csv_text(COMPARE_COLUMNS, comparison_rows(cfg, report))
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    files = {"comparison.csv": text.encode()}
    (out / "comparison.csv").write_bytes(files["comparison.csv"])
    if args.plot:
        from .plots import plot_comparison

        plot_comparison(report, out / "comparison.svg")
        files["comparison.svg"] = (out / "comparison.svg").read_bytes()
    _write_manifest(out, "compare", cfg, files, {"started_at": started, "cell_errors": _cell_errors(report.cells)})
    print(out / "comparison.csv")
    return EXIT_OK


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goldenfa", description="Golden-ratio spoke foraging simulator.")
    parser.add_argument("--version", action="version", version=f"goldenfa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaps", help="circular gap structure of the first k spoke headings")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--increment", default="phi", help="'phi' (default), 'golden-angle' or radians")
    p.add_argument("--csv", help="also write the gap table to this file")
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("simulate", help="run one trial and print it as JSON")
    p.add_argument("config")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    for name, func, help_text in (("sweep", cmd_sweep, "run a seeded parameter sweep"),
                                  ("compare", cmd_compare, "paired comparison of two schedulers")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config")
        p.add_argument("--out", required=(name == "sweep"), help="output directory")
        p.add_argument("--seed", type=int, help="master seed (overrides the config's master_seed)")
        p.add_argument("--workers", type=_positive_int, default=1)
        p.add_argument("--plot", action="store_true", help="also write an SVG figure")
        if name == "sweep":
            p.add_argument("--loglog", action="store_true")
        else:
            p.add_argument("--resamples", type=_positive_int, default=10_000)
        p.set_defaults(func=func)

    p = sub.add_parser("predict", help="predicted time to discovery, c*R*D/(N*delta)")
    p.add_argument("R", type=float)
    p.add_argument("D", type=float)
    p.add_argument("N", type=int)
    p.add_argument("delta", type=float)
    p.add_argument("--c", type=float, default=32.0)
    p.add_argument("--full-form", action="store_true", help="use c*(R/(N*delta) + 1)*D")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"goldenfa {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpokeCapExceeded as exc:
        print(f"goldenfa {args.command}: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
