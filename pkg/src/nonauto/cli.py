"""Batch experiment runner and self-check front end.

``nonauto run config.json`` executes the probes described by a JSON config
and writes a versioned report plus per-region CSV and TSV series, all
byte-identical across reruns. ``nonauto verify`` prints the pass/fail table
of the built-in checks, and ``nonauto list`` enumerates the shipped
systems.

Exit codes: 0 run complete or all checks pass, 1 check failure, 2 config
error, 3 unknown system.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import acceptance, families
from .families import FamilySpec, cofinite_family, nonempty, syndetic_family
from .registry import build, default_cover, registry_names
from .sensitivity import (
    region_scan,
    sensitivity_probe,
    weak_sensitivity_probe,
)
from .spaces import CIRCLE, INTERVAL, SYMBOLIC, cylinder_region, metric_ball
from .systems import MapSequence, sequence_from_dict

REPORT_SCHEMA = 1
WORKER_ENV = "NONAUTO_WORKERS"

MODES = ("sensitive", "cofinite", "syndetic", "F-sensitive",
         "weakly-F-sensitive")

_DEFAULT_COVER_KIND = {INTERVAL: "interval-balls", CIRCLE: "circle-balls",
                       SYMBOLIC: "cylinders"}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment config."""


class UnknownSystemError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    label: str
    sequence: MapSequence
    family: FamilySpec | None
    deltas: tuple
    horizon: int
    resolution: int
    cover: tuple
    modes: tuple
    out_dir: str


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _parse_cover(spec, space):
    if isinstance(spec, str):
        return tuple(default_cover(spec))
    _require(isinstance(spec, list) and spec,
             "cover must be a kind name or a nonempty list of regions")
    regions = []
    for i, rd in enumerate(spec):
        _require(isinstance(rd, dict), f"cover entry {i} is not an object")
        kind = rd.get("kind", "ball")
        label = rd.get("label", f"region-{i:02d}")
        if kind == "ball":
            _require("center" in rd and "radius" in rd,
                     f"ball region {i} needs center and radius")
            _require(space in (INTERVAL, CIRCLE),
                     "ball regions need an interval or circle system")
            regions.append(metric_ball(space, float(rd["center"]),
                                       float(rd["radius"]), label=label))
        elif kind == "cylinder":
            _require(isinstance(rd.get("constraints"), dict),
                     f"cylinder region {i} needs a constraints object")
            constraints = {int(j): int(v)
                           for j, v in rd["constraints"].items()}
            regions.append(cylinder_region(constraints, label=label))
        else:
            raise ConfigError(f"unknown region kind {kind!r} in cover")
    return tuple(regions)


def parse_config(raw: dict, out_override: str | None = None) -> ExperimentConfig:
    _require(isinstance(raw, dict), "config root must be an object")
    _require("system" in raw, "config needs a 'system' entry")

    system = raw["system"]
    named = None
    if isinstance(system, str):
        try:
            named = build(system)
        except KeyError as exc:
            raise UnknownSystemError(exc.args[0]) from exc
        label, sequence, space = system, named.sequence, named.space
    elif isinstance(system, dict):
        try:
            sequence = sequence_from_dict(system)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad inline system: {exc}") from exc
        label, space = raw.get("label", "inline"), sequence.space
        _require(space is not None,
                 "inline systems must carry a space tag")
    else:
        raise ConfigError("'system' must be a name or an inline object")

    modes = raw.get("modes")
    _require(isinstance(modes, list) and modes,
             "config needs a nonempty 'modes' list")
    for m in modes:
        _require(m in MODES, f"unknown mode {m!r}; known: {', '.join(MODES)}")

    if "deltas" in raw:
        deltas = raw["deltas"]
        _require(isinstance(deltas, list) and deltas,
                 "'deltas' must be a nonempty list")
    elif "delta" in raw:
        deltas = [raw["delta"]]
    elif named is not None:
        deltas = list(named.params.deltas)
    else:
        raise ConfigError("config needs 'delta' or 'deltas'")
    deltas = tuple(float(d) for d in deltas)
    _require(all(d > 0 for d in deltas), "every delta must be positive")

    family = None
    if "family" in raw:
        try:
            family = families.family_from_dict(raw["family"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad family: {exc}") from exc
    if any(m in ("F-sensitive", "weakly-F-sensitive") for m in modes):
        _require(family is not None,
                 "family-based modes need a 'family' entry")

    default_h = named.params.horizon if named else None
    horizon = raw.get("horizon", default_h)
    _require(isinstance(horizon, int) and horizon >= 1,
             "config needs an integer horizon >= 1")

    default_r = named.params.resolution if named else 64
    resolution = raw.get("resolution", default_r)
    _require(isinstance(resolution, int) and resolution >= 2,
             "resolution must be an integer >= 2")

    cover_spec = raw.get("cover")
    if cover_spec is None:
        kind = (named.params.cover_kind if named
                else _DEFAULT_COVER_KIND[space])
        cover = tuple(default_cover(kind))
    else:
        cover = _parse_cover(cover_spec, space)

    out_dir = out_override or raw.get("out", "out")
    return ExperimentConfig(label=label, sequence=sequence, family=family,
                            deltas=deltas, horizon=horizon,
                            resolution=resolution, cover=cover,
                            modes=tuple(modes), out_dir=str(out_dir))


def _mode_family(mode: str, cfg: ExperimentConfig) -> FamilySpec:
    if mode == "sensitive":
        return nonempty()
    if mode == "cofinite":
        if cfg.family is not None and cfg.family.kind == "cofinite":
            return cfg.family
        return cofinite_family()
    if mode == "syndetic":
        if cfg.family is not None and cfg.family.kind == "syndetic":
            return cfg.family
        return syndetic_family()
    return cfg.family


def _worker_cap() -> int:
    raw = os.environ.get(WORKER_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _prime_scans(cfg: ExperimentConfig) -> None:
    # warm the shared scan cache; with workers > 1 regions warm concurrently,
    # results are identical either way
    workers = min(_worker_cap(), len(cfg.cover))
    if workers <= 1:
        return
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda r: region_scan(cfg.sequence, r, cfg.horizon,
                                            cfg.resolution), cfg.cover))


def run_experiment(cfg: ExperimentConfig) -> dict:
    _prime_scans(cfg)
    reports = []
    for mode in cfg.modes:
        for delta in cfg.deltas:
            fam = _mode_family(mode, cfg)
            if mode == "weakly-F-sensitive":
                rep = weak_sensitivity_probe(cfg.sequence, delta, fam,
                                             cfg.cover, cfg.horizon,
                                             cfg.resolution)
            else:
                rep = sensitivity_probe(cfg.sequence, delta, fam, cfg.cover,
                                        cfg.horizon, cfg.resolution)
            entry = rep.to_dict()
            entry["requested_mode"] = mode
            reports.append(entry)
    return {"schema": REPORT_SCHEMA, "system": cfg.label,
            "horizon": cfg.horizon, "resolution": cfg.resolution,
            "deltas": list(cfg.deltas), "reports": reports}


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]", "_", label)


def _region_label(region, index: int) -> str:
    return region.label or f"region-{index:02d}"


def write_outputs(cfg: ExperimentConfig, report: dict) -> list:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    _write_atomic(report_path,
                  json.dumps(report, sort_keys=True, indent=2) + "\n")
    written.append(report_path)

    # hit series use the first delta; the scan itself is delta-independent
    delta = cfg.deltas[0]
    scans = [region_scan(cfg.sequence, r, cfg.horizon, cfg.resolution)
             for r in cfg.cover]
    for idx, (region, scan) in enumerate(zip(cfg.cover, scans)):
        label = _region_label(region, idx)
        lines = ["n,max_separation,witness"]
        for n in scan.times(delta).indices:
            i, j, sep = scan.witness(n)
            lines.append(f"{n},{sep!r},{i}-{j}")
        path = out / f"hits_{_safe_name(label)}.csv"
        _write_atomic(path, "\n".join(lines) + "\n")
        written.append(path)

    labels = [_region_label(r, i) for i, r in enumerate(cfg.cover)]
    rows = ["n\t" + "\t".join(labels)]
    for n in range(cfg.horizon + 1):
        cells = [repr(float(scan.max_series[n])) for scan in scans]
        rows.append(f"{n}\t" + "\t".join(cells))
    plot_path = out / "plotdata.tsv"
    _write_atomic(plot_path, "\n".join(rows) + "\n")
    written.append(plot_path)
    return written


def _cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(raw, out_override=args.out)
    except UnknownSystemError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(cfg)
    written = write_outputs(cfg, report)
    verdicts = {r["requested_mode"]: r["verdict"] for r in report["reports"]}
    for mode, verdict in verdicts.items():
        print(f"{cfg.label}: {mode} -> {verdict}")
    print(f"wrote {len(written)} files to {cfg.out_dir}")
    return 0


def _cmd_verify(args) -> int:
    try:
        results = acceptance.run_all(only=args.only)
    except KeyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    width = max(len(r.key) for r in results)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.key:<{width}}  {r.title}")
        if not r.passed:
            print(f"      {r.details}")
    passed = sum(r.passed for r in results)
    print(f"{passed} of {len(results)} checks passed")
    return 0 if passed == len(results) else 1


def _cmd_list(_args) -> int:
    width = max(len(n) for n in registry_names())
    for name in registry_names():
        named = build(name)
        p = named.params
        print(f"{name:<{width}}  {named.description}")
        print(f"{'':<{width}}  deltas={list(p.deltas)} horizon={p.horizon} "
              f"resolution={p.resolution} cover={p.cover_kind}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nonauto",
        description=("finite-horizon sensitivity probes for time-varying "
                     "iterated maps"))
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the probes described by a "
                                       "JSON config and write reports")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--out", default=None,
                       help="output directory (overrides the config)")

    p_verify = sub.add_parser("verify", help="run the built-in checks and "
                                             "print a pass/fail table")
    p_verify.add_argument("--only", default=None,
                          help="run a single named check")

    sub.add_parser("list", help="list built-in systems")

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_list(args)


if __name__ == "__main__":
    sys.exit(main())
