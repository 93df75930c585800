"""Command-line entry point.

Subcommands:
    ingest     load snapshots, apply dedup + journal split, write stage counters
    link       run the full linkage pipeline and write every report file
    calibrate  write efficiency / wrong-match grids from resolved pairs
    report     render SVG charts from an existing fractions.csv

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .calibrate import (
    CalibrationError,
    TruePairSet,
    calibrate,
    default_thresholds,
    write_grids,
)
from .ingest import (
    IngestError,
    dedup_primary_subject,
    load_journal_index,
    load_preprint_snapshot,
    split_by_journal_presence,
)
from .linkpipe import DEFAULT_REPOSITORIES, run_linkage, write_outputs
from .model import PreprintIdError
from .refparse import JournalGroupConfig, load_group_config
from .report import ReportError, render_fraction_charts
from .titlematch import MatchPolicy
from .util import atomic_write

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass
class RunConfig:
    snapshots: list[Path]
    journal_index: Path | None
    out_dir: Path
    target_group: str = "PLB"
    group_config: Path | None = None
    ra_threshold: float = 1.0
    rp_threshold: float = 1.0
    grid_step: float = 0.1
    efftm: float | None = None
    default_efftm: float = 0.64
    subject_areas: list[str] | None = None
    repositories: list[str] = field(default_factory=lambda: list(DEFAULT_REPOSITORIES))
    jobs: int = 1

    def policy(self) -> MatchPolicy:
        return MatchPolicy(ra_threshold=self.ra_threshold, rp_threshold=self.rp_threshold)

    def thresholds(self) -> tuple[float, ...]:
        return default_thresholds(self.grid_step)

    def group_cfg(self) -> JournalGroupConfig:
        if self.group_config is None:
            return JournalGroupConfig()
        return load_group_config(self.group_config)


_CONFIG_KEYS = {
    "snapshots", "journal_index", "out_dir", "target_group", "group_config",
    "ra_threshold", "rp_threshold", "grid_step", "efftm", "default_efftm",
    "subject_areas", "repositories", "jobs",
}


def load_config(path: str | Path, overrides: dict) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    base = Path(path).parent

    def respath(value):
        p = Path(value)
        return p if p.is_absolute() else base / p

    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(
            snapshots=[respath(p) for p in raw.get("snapshots", [])],
            journal_index=respath(raw["journal_index"]) if raw.get("journal_index") else None,
            out_dir=respath(raw.get("out_dir", "out")),
            target_group=raw.get("target_group", "PLB"),
            group_config=respath(raw["group_config"]) if raw.get("group_config") else None,
            ra_threshold=float(raw.get("ra_threshold", 1.0)),
            rp_threshold=float(raw.get("rp_threshold", 1.0)),
            grid_step=float(raw.get("grid_step", 0.1)),
            efftm=float(raw["efftm"]) if raw.get("efftm") is not None else None,
            default_efftm=float(raw.get("default_efftm", 0.64)),
            subject_areas=list(raw["subject_areas"]) if raw.get("subject_areas") else None,
            repositories=list(raw.get("repositories", DEFAULT_REPOSITORIES)),
            jobs=int(raw.get("jobs", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in config {path}: {exc}") from None
    if "out_dir" in overrides and overrides["out_dir"] is not None:
        cfg.out_dir = Path(overrides["out_dir"])
    for key in ("snapshots",):
        for p in getattr(cfg, key):
            if not Path(p).exists():
                raise ConfigError(f"input path does not exist: {p}")
    if cfg.journal_index is not None and not cfg.journal_index.exists():
        raise ConfigError(f"input path does not exist: {cfg.journal_index}")
    if cfg.group_config is not None and not cfg.group_config.exists():
        raise ConfigError(f"input path does not exist: {cfg.group_config}")
    return cfg


def _load_corpora(cfg: RunConfig):
    if not cfg.snapshots:
        raise DataError("no input: config lists no preprint snapshots")
    preprints = []
    for path in cfg.snapshots:
        preprints.extend(load_preprint_snapshot(path))
    if cfg.journal_index is None:
        raise DataError("no journal index configured")
    articles = load_journal_index(cfg.journal_index)
    return preprints, articles


def cmd_ingest(cfg: RunConfig) -> int:
    if not cfg.snapshots:
        raise DataError("no input: config lists no preprint snapshots")
    preprints = []
    for path in cfg.snapshots:
        preprints.extend(load_preprint_snapshot(path))
    deduped = dedup_primary_subject(preprints)
    split = split_by_journal_presence(deduped)

    totals = {}
    for record in preprints:
        totals[record.repository] = totals.get(record.repository, 0) + 1

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["repository,total,after_dedup,with_journal,without_journal"]
    for repo in sorted(set(totals) | set(split.counts)):
        counts = split.counts.get(repo)
        lines.append(
            f"{repo},{totals.get(repo, 0)},"
            f"{counts.after_dedup if counts else 0},"
            f"{counts.with_journal if counts else 0},"
            f"{counts.without_journal if counts else 0}"
        )
    atomic_write(cfg.out_dir / "corpus_summary.csv", "\n".join(lines) + "\n")
    print(
        f"ingest: {len(preprints)} listings, {len(deduped)} after dedup, "
        f"{len(split.with_journal)} with journal reference, "
        f"{len(split.without_journal)} without"
    )
    return EXIT_OK


def cmd_link(cfg: RunConfig) -> int:
    preprints, articles = _load_corpora(cfg)
    result = run_linkage(
        preprints,
        articles,
        cfg.group_cfg(),
        cfg.target_group,
        policy=cfg.policy(),
        thresholds=cfg.thresholds(),
        efftm_override=cfg.efftm,
        default_efftm=cfg.default_efftm,
        repositories=tuple(cfg.repositories),
        areas=tuple(cfg.subject_areas) if cfg.subject_areas else None,
        jobs=cfg.jobs,
    )
    write_outputs(result, cfg.out_dir)
    n_ambiguous = sum(1 for m in result.match_report.matches if m.ambiguous)
    print(
        f"link[{cfg.target_group}]: {len(result.resolved)} resolved, "
        f"{len(result.unresolved)} unresolved, "
        f"{len(result.match_report.matched_keys())} title-matched, "
        f"{n_ambiguous} ambiguous "
        f"(efftm={result.efftm:.4f} from {result.efftm_source})"
    )
    return EXIT_OK


def cmd_calibrate(cfg: RunConfig) -> int:
    preprints, articles = _load_corpora(cfg)
    result = run_linkage(
        preprints,
        articles,
        cfg.group_cfg(),
        cfg.target_group,
        policy=cfg.policy(),
        thresholds=cfg.thresholds(),
        efftm_override=cfg.efftm,
        default_efftm=cfg.default_efftm,
        repositories=tuple(cfg.repositories),
        areas=tuple(cfg.subject_areas) if cfg.subject_areas else None,
        jobs=cfg.jobs,
    )
    if len(result.resolved) < 2:
        raise DataError(
            f"calibration needs at least 2 resolved pairs, got {len(result.resolved)}"
        )
    by_key = {a.key: a for a in result.tagged}
    by_id = {r.id: r for r in result.split.with_journal}
    pairs = TruePairSet(
        pairs=tuple((by_key[key], by_id[pid]) for key, pid in result.resolved.items())
    )
    grid = calibrate(pairs, cfg.thresholds())
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_grids(grid, cfg.out_dir)
    print(
        f"calibrate[{cfg.target_group}]: {grid.n_pairs} true pairs, "
        f"efftm={grid.efftm:.6f}"
    )
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    fractions = cfg.out_dir / "fractions.csv"
    try:
        written = render_fraction_charts(fractions, cfg.out_dir)
    except ReportError as exc:
        raise DataError(str(exc)) from exc
    print(f"report: wrote {len(written)} chart(s) to {cfg.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arxlink",
        description="Link journal articles to their preprint-server counterparts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in (
        ("ingest", cmd_ingest),
        ("link", cmd_link),
        ("calibrate", cmd_calibrate),
        ("report", cmd_report),
    ):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--target-group", dest="target_group")
        p.add_argument("--ra", dest="ra_threshold", type=float)
        p.add_argument("--rp", dest="rp_threshold", type=float)
        p.add_argument("--efftm", type=float)
        p.add_argument("--grid-step", dest="grid_step", type=float)
        p.add_argument("--jobs", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    overrides = {
        "target_group": args.target_group,
        "ra_threshold": args.ra_threshold,
        "rp_threshold": args.rp_threshold,
        "efftm": args.efftm,
        "grid_step": args.grid_step,
        "jobs": args.jobs,
        "out_dir": args.out,
    }
    try:
        cfg = load_config(args.config, overrides)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, DataError, CalibrationError, PreprintIdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
