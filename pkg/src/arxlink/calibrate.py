"""Matcher calibration: efficiency and wrong-match probability grids.

Known true (journal article, preprint) pairs give the matcher's efficiency
per threshold cell; shifting each preprint against the next-published
article manufactures negative pairs whose pass rate estimates the
wrong-match probability (pran).  The strictest-cell efficiency (efftm)
feeds the coverage projection: ppwa = referenced + matched / efftm.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import CalibrationGrid, JournalArticle, MatchRatios, PreprintRecord
from .titlematch import MatchPolicy, is_match, match_ratios, tokenize_title


class CalibrationError(ValueError):
    pass


def default_thresholds(step: float = 0.1) -> tuple[float, ...]:
    """Threshold grid from 1.0 down to 0 in the given step."""
    if not 0.0 < step <= 1.0:
        raise CalibrationError(f"grid step {step} outside (0, 1]")
    n = round(1.0 / step)
    return tuple((n - k) / n for k in range(n + 1))


def _ordinal(value: str) -> tuple[int, int | str]:
    # Numeric volumes/locators order numerically, everything else textually.
    return (0, int(value)) if value.isdigit() else (1, value)


def publication_key(article: JournalArticle) -> tuple:
    return (article.year, _ordinal(article.volume), _ordinal(article.locator))


@dataclass(frozen=True)
class TruePairSet:
    """Known true pairs in publication order; one article appears once."""

    pairs: tuple[tuple[JournalArticle, PreprintRecord], ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.pairs, key=lambda p: publication_key(p[0])))
        object.__setattr__(self, "pairs", ordered)
        keys = [a.key for a, _ in ordered]
        if len(keys) != len(set(keys)):
            raise CalibrationError("a journal article appears in more than one true pair")

    def __len__(self) -> int:
        return len(self.pairs)


def _pair_ratios(pairs) -> list[MatchRatios]:
    return [
        match_ratios(tokenize_title(article.title), tokenize_title(preprint.title))
        for article, preprint in pairs
    ]


def _pass_fraction_grid(
    ratios: list[MatchRatios], thresholds: tuple[float, ...]
) -> tuple[tuple[float, ...], ...]:
    n = len(ratios)
    rows = []
    for rp_t in thresholds:
        row = []
        for ra_t in thresholds:
            policy = MatchPolicy(ra_threshold=ra_t, rp_threshold=rp_t)
            passed = sum(1 for r in ratios if is_match(r, policy))
            row.append(passed / n)
        rows.append(tuple(row))
    return tuple(rows)


def efficiency_grid(
    pairs: TruePairSet, thresholds: tuple[float, ...] | None = None
) -> tuple[tuple[float, ...], ...]:
    """Fraction of true pairs recovered at each (rp, ra) threshold cell."""
    if len(pairs) == 0:
        raise CalibrationError("cannot calibrate on an empty pair set")
    thresholds = thresholds or default_thresholds()
    return _pass_fraction_grid(_pair_ratios(pairs.pairs), thresholds)


def negative_pairs(
    pairs: TruePairSet,
) -> list[tuple[JournalArticle, PreprintRecord]]:
    """Mismatched pairs: each preprint against the next-published article.

    The last preprint has no successor and is dropped.
    """
    if len(pairs) < 2:
        raise CalibrationError("need at least 2 true pairs to build negative pairs")
    ordered = pairs.pairs
    return [(ordered[i + 1][0], ordered[i][1]) for i in range(len(ordered) - 1)]


def random_match_grid(
    pairs: TruePairSet, thresholds: tuple[float, ...] | None = None
) -> tuple[tuple[float, ...], ...]:
    """Fraction of negative pairs passing at each threshold cell (pran)."""
    thresholds = thresholds or default_thresholds()
    return _pass_fraction_grid(_pair_ratios(negative_pairs(pairs)), thresholds)


def calibrate(
    pairs: TruePairSet, thresholds: tuple[float, ...] | None = None
) -> CalibrationGrid:
    """Run both grids over the same pair set."""
    thresholds = thresholds or default_thresholds()
    return CalibrationGrid(
        thresholds=thresholds,
        efficiency=efficiency_grid(pairs, thresholds),
        pran=random_match_grid(pairs, thresholds),
        n_pairs=len(pairs),
    )


def expected_recoveries(count: int, efftm: float) -> float:
    """Matches the calibrated matcher should recover out of `count` truths."""
    if count < 0:
        raise CalibrationError(f"count must be non-negative, got {count}")
    if not 0.0 < efftm <= 1.0:
        raise CalibrationError(f"efftm {efftm} outside (0, 1]")
    return count * efftm


@dataclass(frozen=True)
class Projection:
    """Efficiency-corrected estimate of articles with a preprint counterpart."""

    referenced_count: int
    matched_count: int
    efftm: float
    ppwa: float
    denominator: int
    fraction: float
    over_unity: bool


def project(
    referenced: int, matched: int, efftm: float, denominator: int
) -> Projection:
    """ppwa = referenced + matched / efftm; fraction = ppwa / denominator.

    Fractions above 1 are reported as-is with a warning flag.
    """
    if denominator < 1:
        raise CalibrationError(f"denominator must be >= 1, got {denominator}")
    if not 0.0 < efftm <= 1.0:
        raise CalibrationError(f"efftm {efftm} outside (0, 1]")
    ppwa = referenced + matched / efftm
    fraction = ppwa / denominator
    return Projection(
        referenced_count=referenced,
        matched_count=matched,
        efftm=efftm,
        ppwa=ppwa,
        denominator=denominator,
        fraction=fraction,
        over_unity=fraction > 1.0,
    )


def _grid_csv(thresholds: tuple[float, ...], matrix) -> str:
    header = "rp_threshold," + ",".join(f"{t:g}" for t in thresholds)
    lines = [header]
    for rp_t, row in zip(thresholds, matrix):
        lines.append(f"{rp_t:g}," + ",".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"


def write_grids(grid: CalibrationGrid, out_dir: str | Path) -> dict[str, Path]:
    """Emit efficiency.csv / pran.csv (thresholds on both margins) and the
    scalar efftm.txt."""
    out = Path(out_dir)
    paths = {
        "efficiency": out / "efficiency.csv",
        "pran": out / "pran.csv",
        "efftm": out / "efftm.txt",
    }
    paths["efficiency"].write_text(_grid_csv(grid.thresholds, grid.efficiency), encoding="utf-8")
    paths["pran"].write_text(_grid_csv(grid.thresholds, grid.pran), encoding="utf-8")
    paths["efftm"].write_text(f"{grid.efftm:.6f}\n", encoding="utf-8")
    return paths
