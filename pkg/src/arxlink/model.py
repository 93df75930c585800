"""Core domain types shared by every stage of the linkage pipeline.

All types are immutable after construction and may be shared freely across
parallel workers.  No I/O happens here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class PreprintIdError(ValueError):
    """Raised for preprint identifiers that fit neither id scheme."""


# Old scheme: "hep-ex/9908005" (area, slash, YYMMNNN).  The area may carry a
# dotted subcategory ("math.GT/0309136").  New scheme: "1101.1234" with a
# 4- or 5-digit sequence number.
_OLD_ID = re.compile(r"^[A-Za-z][A-Za-z-]*(?:\.[A-Za-z-]+)?/(\d{7})$")
_NEW_ID = re.compile(r"^(\d{4})\.\d{4,5}$")


def preprint_id_year(preprint_id: str) -> int:
    """Return the submission year encoded in a preprint identifier.

    Two-digit years pivot at 91: 91-99 belong to the 1900s (the server
    started in 1991), everything below to the 2000s.  New-style identifiers
    are unambiguous (2000 + YY).
    """
    m = _OLD_ID.match(preprint_id)
    if m:
        yy = int(m.group(1)[:2])
        return 1900 + yy if yy >= 91 else 2000 + yy
    m = _NEW_ID.match(preprint_id)
    if m:
        return 2000 + int(m.group(1)[:2])
    raise PreprintIdError(f"malformed preprint id: {preprint_id!r}")


def _clean_text(value: str) -> str:
    # Tabs and newlines would break the tab-separated snapshot format, and
    # titles are compared word-wise anyway, so the whitespace class does not
    # matter.
    return re.sub(r"[\t\r\n]", " ", value)


@dataclass(frozen=True)
class PreprintRecord:
    """One preprint-server article as listed in a monthly snapshot."""

    id: str
    repository: str
    subjects: tuple[str, ...]
    title: str
    journal_ref_raw: str | None = None
    id_year: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.subjects:
            raise ValueError(f"preprint {self.id!r} has an empty subject list")
        object.__setattr__(self, "subjects", tuple(self.subjects))
        object.__setattr__(self, "title", _clean_text(self.title).strip())
        if self.journal_ref_raw is not None:
            ref = _clean_text(self.journal_ref_raw).strip()
            object.__setattr__(self, "journal_ref_raw", ref or None)
        object.__setattr__(self, "id_year", preprint_id_year(self.id))


@dataclass(frozen=True)
class ArxivTag:
    """Preprint attribution attached to a journal article."""

    preprint_id: str
    source: str  # "reference" or "title-match"

    def __post_init__(self) -> None:
        if self.source not in ("reference", "title-match"):
            raise ValueError(f"unknown tag source: {self.source!r}")


@dataclass(frozen=True)
class JournalArticle:
    """One published article from a journal index.

    ``(journal_group, year, volume, locator)`` uniquely identifies an
    article within one index; ``locator`` holds the first page or the
    article id, whichever convention the journal uses.
    """

    journal_group: str
    year: int
    volume: str
    locator: str
    title: str
    subject_area: str | None = None
    arxiv_tag: ArxivTag | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "title", _clean_text(self.title).strip())

    @property
    def key(self) -> tuple[str, int, str, str]:
        return (self.journal_group, self.year, self.volume, self.locator)


class ParseStatus(str, Enum):
    OK = "ok"
    YEAR_MISSING = "year_missing"
    UNPARSEABLE = "unparseable"


YEAR_UNKNOWN = 9999


@dataclass(frozen=True)
class ParsedReference:
    """Structured decomposition of a raw journal-reference string."""

    journal_id: str
    journal_group: str
    volume: str | None
    locator: str | None
    year: int
    status: ParseStatus

    def __post_init__(self) -> None:
        if (self.year == YEAR_UNKNOWN) != (self.status is not ParseStatus.OK):
            raise ValueError(
                f"year {self.year} inconsistent with status {self.status.value}"
            )
        if not self.journal_id and self.status is not ParseStatus.UNPARSEABLE:
            raise ValueError("empty journal_id requires unparseable status")


@dataclass(frozen=True)
class MatchRatios:
    """Word-overlap ratios for one candidate title pair.

    ``ra`` divides by the preprint title's retained word count, ``rp`` by
    the journal title's.  Both are 0 when either side retains no words.
    """

    ra: float
    rp: float
    matched_words: int


@dataclass(frozen=True)
class CalibrationGrid:
    """Matcher efficiency and wrong-match probability per threshold cell.

    Row index follows the rp-threshold axis, column index the ra-threshold
    axis, both running over ``thresholds``.
    """

    thresholds: tuple[float, ...]
    efficiency: tuple[tuple[float, ...], ...]
    pran: tuple[tuple[float, ...], ...]
    n_pairs: int

    def rejection(self, i: int, j: int) -> float:
        return 1.0 - self.pran[i][j]

    @property
    def efftm(self) -> float:
        """Efficiency at the strictest cell (both thresholds = 1)."""
        i = self.thresholds.index(1.0)
        return self.efficiency[i][i]


@dataclass(frozen=True)
class CorrelationMatrix:
    """Per-year counts of tagged articles by (repository x subject area)."""

    year: int
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    @property
    def column_totals(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.counts)) if self.counts else ()

    @property
    def grand_total(self) -> int:
        return sum(self.row_totals)
