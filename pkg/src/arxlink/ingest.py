"""Offline snapshot ingestion: load preprint listings and journal indexes,
deduplicate multi-repository listings, and split by journal-reference
presence.

Snapshot grammar (UTF-8, LF, tab-separated):

    preprint:  id TAB repository TAB comma-joined-subjects TAB title TAB journal_ref_raw
    journal:   journal_group TAB year TAB volume TAB locator TAB title TAB subject_area

The trailing field may be empty.  Lines starting with '#' are comments;
blank lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import JournalArticle, PreprintIdError, PreprintRecord


class IngestError(ValueError):
    """Malformed snapshot or index file; carries file and line context."""

    def __init__(self, path: str | Path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _data_lines(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_no, line


def load_preprint_snapshot(path: str | Path) -> list[PreprintRecord]:
    """Read one preprint snapshot file, one record per non-comment line."""
    records = []
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 5:
            raise IngestError(path, line_no, f"expected 5 fields, got {len(fields)}")
        pid, repository, subjects_raw, title, journal_ref = fields
        if not title.strip():
            raise IngestError(path, line_no, f"empty title for {pid!r}")
        subjects = tuple(s.strip() for s in subjects_raw.split(",") if s.strip())
        if not subjects:
            raise IngestError(path, line_no, f"empty subject list for {pid!r}")
        try:
            records.append(
                PreprintRecord(
                    id=pid.strip(),
                    repository=repository.strip(),
                    subjects=subjects,
                    title=title,
                    journal_ref_raw=journal_ref if journal_ref.strip() else None,
                )
            )
        except PreprintIdError as exc:
            raise IngestError(path, line_no, str(exc)) from exc
    return records


def load_journal_index(path: str | Path) -> list[JournalArticle]:
    """Read a journal index file; duplicate article keys are an error."""
    articles = []
    seen: dict[tuple, int] = {}
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 6:
            raise IngestError(path, line_no, f"expected 6 fields, got {len(fields)}")
        group, year_raw, volume, locator, title, area = (f.strip() for f in fields)
        if not title:
            raise IngestError(path, line_no, "empty title")
        try:
            year = int(year_raw)
        except ValueError:
            raise IngestError(path, line_no, f"bad year {year_raw!r}") from None
        article = JournalArticle(
            journal_group=group,
            year=year,
            volume=volume,
            locator=locator,
            title=title,
            subject_area=area or None,
        )
        if article.key in seen:
            raise IngestError(
                path,
                line_no,
                f"duplicate article key {article.key} (first seen on line {seen[article.key]})",
            )
        seen[article.key] = line_no
        articles.append(article)
    return articles


def write_preprint_snapshot(records: list[PreprintRecord], path: str | Path) -> None:
    lines = []
    for r in records:
        lines.append(
            "\t".join([r.id, r.repository, ",".join(r.subjects), r.title, r.journal_ref_raw or ""])
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def write_journal_index(articles: list[JournalArticle], path: str | Path) -> None:
    lines = []
    for a in articles:
        lines.append(
            "\t".join(
                [a.journal_group, str(a.year), a.volume, a.locator, a.title, a.subject_area or ""]
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def dedup_primary_subject(records: list[PreprintRecord]) -> list[PreprintRecord]:
    """Keep only listings whose first subject area equals the repository.

    Articles cross-listed in several repositories carry the same ordered
    subject list everywhere, so exactly one listing survives and each
    article enters the analysis once.
    """
    return [r for r in records if r.subjects[0] == r.repository]


_SUBMISSION_PREFIX = "submitted"


@dataclass(frozen=True)
class StageCounts:
    after_dedup: int
    with_journal: int
    without_journal: int


@dataclass(frozen=True)
class CorpusSplit:
    """Post-dedup corpus partitioned by journal-reference presence."""

    with_journal: tuple[PreprintRecord, ...]
    without_journal: tuple[PreprintRecord, ...]
    counts: dict[str, StageCounts]


def split_by_journal_presence(records: list[PreprintRecord]) -> CorpusSplit:
    """Partition post-dedup records on a usable journal reference.

    "Submitted to ..." placeholders count as no reference (prefix match,
    case-insensitive).
    """
    with_journal: list[PreprintRecord] = []
    without_journal: list[PreprintRecord] = []
    for r in records:
        ref = r.journal_ref_raw
        if ref and not ref.lstrip().lower().startswith(_SUBMISSION_PREFIX):
            with_journal.append(r)
        else:
            without_journal.append(r)

    counts: dict[str, StageCounts] = {}
    repos = sorted({r.repository for r in records})
    for repo in repos:
        counts[repo] = StageCounts(
            after_dedup=sum(1 for r in records if r.repository == repo),
            with_journal=sum(1 for r in with_journal if r.repository == repo),
            without_journal=sum(1 for r in without_journal if r.repository == repo),
        )
    return CorpusSplit(tuple(with_journal), tuple(without_journal), counts)
