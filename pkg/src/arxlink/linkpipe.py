"""End-to-end linkage: resolve parsed references against the journal index,
tag the journal corpus, title-match the untagged remainder, run the
negative-control purity check, and derive per-year statistics.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from pathlib import Path

from .calibrate import (
    Projection,
    TruePairSet,
    calibrate,
    default_thresholds,
    expected_recoveries,
    project,
    publication_key,
)
from .ingest import CorpusSplit, dedup_primary_subject, split_by_journal_presence
from .model import (
    YEAR_UNKNOWN,
    ArxivTag,
    CalibrationGrid,
    CorrelationMatrix,
    JournalArticle,
    ParsedReference,
    ParseStatus,
    PreprintRecord,
)
from .refparse import CONF_GROUP, OTHER_GROUP, JournalGroupConfig, parse_reference
from .titlematch import JournalKey, MatchPolicy, MatchReport, find_matches
from .util import atomic_write

DEFAULT_REPOSITORIES = (
    "hep-ex", "hep-ph", "hep-th", "hep-lat", "nucl-ex", "nucl-th", "astro-ph",
)

DEFAULT_SUBJECT_AREAS = {
    "PLB": ("Astr", "Expe", "Phen", "Theo", "None"),
    "PRL": ("EPF", "NP", "GA", "Other"),
}

NO_AREA = "None"

REASON_NO_KEY = "no_such_volume_page"
REASON_YEAR = "year_conflict"
REASON_UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class Unresolved:
    preprint_id: str
    parsed: ParsedReference
    reason: str


def build_resolution_index(
    articles: list[JournalArticle],
) -> dict[tuple[str, str, str], list[JournalArticle]]:
    """Lookup table keyed by (group, volume, locator); the year is checked
    separately with a +-1 tolerance."""
    index: dict[tuple[str, str, str], list[JournalArticle]] = defaultdict(list)
    for a in articles:
        index[(a.journal_group, a.volume, a.locator)].append(a)
    for entries in index.values():
        entries.sort(key=publication_key)
    return dict(index)


def resolve_reference(
    ref: ParsedReference,
    index: dict[tuple[str, str, str], list[JournalArticle]],
) -> tuple[JournalKey | None, str | None]:
    """Resolve a parsed reference to an article key, or explain the failure.

    Print and online publication years drift, so a +-1 year difference is
    tolerated; the 9999 sentinel bypasses the year check entirely.
    """
    if ref.status is ParseStatus.UNPARSEABLE:
        return None, REASON_UNPARSEABLE
    if ref.volume is None or ref.locator is None:
        return None, REASON_NO_KEY
    entries = index.get((ref.journal_group, ref.volume, ref.locator))
    if not entries:
        return None, REASON_NO_KEY
    if ref.year == YEAR_UNKNOWN:
        return entries[0].key, None
    for article in entries:
        if abs(ref.year - article.year) <= 1:
            return article.key, None
    return None, REASON_YEAR


ParsedItem = tuple[PreprintRecord, ParsedReference]


def split_by_target(
    parsed_items: list[ParsedItem], target_group: str
) -> tuple[list[ParsedItem], list[ParsedItem]]:
    """Partition parsed with-journal preprints on the target journal group."""
    with_target = [item for item in parsed_items if item[1].journal_group == target_group]
    with_other = [item for item in parsed_items if item[1].journal_group != target_group]
    return with_target, with_other


@dataclass(frozen=True)
class TagConflict:
    journal_key: JournalKey
    kept_preprint_id: str
    dropped_preprint_id: str
    kind: str  # "duplicate_reference" or "title_match_vs_reference"


def tag_corpus(
    articles: list[JournalArticle],
    resolved_links: dict[JournalKey, str],
    title_matches: dict[JournalKey, str],
) -> tuple[list[JournalArticle], list[TagConflict]]:
    """Apply reference tags first, then title-match tags to untagged articles.

    A reference tag is never overwritten; colliding title matches are
    recorded as conflicts instead.
    """
    by_key = {a.key: a for a in articles}
    for key in list(resolved_links) + list(title_matches):
        if key not in by_key:
            raise KeyError(f"link to unknown journal article {key}")

    conflicts: list[TagConflict] = []
    tags: dict[JournalKey, ArxivTag] = {}
    for key in sorted(resolved_links):
        tags[key] = ArxivTag(preprint_id=resolved_links[key], source="reference")
    for key in sorted(title_matches):
        if key in tags:
            conflicts.append(
                TagConflict(
                    journal_key=key,
                    kept_preprint_id=tags[key].preprint_id,
                    dropped_preprint_id=title_matches[key],
                    kind="title_match_vs_reference",
                )
            )
            continue
        tags[key] = ArxivTag(preprint_id=title_matches[key], source="title-match")

    tagged = [
        replace(a, arxiv_tag=tags[a.key]) if a.key in tags else a for a in articles
    ]
    return tagged, conflicts


@dataclass(frozen=True)
class PurityHit:
    journal_key: JournalKey
    preprint_id: str
    preprint_group: str
    classification: str  # "broken_target_reference" or "random_match"


@dataclass(frozen=True)
class PurityReport:
    hits: tuple[PurityHit, ...]
    broken_count: int
    random_count: int
    n_unresolved: int
    expected_broken: float | None
    report: MatchReport


def purity_check(
    untagged_pubs: list[JournalArticle],
    with_journal_items: list[ParsedItem],
    policy: MatchPolicy,
    target_group: str,
    n_unresolved: int,
    efftm: float | None,
    jobs: int = 1,
) -> PurityReport:
    """Match reference-less journal articles against preprints that already
    carry references: every hit is either a broken target reference or a
    random match, and the broken count should track
    expected_recoveries(n_unresolved, efftm)."""
    group_of = {rec.id: parsed.journal_group for rec, parsed in with_journal_items}
    report = find_matches(
        untagged_pubs, [rec for rec, _ in with_journal_items], policy, jobs=jobs
    )
    hits = []
    for m in report.matches:
        group = group_of[m.preprint_id]
        hits.append(
            PurityHit(
                journal_key=m.journal_key,
                preprint_id=m.preprint_id,
                preprint_group=group,
                classification=(
                    "broken_target_reference" if group == target_group else "random_match"
                ),
            )
        )
    broken = sum(1 for h in hits if h.classification == "broken_target_reference")
    expected = None
    if efftm is not None and 0.0 < efftm <= 1.0:
        expected = expected_recoveries(n_unresolved, efftm)
    return PurityReport(
        hits=tuple(hits),
        broken_count=broken,
        random_count=len(hits) - broken,
        n_unresolved=n_unresolved,
        expected_broken=expected,
        report=report,
    )


def _area_label(article: JournalArticle, areas: tuple[str, ...]) -> str:
    label = article.subject_area if article.subject_area else NO_AREA
    return label if label in areas else OTHER_GROUP


def correlation_matrix(
    tagged: list[JournalArticle],
    year: int,
    repo_of: dict[str, str],
    repositories: tuple[str, ...] = DEFAULT_REPOSITORIES,
    areas: tuple[str, ...] = DEFAULT_SUBJECT_AREAS["PLB"],
) -> CorrelationMatrix:
    """Count tagged articles published in `year` by (repository x area).

    Articles outside the configured subject areas land in "Other".
    """
    columns = tuple(areas) if OTHER_GROUP in areas else tuple(areas) + (OTHER_GROUP,)
    rows = list(repositories)
    cells = Counter()
    for a in tagged:
        if a.year != year or a.arxiv_tag is None:
            continue
        repo = repo_of.get(a.arxiv_tag.preprint_id, OTHER_GROUP)
        if repo not in rows:
            rows.append(repo)
        cells[(repo, _area_label(a, columns))] += 1
    counts = tuple(
        tuple(cells.get((repo, area), 0) for area in columns) for repo in rows
    )
    return CorrelationMatrix(year=year, rows=tuple(rows), columns=columns, counts=counts)


@dataclass(frozen=True)
class FractionRow:
    year: int
    area: str  # "all" or a subject-area label
    journal_total: int
    referenced: int
    matched: int
    projection: Projection


def fraction_series(
    tagged: list[JournalArticle],
    efftm: float,
    areas: tuple[str, ...] = DEFAULT_SUBJECT_AREAS["PLB"],
) -> list[FractionRow]:
    """Per-year (and per-area) referenced / matched / projected coverage.

    Years (or areas within a year) with zero publications are omitted.
    """
    columns = tuple(areas) if OTHER_GROUP in areas else tuple(areas) + (OTHER_GROUP,)
    scopes: dict[tuple[int, str], list[int]] = defaultdict(lambda: [0, 0, 0])
    for a in tagged:
        labels = ("all", _area_label(a, columns))
        for label in labels:
            slot = scopes[(a.year, label)]
            slot[0] += 1
            if a.arxiv_tag is not None:
                if a.arxiv_tag.source == "reference":
                    slot[1] += 1
                else:
                    slot[2] += 1

    area_rank = {label: i for i, label in enumerate(("all",) + columns)}
    rows = []
    for (year, label) in sorted(scopes, key=lambda k: (k[0], area_rank.get(k[1], 99))):
        total, referenced, matched = scopes[(year, label)]
        if total == 0:
            continue
        rows.append(
            FractionRow(
                year=year,
                area=label,
                journal_total=total,
                referenced=referenced,
                matched=matched,
                projection=project(referenced, matched, efftm, total),
            )
        )
    return rows


@dataclass(frozen=True)
class JournalYearTable:
    """Counts of parsed with-journal references per (repository, year, group)."""

    columns: tuple[str, ...]
    counts: dict[tuple[str, int], dict[str, int]]

    def row_total(self, repo: str, year: int) -> int:
        return sum(self.counts.get((repo, year), {}).values())


def tabulate_journal_year(
    parsed_items: list[ParsedItem], cfg: JournalGroupConfig
) -> JournalYearTable:
    """Tabulate the with-journal corpus by journal group and publication year,
    with 9999 collecting references whose year could not be determined."""
    groups = list(cfg.known_groups)
    for extra in (CONF_GROUP, OTHER_GROUP):
        if extra not in groups:
            groups.append(extra)
    counts: dict[tuple[str, int], dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for record, parsed in parsed_items:
        counts[(record.repository, parsed.year)][parsed.journal_group] += 1
    plain = {key: dict(value) for key, value in counts.items()}
    return JournalYearTable(columns=tuple(groups), counts=plain)


@dataclass
class LinkageResult:
    target_group: str
    split: CorpusSplit
    parsed_items: list[ParsedItem]
    with_target: list[ParsedItem]
    with_other: list[ParsedItem]
    resolved: dict[JournalKey, str]
    duplicates: list[TagConflict]
    unresolved: list[Unresolved]
    calibration: CalibrationGrid | None
    efftm: float
    efftm_source: str  # "override", "calibrated", or "default"
    match_report: MatchReport
    purity: PurityReport
    tagged: list[JournalArticle]
    conflicts: list[TagConflict]
    matrices: dict[int, CorrelationMatrix]
    fractions: list[FractionRow]
    journal_year: JournalYearTable
    repo_of: dict[str, str]


def run_linkage(
    preprints: list[PreprintRecord],
    journal_articles: list[JournalArticle],
    cfg: JournalGroupConfig,
    target_group: str,
    policy: MatchPolicy | None = None,
    thresholds: tuple[float, ...] | None = None,
    efftm_override: float | None = None,
    default_efftm: float = 0.64,
    repositories: tuple[str, ...] = DEFAULT_REPOSITORIES,
    areas: tuple[str, ...] | None = None,
    jobs: int = 1,
) -> LinkageResult:
    """Run the whole linkage pipeline over loaded corpora."""
    policy = policy or MatchPolicy()
    thresholds = thresholds or default_thresholds()
    # The run is defined over the target journal's corpus; index rows for
    # other groups are ignored.
    corpus = [a for a in journal_articles if a.journal_group == target_group]
    if areas is None:
        areas = DEFAULT_SUBJECT_AREAS.get(target_group, _observed_areas(corpus))

    deduped = dedup_primary_subject(preprints)
    split = split_by_journal_presence(deduped)
    parsed_items: list[ParsedItem] = [
        (rec, parse_reference(rec.journal_ref_raw or "", cfg)) for rec in split.with_journal
    ]
    with_target, with_other = split_by_target(parsed_items, target_group)

    index = build_resolution_index(corpus)
    by_key = {a.key: a for a in corpus}

    resolved: dict[JournalKey, str] = {}
    duplicates: list[TagConflict] = []
    unresolved: list[Unresolved] = []
    for record, parsed in sorted(with_target, key=lambda item: item[0].id):
        key, reason = resolve_reference(parsed, index)
        if key is None:
            unresolved.append(Unresolved(record.id, parsed, reason))
        elif key in resolved:
            duplicates.append(
                TagConflict(
                    journal_key=key,
                    kept_preprint_id=resolved[key],
                    dropped_preprint_id=record.id,
                    kind="duplicate_reference",
                )
            )
        else:
            resolved[key] = record.id

    repo_of = {r.id: r.repository for r in deduped}

    calibration = None
    efftm_source = "default"
    efftm = default_efftm
    if len(resolved) >= 2:
        preprint_by_id = {r.id: r for r in split.with_journal}
        pair_set = TruePairSet(
            pairs=tuple(
                (by_key[key], preprint_by_id[pid]) for key, pid in resolved.items()
            )
        )
        calibration = calibrate(pair_set, thresholds)
        if calibration.efftm > 0.0:
            efftm = calibration.efftm
            efftm_source = "calibrated"
    if efftm_override is not None:
        efftm = efftm_override
        efftm_source = "override"

    untagged = [a for a in corpus if a.key not in resolved]
    match_report = find_matches(untagged, list(split.without_journal), policy, jobs=jobs)
    title_tags = {
        key: match.preprint_id for key, match in match_report.unambiguous().items()
    }

    purity = purity_check(
        untagged, parsed_items, policy, target_group, len(unresolved), efftm, jobs=jobs
    )

    tagged, conflicts = tag_corpus(corpus, resolved, title_tags)
    years = sorted({a.year for a in tagged if a.arxiv_tag is not None})
    matrices = {
        year: correlation_matrix(tagged, year, repo_of, repositories, areas)
        for year in years
    }
    fractions = fraction_series(tagged, efftm, areas)
    journal_year = tabulate_journal_year(parsed_items, cfg)

    return LinkageResult(
        target_group=target_group,
        split=split,
        parsed_items=parsed_items,
        with_target=with_target,
        with_other=with_other,
        resolved=resolved,
        duplicates=duplicates,
        unresolved=unresolved,
        calibration=calibration,
        efftm=efftm,
        efftm_source=efftm_source,
        match_report=match_report,
        purity=purity,
        tagged=tagged,
        conflicts=conflicts,
        matrices=matrices,
        fractions=fractions,
        journal_year=journal_year,
        repo_of=repo_of,
    )


def _observed_areas(articles: list[JournalArticle]) -> tuple[str, ...]:
    observed = sorted({a.subject_area for a in articles if a.subject_area})
    return tuple(observed) + (NO_AREA,)


def _sort_key(article: JournalArticle) -> tuple:
    return (article.journal_group,) + publication_key(article)


def write_outputs(result: LinkageResult, out_dir: str | Path) -> list[Path]:
    """Emit every linkage artifact (UTF-8, header row first) atomically."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    lines = ["journal_group\tyear\tvolume\tlocator\tsubject_area\ttitle\tpreprint_id\ttag_source"]
    for a in sorted(result.tagged, key=_sort_key):
        tag = a.arxiv_tag
        lines.append(
            "\t".join(
                [
                    a.journal_group,
                    str(a.year),
                    a.volume,
                    a.locator,
                    a.subject_area or "",
                    a.title,
                    tag.preprint_id if tag else "",
                    tag.source if tag else "",
                ]
            )
        )
    written.append(atomic_write(out / "linkage.tsv", "\n".join(lines) + "\n"))

    lines = ["preprint_id\tjournal_id\tjournal_group\tvolume\tlocator\tyear\tstatus\treason"]
    for u in sorted(result.unresolved, key=lambda u: u.preprint_id):
        p = u.parsed
        lines.append(
            "\t".join(
                [
                    u.preprint_id,
                    p.journal_id,
                    p.journal_group,
                    p.volume or "",
                    p.locator or "",
                    str(p.year),
                    p.status.value,
                    u.reason,
                ]
            )
        )
    written.append(atomic_write(out / "unresolved.tsv", "\n".join(lines) + "\n"))

    lines = ["journal_group\tyear\tvolume\tlocator\tpreprint_id\tra\trp\tambiguous_flag"]
    for m in result.match_report.matches:
        group, year, volume, locator = m.journal_key
        lines.append(
            f"{group}\t{year}\t{volume}\t{locator}\t{m.preprint_id}"
            f"\t{m.ratios.ra:.6f}\t{m.ratios.rp:.6f}\t{int(m.ambiguous)}"
        )
    written.append(atomic_write(out / "matches.tsv", "\n".join(lines) + "\n"))

    for year, matrix in sorted(result.matrices.items()):
        lines = ["repository," + ",".join(matrix.columns) + ",total"]
        for repo, row, total in zip(matrix.rows, matrix.counts, matrix.row_totals):
            lines.append(f"{repo}," + ",".join(str(c) for c in row) + f",{total}")
        col_totals = matrix.column_totals or tuple(0 for _ in matrix.columns)
        lines.append("total," + ",".join(str(c) for c in col_totals) + f",{matrix.grand_total}")
        written.append(atomic_write(out / f"correlation_{year}.csv", "\n".join(lines) + "\n"))

    lines = [
        "year,area,journal_total,referenced,matched,"
        "referenced_fraction,matched_fraction,ppwa,projected_fraction,over_unity"
    ]
    for row in result.fractions:
        proj = row.projection
        lines.append(
            f"{row.year},{row.area},{row.journal_total},{row.referenced},{row.matched},"
            f"{row.referenced / row.journal_total:.6f},{row.matched / row.journal_total:.6f},"
            f"{proj.ppwa:.6f},{proj.fraction:.6f},{int(proj.over_unity)}"
        )
    written.append(atomic_write(out / "fractions.csv", "\n".join(lines) + "\n"))

    table = result.journal_year
    lines = ["repository,year," + ",".join(table.columns) + ",total"]
    for repo, year in sorted(table.counts):
        row = table.counts[(repo, year)]
        cells = [str(row.get(group, 0)) for group in table.columns]
        lines.append(f"{repo},{year}," + ",".join(cells) + f",{table.row_total(repo, year)}")
    written.append(atomic_write(out / "journal_year.csv", "\n".join(lines) + "\n"))

    purity = result.purity
    expected = "" if purity.expected_broken is None else f"{purity.expected_broken:.6f}"
    lines = [
        "metric,value",
        f"total_hits,{len(purity.hits)}",
        f"broken_target_reference,{purity.broken_count}",
        f"random_match,{purity.random_count}",
        f"unresolved_references,{purity.n_unresolved}",
        f"expected_broken,{expected}",
    ]
    written.append(atomic_write(out / "purity.csv", "\n".join(lines) + "\n"))

    lines = ["journal_group\tyear\tvolume\tlocator\tpreprint_id\tpreprint_group\tclassification"]
    for h in purity.hits:
        group, year, volume, locator = h.journal_key
        lines.append(
            f"{group}\t{year}\t{volume}\t{locator}\t{h.preprint_id}"
            f"\t{h.preprint_group}\t{h.classification}"
        )
    written.append(atomic_write(out / "purity_hits.tsv", "\n".join(lines) + "\n"))

    return written
