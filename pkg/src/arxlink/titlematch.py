"""Title tokenization and word-overlap matching.

A title is reduced to a bag of comparison-normalized words; two titles are
compared by counting shared words irrespective of position and forming two
ratios: ``ra`` (matched / preprint words) and ``rp`` (matched / journal
words).  The corpus matcher pairs every journal article against preprints
from the same or previous year, using an inverted token index to generate
candidates without changing the result of the exhaustive comparison.
"""

from __future__ import annotations

import math
import multiprocessing
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .model import JournalArticle, MatchRatios, PreprintRecord

JournalKey = tuple[str, int, str, str]


@dataclass(frozen=True)
class TokenBag:
    """Multiset of retained title words, normalized for comparison."""

    counts: tuple[tuple[str, int], ...]
    n: int

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)


@dataclass(frozen=True)
class MatchPolicy:
    """Acceptance thresholds; a threshold of 0 disables that axis."""

    ra_threshold: float = 1.0
    rp_threshold: float = 1.0

    def __post_init__(self) -> None:
        for t in (self.ra_threshold, self.rp_threshold):
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"threshold {t} outside [0, 1]")


def _strip_edges(word: str) -> str:
    i, j = 0, len(word)
    while i < j and not word[i].isalnum():
        i += 1
    while j > i and not word[j - 1].isalnum():
        j -= 1
    return word[i:j]


def _retained_words(title: str) -> list[str]:
    kept = []
    for raw in title.split():
        if "$" in raw:
            continue
        word = _strip_edges(raw)
        n = len(word)
        if n <= 1:
            continue
        if n < 4 and not (word.isalpha() and word.isupper()):
            continue
        kept.append(word.lower())
    return kept


def tokenize_title(title: str) -> TokenBag:
    """Reduce a title to its retained word bag.

    Words are whitespace-delimited with edge punctuation stripped; one-letter
    words, words under four characters (unless fully uppercase), and words
    carrying a '$' (TeX markup) are dropped.  Survivors compare
    case-insensitively.
    """
    counter = Counter(_retained_words(title))
    return TokenBag(counts=tuple(sorted(counter.items())), n=sum(counter.values()))


def _matched_words(a: dict[str, int], b: dict[str, int]) -> int:
    if len(b) < len(a):
        a, b = b, a
    total = 0
    for token, count in a.items():
        other = b.get(token)
        if other:
            total += count if count < other else other
    return total


def match_ratios(journal: TokenBag, arxiv: TokenBag) -> MatchRatios:
    """Count shared words (with multiplicity) and form both overlap ratios."""
    if journal.n == 0 or arxiv.n == 0:
        return MatchRatios(ra=0.0, rp=0.0, matched_words=0)
    matched = _matched_words(journal.as_dict(), arxiv.as_dict())
    return MatchRatios(ra=matched / arxiv.n, rp=matched / journal.n, matched_words=matched)


def is_match(ratios: MatchRatios, policy: MatchPolicy) -> bool:
    return ratios.ra >= policy.ra_threshold and ratios.rp >= policy.rp_threshold


@dataclass(frozen=True)
class TitleMatch:
    journal_key: JournalKey
    preprint_id: str
    ratios: MatchRatios
    ambiguous: bool = False


@dataclass(frozen=True)
class MatchReport:
    """Sorted corpus-matching output plus bookkeeping for diagnostics."""

    matches: tuple[TitleMatch, ...]
    unmatchable: tuple[JournalKey, ...]
    n_candidates_evaluated: int = 0

    def matched_keys(self) -> set[JournalKey]:
        return {m.journal_key for m in self.matches}

    def unambiguous(self) -> dict[JournalKey, TitleMatch]:
        return {m.journal_key: m for m in self.matches if not m.ambiguous}


class TokenIndex:
    """Inverted index from retained token to preprint positions."""

    def __init__(self, preprints: list[PreprintRecord]):
        self.bags = [tokenize_title(p.title).as_dict() for p in preprints]
        self.sizes = [sum(bag.values()) for bag in self.bags]
        self.years = [p.id_year for p in preprints]
        self.postings: dict[str, list[int]] = {}
        for pos, bag in enumerate(self.bags):
            for token in bag:
                self.postings.setdefault(token, []).append(pos)

    def document_frequency(self, token: str) -> int:
        return len(self.postings.get(token, ()))

    def candidates(self, bag: dict[str, int], rp_threshold: float) -> list[int]:
        """Candidate positions guaranteed to cover every rp-passing preprint.

        With rp_threshold = 1 every journal token must appear, so the rarest
        token's posting list is already a complete superset.  Below 1, a
        matching preprint can miss at most a bounded number of distinct
        tokens, so unioning the ceil((1-rp)*n)+1 rarest posting lists keeps
        the candidate set complete.
        """
        if not bag:
            return []
        n = sum(bag.values())
        if rp_threshold <= 0.0:
            return list(range(len(self.bags)))
        tokens = sorted(bag, key=self.document_frequency)
        if rp_threshold >= 1.0:
            take = 1
        else:
            take = min(len(tokens), math.ceil((1.0 - rp_threshold) * n) + 1)
        if take == 1:
            return self.postings.get(tokens[0], [])
        seen: set[int] = set()
        for token in tokens[:take]:
            seen.update(self.postings.get(token, ()))
        return sorted(seen)


def build_token_index(preprints: list[PreprintRecord]) -> TokenIndex:
    return TokenIndex(list(preprints))


def _year_window(year: int) -> tuple[int, int]:
    # A preprint precedes or coincides with its journal publication year.
    return (year, year - 1)


def _match_article_positions(
    pub: JournalArticle,
    bag: dict[str, int],
    index: TokenIndex,
    policy: MatchPolicy,
) -> tuple[list[tuple[str, float, float, int]], int]:
    n_journal = sum(bag.values())
    allowed = _year_window(pub.year)
    ra_t, rp_t = policy.ra_threshold, policy.rp_threshold
    hits = []
    evaluated = 0
    for pos in index.candidates(bag, rp_t):
        if index.years[pos] not in allowed:
            continue
        other = index.bags[pos]
        n_arxiv = index.sizes[pos]
        evaluated += 1
        if n_journal == 0 or n_arxiv == 0:
            ra = rp = 0.0
            matched = 0
        else:
            matched = _matched_words(bag, other)
            ra = matched / n_arxiv
            rp = matched / n_journal
        if ra >= ra_t and rp >= rp_t:
            hits.append((pos, ra, rp, matched))
    return hits, evaluated


_SHARED: dict | None = None


def _match_chunk(span: tuple[int, int]) -> tuple[list, int]:
    state = _SHARED
    assert state is not None
    out = []
    evaluated = 0
    for i in range(*span):
        pub = state["pubs"][i]
        hits, n = _match_article_positions(pub, state["bags"][i], state["index"], state["policy"])
        evaluated += n
        out.extend((i, pos, ra, rp, matched) for pos, ra, rp, matched in hits)
    return out, evaluated


def find_matches(
    journal_pubs: list[JournalArticle],
    preprints: list[PreprintRecord],
    policy: MatchPolicy | None = None,
    jobs: int = 1,
    index: TokenIndex | None = None,
) -> MatchReport:
    """Match every journal article against year-compatible preprints.

    Output is sorted by (journal key, preprint id) and independent of the
    worker count; articles matching two or more preprints are flagged
    ambiguous on every one of their rows.
    """
    policy = policy or MatchPolicy()
    pubs = list(journal_pubs)
    if index is None:
        index = build_token_index(list(preprints))
    journal_bags = [tokenize_title(p.title).as_dict() for p in pubs]
    unmatchable = tuple(pub.key for pub, bag in zip(pubs, journal_bags) if not bag)

    spans = _spans(len(pubs), jobs)
    global _SHARED
    if jobs > 1 and len(spans) > 1 and _fork_available():
        _SHARED = {"pubs": pubs, "bags": journal_bags, "index": index, "policy": policy}
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
                parts = list(pool.map(_match_chunk, spans))
        finally:
            _SHARED = None
    else:
        _SHARED = {"pubs": pubs, "bags": journal_bags, "index": index, "policy": policy}
        try:
            parts = [_match_chunk(span) for span in spans]
        finally:
            _SHARED = None

    raw_hits: list[tuple[int, int, float, float, int]] = []
    evaluated = 0
    for hits, n in parts:
        raw_hits.extend(hits)
        evaluated += n

    per_article = Counter(i for i, *_ in raw_hits)
    preprint_list = list(preprints)
    matches = [
        TitleMatch(
            journal_key=pubs[i].key,
            preprint_id=preprint_list[pos].id,
            ratios=MatchRatios(ra=ra, rp=rp, matched_words=matched),
            ambiguous=per_article[i] > 1,
        )
        for i, pos, ra, rp, matched in raw_hits
    ]
    matches.sort(key=lambda m: (m.journal_key, m.preprint_id))
    return MatchReport(
        matches=tuple(matches),
        unmatchable=tuple(sorted(unmatchable)),
        n_candidates_evaluated=evaluated,
    )


def _spans(total: int, jobs: int) -> list[tuple[int, int]]:
    if total == 0:
        return []
    jobs = max(1, min(jobs, total))
    step = math.ceil(total / jobs)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _fork_available() -> bool:
    try:
        return "fork" in multiprocessing.get_all_start_methods()
    except Exception:
        return False


def write_match_report(report: MatchReport, path: str | Path) -> None:
    """Write the match output file: one tab-separated row per pair, sorted."""
    lines = ["journal_group\tyear\tvolume\tlocator\tpreprint_id\tra\trp\tambiguous_flag"]
    for m in report.matches:
        group, year, volume, locator = m.journal_key
        lines.append(
            f"{group}\t{year}\t{volume}\t{locator}\t{m.preprint_id}"
            f"\t{m.ratios.ra:.6f}\t{m.ratios.rp:.6f}\t{int(m.ambiguous)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
