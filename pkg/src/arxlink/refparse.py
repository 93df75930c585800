"""Decompose free-text journal references into (journal, volume, locator, year).

Recognition works on a short uppercase key: the first up-to-four capital
letters of the reference, collected before the volume digits begin.  Keys
map many-to-one onto canonical journal groups; proceedings-style references
are caught first by a substring marker list and grouped under "Conf".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import YEAR_UNKNOWN, ParsedReference, ParseStatus

# Markers that flag conference/proceedings references.  Matching is
# case-sensitive substring search, in this order.
CONFERENCE_MARKERS: tuple[str, ...] = (
    "conf", "CONF", "Conf", "Proc", "PoS", "Pos", "PROC", "work",
    "Works", "Renc", "Serie", "IEEE", "ICFA", "proc", "Symp",
)

# Default journal-id -> journal-group table.  Order matters only for the
# derived known-group listing.
DEFAULT_ID_TO_GROUP: dict[str, str] = {
    "CONF": "Conf",
    "JINS": "JINST",
    "PRD": "PRD",
    "JHEP": "JHEP",
    "EPJC": "EPJC",
    "TEPJ": "EPJC",
    "EPJA": "EPJA",
    "EJPA": "EPJA",
    "PLB": "PLB",
    "PLBV": "PLB",
    "PRL": "PRL",
    "PRLV": "PRL",
    "PRC": "PRC",
    "PRA": "PRA",
    "NJP": "New J Phys",
    "NPB": "NPB",
    "NPA": "NPA",
    "SCPM": "China",
    "CJPV": "China",
    "JPG": "JPhyG",
    "NCA": "NuovoCim",
    "NCB": "NuovoCim",
    "NCC": "NuovoCim",
    "INCC": "NuovoCim",
    "NIM": "NIM",
    "NIMB": "NIM",
    "NIMP": "NIM",
    "AP": "Astro",
    "ASS": "Astro",
    "IJMP": "IJMP",
    "PPNP": "Review",
    "ARNP": "Review",
    "RMP": "Review",
    "LNP": "Review",
    "RPP": "Review",
    "APPB": "Acta",
    "APPS": "Acta",
    "APHA": "Acta",
    "APS": "Acta",
    "CJP": "Acta",
    "P": "Acta",
    "PAN": "PAN",
    "PTP": "PTP",
    "PTEP": "PTEP",
    "FBS": "FBS",
    "HIP": "HIP",
}

OTHER_GROUP = "Other"
CONF_GROUP = "Conf"
CONF_ID = "CONF"


@dataclass(frozen=True)
class JournalGroupConfig:
    """Journal-id mapping table plus the conference marker list."""

    id_to_group: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ID_TO_GROUP))
    conference_markers: tuple[str, ...] = CONFERENCE_MARKERS

    def __post_init__(self) -> None:
        if not self.conference_markers:
            raise ValueError("conference marker list must not be empty")

    @property
    def known_groups(self) -> tuple[str, ...]:
        seen: list[str] = []
        for group in self.id_to_group.values():
            if group not in seen:
                seen.append(group)
        return tuple(seen)


def load_group_config(path: str | Path) -> JournalGroupConfig:
    """Read a group-config file: `id TAB group` lines, then a `[conference]`
    section with one marker per line."""
    id_to_group: dict[str, str] = {}
    markers: list[str] = []
    section = "mapping"
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() == "[conference]":
            section = "conference"
            continue
        if section == "mapping":
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ValueError(f"{path}:{line_no}: expected 'journal_id TAB journal_group'")
            id_to_group[parts[0].strip()] = parts[1].strip()
        else:
            markers.append(line)
    return JournalGroupConfig(id_to_group=id_to_group, conference_markers=tuple(markers))


def write_group_config(cfg: JournalGroupConfig, path: str | Path) -> None:
    lines = [f"{jid}\t{group}" for jid, group in cfg.id_to_group.items()]
    lines.append("[conference]")
    lines.extend(cfg.conference_markers)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def detect_conference(raw: str, cfg: JournalGroupConfig | None = None) -> bool:
    """True when the reference contains any conference marker (case-sensitive)."""
    markers = cfg.conference_markers if cfg else CONFERENCE_MARKERS
    return any(marker in raw for marker in markers)


def extract_journal_id(raw: str) -> str:
    """Collect the first up-to-four ASCII capital letters of the reference.

    Collection stops at the first digit once at least one capital has been
    seen: the digits mark the start of the volume region, and series letters
    glued to volume numbers ("49S2") are not part of the journal name.
    """
    letters = []
    for ch in raw:
        if "A" <= ch <= "Z":
            letters.append(ch)
            if len(letters) == 4:
                break
        elif ch.isdigit() and letters:
            break
    return "".join(letters)


def classify_group(journal_id: str, cfg: JournalGroupConfig | None = None) -> str:
    mapping = cfg.id_to_group if cfg else DEFAULT_ID_TO_GROUP
    return mapping.get(journal_id, OTHER_GROUP)


_DIGIT_RUN = re.compile(r"\d+")
_ALNUM_RUN = re.compile(r"[A-Za-z0-9]+")
_YEAR_RANGE = (1950, 2030)


def extract_year(raw: str) -> int:
    """Return the last standalone 4-digit token that looks like a year.

    Standalone means a maximal digit run of exactly four digits, so volume
    ids like "9908" inside "9908:004" qualify but fall outside the plausible
    year range, and page numbers rarely do.  Returns 9999 when nothing
    qualifies.
    """
    year = YEAR_UNKNOWN
    for m in _DIGIT_RUN.finditer(raw):
        tok = m.group(0)
        if len(tok) == 4 and _YEAR_RANGE[0] <= int(tok) <= _YEAR_RANGE[1]:
            year = int(tok)
    return year


def _id_end_position(raw: str) -> int:
    """Index just past the last capital used by extract_journal_id."""
    end = 0
    count = 0
    for i, ch in enumerate(raw):
        if "A" <= ch <= "Z":
            count += 1
            end = i + 1
            if count == 4:
                break
        elif ch.isdigit() and count:
            break
    return end


def extract_volume_locator(raw: str) -> tuple[str | None, str | None]:
    """Pull (volume, locator) out of the region after the journal name.

    The volume is the first digit run after the recognition key; the
    locator is the first alphanumeric run containing a digit that follows
    the volume and at least one separator character.  Pure-alpha runs
    ("Issue", "Pages") are skipped.
    """
    start = _id_end_position(raw)
    vol_match = _DIGIT_RUN.search(raw, start)
    if not vol_match:
        return None, None
    volume = vol_match.group(0)

    pos = vol_match.end()
    separator_seen = False
    for m in _ALNUM_RUN.finditer(raw, pos):
        if m.start() > pos or separator_seen:
            separator_seen = True
            run = m.group(0)
            if any(c.isdigit() for c in run):
                return volume, run
        pos = m.end()
    return volume, None


def parse_reference(raw: str, cfg: JournalGroupConfig | None = None) -> ParsedReference:
    """Total decomposition of a raw journal-reference string.

    Never raises: unrecognizable input comes back with status
    ``unparseable`` and the 9999 year sentinel.  References listing several
    journals separated by ';' are parsed from the first segment only.
    """
    segment = raw.split(";", 1)[0] if raw else ""

    if segment.strip() and detect_conference(segment, cfg):
        journal_id, group = CONF_ID, CONF_GROUP
        volume, locator = extract_volume_locator(segment)
    else:
        journal_id = extract_journal_id(segment)
        if not journal_id:
            return ParsedReference(
                journal_id="",
                journal_group=OTHER_GROUP,
                volume=None,
                locator=None,
                year=YEAR_UNKNOWN,
                status=ParseStatus.UNPARSEABLE,
            )
        group = classify_group(journal_id, cfg)
        volume, locator = extract_volume_locator(segment)

    year = extract_year(segment)
    status = ParseStatus.OK if year != YEAR_UNKNOWN else ParseStatus.YEAR_MISSING
    return ParsedReference(
        journal_id=journal_id,
        journal_group=group,
        volume=volume,
        locator=locator,
        year=year,
        status=status,
    )
