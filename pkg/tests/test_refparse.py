from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arxlink.model import ParseStatus
from arxlink.refparse import (
    DEFAULT_ID_TO_GROUP,
    JournalGroupConfig,
    classify_group,
    detect_conference,
    extract_journal_id,
    extract_volume_locator,
    extract_year,
    load_group_config,
    parse_reference,
    write_group_config,
)

from appendix_cases import RECOGNITION_CASES

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize("jid, group, raw, year", RECOGNITION_CASES)
def test_recognition_regression(jid, group, raw, year):
    parsed = parse_reference(raw)
    assert parsed.journal_id == jid
    assert parsed.journal_group == group
    assert parsed.year == year
    assert parsed.status is ParseStatus.OK


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("Nucl.Phys.Proc.Suppl.35:261-263,1994", True),
        ("Phys.Lett.B342:1-7,1995", False),
        ("PoS LAT2009:123,2009", True),
        ("IEEE Trans.Nucl.Sci.52:2014,2005", True),
        ("Rencontres de Moriond proceedings", True),
        ("Symp. on Lattice Field Theory", True),
    ],
)
def test_detect_conference(raw, expected):
    assert detect_conference(raw) is expected


def test_conference_markers_are_case_sensitive():
    assert not detect_conference("ProCeedings")
    assert detect_conference("proceedings")


@pytest.mark.parametrize(
    "raw, jid",
    [
        ("Nucl.Phys.B439:471-502,1995", "NPB"),
        ("Physics Letters B, Volume 698, Issue 3, 11 April 2011, Pages 196-218", "PLBV"),
        ("Pramana 62:561-564,2004", "P"),
        ("JINST 1:P07002,2006", "JINS"),
        ("Czech.J.Phys. 49S2 (1999) 119-126", "CJP"),
        ("no capitals here 1999", ""),
        ("", ""),
    ],
)
def test_extract_journal_id(raw, jid):
    assert extract_journal_id(raw) == jid


@pytest.mark.parametrize(
    "jid, group",
    [("TEPJ", "EPJC"), ("SCPM", "China"), ("ZZZZ", "Other"), ("", "Other")],
)
def test_classify_group(jid, group):
    assert classify_group(jid) == group


@pytest.mark.parametrize(
    "raw, year",
    [
        ("JHEP 9908:004,1999", 1999),
        ("Il Nuovo Cimento C 36 01 (2013)", 2013),
        ("Phys.Rev.D (to appear)", 9999),
        ("Nucl.Phys.B439:471-502,1995", 1995),
        ("volume 12345 page 1999", 1999),
        ("Phys.Rev.C56:2774-2778,1997", 1997),
        ("embedded 19991 digits", 9999),
    ],
)
def test_extract_year(raw, year):
    assert extract_year(raw) == year


@pytest.mark.parametrize(
    "raw, volume, locator",
    [
        ("Phys.Lett.B342:1-7,1995", "342", "1"),
        ("JINST 1:P07002,2006", "1", "P07002"),
        ("Rev.Mod.Phys.69:137-212,1997", "69", "137"),
        ("Nucl.Phys.B439:471-502,1995", "439", "471"),
        ("JHEP 9908:004,1999", "9908", "004"),
        ("Sci. China-Phys. Mech. Astron. 60, 071011 (2017)", "60", "071011"),
        ("Eur.Phys.J.C1:509-513,1998", "1", "509"),
        ("Phys.Rev.D (to appear)", None, None),
    ],
)
def test_extract_volume_locator(raw, volume, locator):
    assert extract_volume_locator(raw) == (volume, locator)


def test_parse_reference_conference_precedes_id():
    # Capitals would spell NPPS, but the proceedings marker wins.
    parsed = parse_reference("Nucl.Phys.Proc.Suppl.35:261-263,1994")
    assert parsed.journal_id == "CONF"
    assert parsed.journal_group == "Conf"


def test_parse_reference_full_decomposition():
    parsed = parse_reference("Eur.Phys.J.C1:509-513,1998")
    assert (parsed.journal_id, parsed.journal_group) == ("EPJC", "EPJC")
    assert (parsed.volume, parsed.locator, parsed.year) == ("1", "509", 1998)
    assert parsed.status is ParseStatus.OK


def test_parse_reference_empty_is_unparseable():
    parsed = parse_reference("")
    assert parsed.status is ParseStatus.UNPARSEABLE
    assert parsed.year == 9999


def test_parse_reference_year_missing():
    parsed = parse_reference("Phys.Rev.D (to appear)")
    assert parsed.status is ParseStatus.YEAR_MISSING
    assert parsed.journal_group == "PRD"
    assert parsed.year == 9999


def test_parse_reference_multi_journal_uses_first_segment():
    parsed = parse_reference("Phys.Atom.Nucl.61:66-73,1998; Yad.Fiz.61:72-79,1998")
    assert parsed.journal_id == "PAN"
    assert (parsed.volume, parsed.locator) == ("61", "66")


@given(st.text(max_size=200))
def test_parse_reference_is_total(raw):
    parsed = parse_reference(raw)
    assert parsed.status in (ParseStatus.OK, ParseStatus.YEAR_MISSING, ParseStatus.UNPARSEABLE)
    assert parsed == parse_reference(raw)


@given(st.text(alphabet="ABCdef123.:,;()/$- é»Ω", max_size=60))
def test_parse_reference_deterministic_on_mixed_text(raw):
    assert parse_reference(raw) == parse_reference(raw)


def test_accented_capitals_are_skipped():
    # Uppercase detection is ASCII-only.
    assert extract_journal_id("Élq ÉPJ Phys.Lett.B1:2,1999") == "PJPL"


def test_group_config_round_trip(tmp_path):
    cfg = JournalGroupConfig()
    path = tmp_path / "groups.cfg"
    write_group_config(cfg, path)
    loaded = load_group_config(path)
    assert loaded.id_to_group == cfg.id_to_group
    assert loaded.conference_markers == cfg.conference_markers


def test_group_config_requires_markers(tmp_path):
    path = tmp_path / "groups.cfg"
    path.write_text("PLB\tPLB\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_group_config(path)


def test_known_groups_cover_every_mapping_value():
    cfg = JournalGroupConfig()
    assert set(cfg.id_to_group.values()) <= set(cfg.known_groups)


def test_realistic_corpus_parses_ok_at_99_percent():
    rows = []
    corpus = (DATA / "reference_corpus.tsv").read_text(encoding="utf-8").splitlines()
    for line in corpus[1:]:
        raw, jid, group, year, status, volume, locator = line.split("\t")
        rows.append((raw, jid, group, int(year), status, volume, locator))
    assert len(rows) >= 500

    n_ok = 0
    for raw, jid, group, year, status, volume, locator in rows:
        parsed = parse_reference(raw)
        assert parsed.journal_id == jid
        assert parsed.journal_group == group
        assert parsed.year == year
        assert parsed.status.value == status
        if volume:
            assert parsed.volume == volume
        if locator:
            assert parsed.locator == locator
        n_ok += parsed.status is ParseStatus.OK
    assert n_ok / len(rows) >= 0.99
