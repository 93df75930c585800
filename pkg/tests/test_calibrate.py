import random

import pytest

from arxlink.calibrate import (
    CalibrationError,
    TruePairSet,
    calibrate,
    default_thresholds,
    efficiency_grid,
    expected_recoveries,
    negative_pairs,
    project,
    random_match_grid,
    write_grids,
)

from conftest import make_article, make_preprint


def _pair(i, year=2005, journal_title=None, preprint_title=None):
    title = journal_title or f"unique measurement number {i:04d} results"
    article = make_article(
        year=year, volume=str(600 + i // 50), locator=str(i % 50 + 1), title=title
    )
    preprint = make_preprint(
        pid=f"{year % 100:02d}01.{i:05d}", title=preprint_title or title
    )
    return article, preprint


def test_default_thresholds():
    grid = default_thresholds()
    assert grid == (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0)
    assert default_thresholds(0.5) == (1.0, 0.5, 0.0)


def test_true_pair_set_orders_and_rejects_duplicates():
    pairs = [_pair(i) for i in (3, 1, 2)]
    ordered = TruePairSet(pairs=tuple(pairs))
    locators = [a.locator for a, _ in ordered.pairs]
    assert locators == sorted(locators, key=int)
    with pytest.raises(CalibrationError):
        TruePairSet(pairs=tuple([pairs[0], pairs[0]]))


def test_efficiency_all_identical_titles():
    pairs = TruePairSet(pairs=tuple(_pair(i) for i in range(10)))
    grid = efficiency_grid(pairs)
    assert all(v == 1.0 for row in grid for v in row)


def test_efficiency_planted_perturbations():
    # 10 pairs of 5-word titles; 3 preprints carry one extra word, so at
    # (1, 1) they fail (ra = 5/6) while everything passes at ra >= 0.8.
    base = "alpha{0:02d} bravo{0:02d} charlie{0:02d} delta{0:02d} echo{0:02d}"
    pairs = []
    for i in range(10):
        title = base.format(i)
        extra = title + " extension" if i < 3 else title
        pairs.append(_pair(i, journal_title=title, preprint_title=extra))
    thresholds = default_thresholds()
    grid = efficiency_grid(TruePairSet(pairs=tuple(pairs)), thresholds)
    at = {t: i for i, t in enumerate(thresholds)}
    assert grid[at[1.0]][at[1.0]] == 0.7
    assert grid[at[1.0]][at[0.8]] == 1.0
    assert grid[at[0.8]][at[1.0]] == 0.7  # rp is 1.0 for all pairs; ra gates


def test_efficiency_empty_pairs_error():
    with pytest.raises(CalibrationError):
        efficiency_grid(TruePairSet(pairs=()))


def test_negative_pairs_definition():
    pairs = [_pair(i) for i in range(3)]
    ordered = TruePairSet(pairs=tuple(pairs))
    negatives = negative_pairs(ordered)
    assert len(negatives) == 2
    assert negatives[0][0] == ordered.pairs[1][0]
    assert negatives[0][1] == ordered.pairs[0][1]
    assert negatives[1][0] == ordered.pairs[2][0]
    assert negatives[1][1] == ordered.pairs[1][1]


def test_negative_pairs_two_pairs_yield_one():
    assert len(negative_pairs(TruePairSet(pairs=tuple(_pair(i) for i in range(2))))) == 1


def test_negative_pairs_requires_two():
    with pytest.raises(CalibrationError):
        negative_pairs(TruePairSet(pairs=(tuple(_pair(0)),)))


def test_negative_pairs_shuffled_input_matches_sorted(rng):
    pairs = [_pair(i) for i in range(20)]
    shuffled = pairs[:]
    rng.shuffle(shuffled)
    assert negative_pairs(TruePairSet(pairs=tuple(shuffled))) == negative_pairs(
        TruePairSet(pairs=tuple(pairs))
    )


def test_random_match_grid_distinct_titles():
    pairs = TruePairSet(pairs=tuple(_pair(i) for i in range(12)))
    grid = random_match_grid(pairs)
    assert grid[0][0] == 0.0


def test_random_match_grid_planted_duplicate():
    # 101 true pairs -> 100 negatives; article i+1 sharing preprint i's
    # title plants exactly one false positive: pran(1,1) = 0.01.
    pairs = [_pair(i) for i in range(101)]
    dup_article, _ = _pair(6, journal_title=pairs[5][0].title)
    pairs[6] = (dup_article, pairs[6][1])
    grid = random_match_grid(TruePairSet(pairs=tuple(pairs)))
    assert grid[0][0] == 0.01


def test_grid_monotone_under_threshold_relaxation(rng):
    words = ["alpha", "bravo", "charlie", "delta", "echo", "fox", "golf"]
    pairs = []
    for i in range(40):
        journal = " ".join(rng.choices(words, k=rng.randint(3, 6))) + f" tag{i:03d}"
        preprint = journal if rng.random() < 0.5 else " ".join(
            rng.choices(words, k=rng.randint(3, 6))
        ) + f" tag{i:03d}"
        pairs.append(_pair(i, journal_title=journal, preprint_title=preprint))
    grid = calibrate(TruePairSet(pairs=tuple(pairs)))
    for matrix in (grid.efficiency, grid.pran):
        for i, row in enumerate(matrix):
            for j in range(len(row) - 1):
                assert row[j + 1] >= row[j]
            if i + 1 < len(matrix):
                assert all(b >= a for a, b in zip(row, matrix[i + 1]))


def test_rejection_complements_pran():
    pairs = TruePairSet(pairs=tuple(_pair(i) for i in range(5)))
    grid = calibrate(pairs)
    for i in range(len(grid.thresholds)):
        for j in range(len(grid.thresholds)):
            assert grid.rejection(i, j) + grid.pran[i][j] == 1.0


def test_expected_recoveries():
    assert abs(expected_recoveries(128, 0.64) - 81.9) <= 0.05
    assert expected_recoveries(0, 0.64) == 0.0
    assert expected_recoveries(100, 1.0) == 100.0


def test_expected_recoveries_rejects_bad_inputs():
    with pytest.raises(CalibrationError):
        expected_recoveries(10, 0.0)
    with pytest.raises(CalibrationError):
        expected_recoveries(10, 1.2)
    with pytest.raises(CalibrationError):
        expected_recoveries(-1, 0.5)


def test_project_reference_values():
    proj = project(65, 113, 0.64, 327)
    assert abs(proj.ppwa - 241.5625) < 1e-9
    assert abs(proj.fraction - 241.5625 / 327) < 1e-12
    assert not proj.over_unity


def test_project_no_matches():
    proj = project(10, 0, 0.5, 20)
    assert proj.ppwa == 10.0
    assert proj.fraction == 0.5


def test_project_other_journal_efficiency():
    proj = project(0, 32, 0.512, 100)
    assert proj.ppwa == 62.5
    assert proj.fraction == 0.625


def test_project_flags_over_unity():
    proj = project(90, 40, 0.5, 100)
    assert proj.fraction > 1.0
    assert proj.over_unity


def test_project_invariants():
    proj = project(7, 9, 0.75, 50)
    assert proj.ppwa >= proj.referenced_count
    with pytest.raises(CalibrationError):
        project(1, 1, 0.0, 10)
    with pytest.raises(CalibrationError):
        project(1, 1, 0.5, 0)


def test_expected_recoveries_bounded_by_count(rng):
    for _ in range(50):
        n = rng.randrange(0, 1000)
        e = rng.uniform(0.01, 1.0)
        assert expected_recoveries(n, e) <= n


def test_write_grids(tmp_path):
    pairs = TruePairSet(pairs=tuple(_pair(i) for i in range(4)))
    grid = calibrate(pairs)
    write_grids(grid, tmp_path)
    eff = (tmp_path / "efficiency.csv").read_text(encoding="utf-8").splitlines()
    assert eff[0].startswith("rp_threshold,1,0.9,")
    assert len(eff) == len(grid.thresholds) + 1
    assert (tmp_path / "efftm.txt").read_text(encoding="utf-8") == "1.000000\n"
