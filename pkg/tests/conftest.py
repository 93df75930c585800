import random

import pytest

from arxlink.model import JournalArticle, PreprintRecord
from arxlink.titlematch import is_match, match_ratios, tokenize_title


def make_preprint(pid="hep-ex/0501001", repo="hep-ex", subjects=None, title="Some Title",
                  ref=None):
    return PreprintRecord(
        id=pid,
        repository=repo,
        subjects=tuple(subjects) if subjects else (repo,),
        title=title,
        journal_ref_raw=ref,
    )


def make_article(group="PLB", year=2005, volume="611", locator="1", title="Some Title",
                 area=None, tag=None):
    return JournalArticle(
        journal_group=group,
        year=year,
        volume=volume,
        locator=locator,
        title=title,
        subject_area=area,
        arxiv_tag=tag,
    )


def brute_force_ratio_pairs(pubs, preprints):
    """Exhaustive double loop over year-compatible pairs.

    Returns (journal key, preprint id, ra, rp) for every pair sharing at
    least one word; pairs with zero overlap cannot pass any positive
    threshold, so dropping them keeps the oracle exact for the policies
    under test.
    """
    pre = [(p, tokenize_title(p.title).as_dict(), tokenize_title(p.title).n) for p in preprints]
    out = []
    for pub in pubs:
        bag = tokenize_title(pub.title)
        jdict, jn = bag.as_dict(), bag.n
        window = (pub.year, pub.year - 1)
        for p, pdict, pn in pre:
            if p.id_year not in window:
                continue
            if jn == 0 or pn == 0:
                continue
            matched = 0
            for token, count in jdict.items():
                other = pdict.get(token, 0)
                if other:
                    matched += min(count, other)
            if matched:
                out.append((pub.key, p.id, matched / pn, matched / jn))
    return out


def brute_force_matches(pubs, preprints, policy):
    """Match set per the exhaustive scan, for positive-threshold policies."""
    assert policy.ra_threshold > 0 and policy.rp_threshold > 0
    return {
        (key, pid)
        for key, pid, ra, rp in brute_force_ratio_pairs(pubs, preprints)
        if ra >= policy.ra_threshold and rp >= policy.rp_threshold
    }


def _pid(year, i):
    # New-style identifier: YYMM.NNNNN, unique for i < 100000.
    return f"{year % 100:02d}{i % 12 + 1:02d}.{i:05d}"


def random_title_corpus(rng, n_pubs, n_preprints, vocab_size=60, years=(2004, 2005, 2006),
                        title_words=(3, 7), planted=0, unique_tags=False):
    """Random word-bag corpora with optional planted identical-title pairs.

    With unique_tags, every title carries a distinctive token so only the
    planted pairs can match at thresholds (1, 1).
    """
    vocab = [f"word{k:03d}" for k in range(vocab_size)]

    def title(tag=None):
        words = rng.choices(vocab, k=rng.randint(*title_words))
        if tag:
            words.append(tag)
        return " ".join(words)

    pubs = [
        make_article(
            group="J", year=rng.choice(years), volume=str(100 + i), locator="1",
            title=title(f"uid{i:05d}" if unique_tags else None),
        )
        for i in range(n_pubs)
    ]
    preprints = [
        make_preprint(
            pid=_pid(rng.choice(years), i), repo="hep-ex",
            title=title(f"vid{i:05d}" if unique_tags else None),
        )
        for i in range(n_preprints)
    ]
    planted_pairs = set()
    used_pubs: set = set()
    used_idx: set = set()
    for _ in range(planted):
        i_pub = rng.randrange(n_pubs)
        while i_pub in used_pubs:
            i_pub = rng.randrange(n_pubs)
        used_pubs.add(i_pub)
        idx = rng.randrange(n_preprints)
        while idx in used_idx:
            idx = rng.randrange(n_preprints)
        used_idx.add(idx)
        pub = pubs[i_pub]
        year = rng.choice((pub.year, pub.year - 1))
        preprints[idx] = make_preprint(pid=_pid(year, idx), repo="hep-ex", title=pub.title)
        planted_pairs.add((pub.key, preprints[idx].id))
    return pubs, preprints, planted_pairs


@pytest.fixture
def rng():
    return random.Random(20260811)
