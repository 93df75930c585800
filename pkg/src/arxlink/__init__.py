"""arxlink: link journal articles to their preprint-server counterparts.

The pipeline ingests offline snapshots of preprint listings and journal
indexes, decomposes free-text journal references, resolves them against the
journal index, title-matches the untagged remainder with a calibrated
word-overlap matcher, and emits correlation matrices, coverage fractions,
and efficiency-corrected projections.
"""

from .calibrate import (
    TruePairSet,
    calibrate,
    efficiency_grid,
    expected_recoveries,
    negative_pairs,
    project,
    random_match_grid,
)
from .ingest import (
    CorpusSplit,
    dedup_primary_subject,
    load_journal_index,
    load_preprint_snapshot,
    split_by_journal_presence,
)
from .linkpipe import (
    LinkageResult,
    correlation_matrix,
    fraction_series,
    purity_check,
    resolve_reference,
    run_linkage,
    split_by_target,
    tabulate_journal_year,
    tag_corpus,
)
from .model import (
    CalibrationGrid,
    CorrelationMatrix,
    JournalArticle,
    MatchRatios,
    ParsedReference,
    ParseStatus,
    PreprintRecord,
    preprint_id_year,
)
from .refparse import (
    JournalGroupConfig,
    classify_group,
    detect_conference,
    extract_journal_id,
    extract_volume_locator,
    extract_year,
    parse_reference,
)
from .titlematch import (
    MatchPolicy,
    TokenBag,
    build_token_index,
    find_matches,
    is_match,
    match_ratios,
    tokenize_title,
)

__version__ = "0.1.0"
