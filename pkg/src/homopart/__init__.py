"""homopart: homology-aware cross-validation partitioning with similarity guarantees.

Partitions two-class protein sequence datasets into k splits such that no
same-class pair above an inter-split identity ceiling crosses splits, anchors
negatives to in-split positives at a configurable inter-class floor, balances
training sets under four strategies, and evaluates classifier output with
rank-based metrics and nonparametric tests.
"""

from .align import (
    IdentityStore,
    LocalAlignment,
    ScoringScheme,
    all_pairs_identity,
    identity,
    max_identity_profile,
    sw_align,
)
from .audit import (
    HistogramSet,
    ViolationReport,
    audit_partition,
    difficulty_compare,
    identity_histograms,
    synthesize_corpus,
)
from .balance import (
    BalanceSetting,
    BalancedSet,
    hard_balance,
    length_control,
    minimal,
    no_balance,
    validation_split,
)
from .corpus import (
    Corpus,
    SequenceRecord,
    cross_class_filter,
    filter_train_against_external,
    parse_fasta,
    parse_fasta_text,
    quality_filter,
    temporal_split,
    write_fasta,
)
from .errors import HomopartError, InfeasibleError, InputError
from .metrics import ScoredInstance, auprc, auroc, background_auprc
from .partition import (
    Partition,
    RemovalRecord,
    SplitPair,
    Thresholds,
    assign_negatives,
    build_cv_sets,
    cluster_positives,
    derive_train_for_test,
    greedy_representative_partition,
    readd_removed,
    remove_inter_split_violations,
)
from .stats import (
    RankTable,
    bonferroni,
    friedman,
    ks_two_sample,
    mann_whitney_u,
    nemenyi,
    pearson,
    spearman,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "SequenceRecord",
    "parse_fasta",
    "parse_fasta_text",
    "write_fasta",
    "quality_filter",
    "cross_class_filter",
    "temporal_split",
    "filter_train_against_external",
    "ScoringScheme",
    "LocalAlignment",
    "IdentityStore",
    "sw_align",
    "identity",
    "all_pairs_identity",
    "max_identity_profile",
    "Thresholds",
    "Partition",
    "SplitPair",
    "RemovalRecord",
    "cluster_positives",
    "remove_inter_split_violations",
    "readd_removed",
    "assign_negatives",
    "build_cv_sets",
    "derive_train_for_test",
    "greedy_representative_partition",
    "BalancedSet",
    "BalanceSetting",
    "no_balance",
    "hard_balance",
    "length_control",
    "minimal",
    "validation_split",
    "ScoredInstance",
    "auroc",
    "auprc",
    "background_auprc",
    "RankTable",
    "ks_two_sample",
    "mann_whitney_u",
    "wilcoxon_signed_rank",
    "bonferroni",
    "friedman",
    "nemenyi",
    "pearson",
    "spearman",
    "HistogramSet",
    "ViolationReport",
    "audit_partition",
    "identity_histograms",
    "difficulty_compare",
    "synthesize_corpus",
    "HomopartError",
    "InputError",
    "InfeasibleError",
    "__version__",
]
