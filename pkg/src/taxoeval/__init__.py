"""taxoeval: metrics and a batch harness for scoring generated survey
taxonomies against expert reference taxonomies."""

from .alignment import AlignmentSet, align, normalize_title, retrieval_scores
from .embedding import (
    EmbeddingCache,
    EmbeddingSimilarity,
    HashEncoder,
    RemoteEncoder,
    TableSimilarity,
    renaming_cost,
    sim,
)
from .harness import EvaluationConfig, MetricReport, evaluate, evaluate_pair
from .hierarchy import (
    chain_alignment_cost,
    path_consistency,
    unordered_tree_distance,
)
from .partition import (
    adjusted_rand_index,
    contingency,
    extend_e2e,
    homogeneity_completeness_v,
    restrict_to_intersection,
)
from .perturb import (
    Perturbation,
    apply_perturbation,
    contract_node,
    relabel,
    rewire_swap,
    shuffle_siblings,
    split_leaf,
)
from .softcard import collect_labels, soft_cardinality, soft_recall_precision_f1
from .tree import (
    UNRETRIEVED,
    CategoryHierarchy,
    CategoryNode,
    PaperAssignment,
    Taxonomy,
    TaxonomyError,
    ancestor_paths,
    assignment_of,
    diagnose,
    hierarchy_of,
    load_taxonomy,
    parse_taxonomy,
    subtree_size,
)

__version__ = "0.1.0"
