"""Decision-level fusion of sentiment classifiers through a discrete
Bayesian network conditioned on corpus type.

The package covers the full pipeline: record parsing and splitting, CPT
learning with additive smoothing, exact posterior inference, per-arc
influence analysis, ensemble baselines, and evaluation reporting.
"""

from .errors import DataError, FusionError, ModelError
from .evaluation import (
    ConfusionMatrix,
    EvaluationReport,
    build_report,
    cohen_kappa,
    confusion,
    majority_vote,
    metrics,
    pairwise_agreement,
    probability_average,
)
from .influence import InfluenceReport, arc_strength, influence_report
from .inference import Posterior, evidence_probability, posterior, predict_label
from .learning import (
    CountTable,
    SmoothingConfig,
    TrainingTable,
    count_records,
    fit_cpts,
    merge_counts,
)
from .network import (
    CANONICAL_SENTIMENTS,
    Cpt,
    Network,
    NetworkSkeleton,
    StateSpace,
    build_network,
    cpt_row,
    joint_probability,
    load_network,
    network_from_json,
    network_to_json,
    save_network,
)
from .pipeline import (
    FusionConfig,
    FusionModel,
    build_fusion_structure,
    fit_fusion,
    predict_batch,
    predict_record,
)
from .records import (
    CANONICAL_CORPORA,
    DEFAULT_LABEL_MAP,
    LabelMap,
    Prediction,
    PredictionRecord,
    SplitManifest,
    SplitSpec,
    load_records,
    parse_records,
    split_records,
    to_training_table,
    validate_dataset_stats,
)

__version__ = "0.1.0"
