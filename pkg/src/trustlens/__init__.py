"""trustlens: influence scoring and trust classification for social accounts.

The package turns raw collected profile/tweet data into per-user feature
vectors, scores each account's influence, and trains trusted/untrusted
classifiers whose labels are gathered through a pool-based active-learning
loop (batch by batch, human annotators or a scripted oracle).
"""

from trustlens.errors import ConvergenceError, OracleError, ParseError, TrustlensError
from trustlens.model import (
    FEATURE_FIELDS,
    LABELS,
    TRUSTED,
    UNTRUSTED,
    FeatureVector,
    LabeledInstance,
    LabelSource,
    LearnerKind,
    MetricsReport,
    ModelState,
    TweetRecord,
    UserProfile,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "OracleError",
    "ParseError",
    "TrustlensError",
    "FEATURE_FIELDS",
    "LABELS",
    "TRUSTED",
    "UNTRUSTED",
    "FeatureVector",
    "LabeledInstance",
    "LabelSource",
    "LearnerKind",
    "MetricsReport",
    "ModelState",
    "TweetRecord",
    "UserProfile",
    "ValidationError",
    "__version__",
]
