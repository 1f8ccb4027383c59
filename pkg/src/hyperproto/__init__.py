"""Hyperspherical prototype networks.

Class prototypes are fixed, well-separated points on the unit hypersphere
chosen before training; networks are trained to align their outputs with
them by cosine similarity. Regression interpolates between two antipodal
poles, and both tasks can share one output space.
"""

from .errors import DomainError, HyperprotoError, LoadError, RunError
from .geometry import (circle_prototypes, cosine_similarity, l2_normalize, one_hot_prototypes,
                       sample_unit)
from .kernels import BACKEND
from .losses import (JointSpace, RegressionBounds, build_joint_space, class_loss, class_loss_grad,
                     classify, denormalize_cos, joint_loss, joint_loss_grad, normalize_target,
                     regr_loss, regr_loss_grad)
from .network import (MetricsLog, MlpParams, TrainConfig, backward, evaluate_classification,
                      evaluate_regression, forward, mlp_init, sgd_step, train)
from .prototypes import (EmbeddingSet, ProtoOptConfig, SeparationStats, build_triplets,
                         embedding_prototypes, optimize_prototypes, rank_loss, rank_loss_grad,
                         separation_loss, separation_loss_grad, separation_stats)

__version__ = "0.1.0"
