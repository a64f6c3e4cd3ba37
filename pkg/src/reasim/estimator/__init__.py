from .collect import data_collect, proprio_of, sample_cmd
from .loss import conservative_loss, signed_bias
from .model import VARIANTS, EstimatorConfig, RayEstimator
from .train import EstimatorTrainConfig, load_estimator, train_estimator
