import numpy as np
import pytest

from distreg.estimator import DensityEstimator
from distreg.nn import Network, NetworkConfig
from distreg.partition import Partition


def estimator_with_probs(partition: Partition, probs) -> DensityEstimator:
    """Estimator whose classifier outputs the given probabilities for any x.

    A zero-hidden-layer network with zero weights and biases log(probs)
    produces exactly softmax(log probs) = probs.
    """
    probs = np.asarray(probs, dtype=float)
    cfg = NetworkConfig(input_dim=1, output_dim=len(probs), hidden_sizes=(),
                        dropout_rate=0.0)
    net = Network(cfg, [np.zeros((1, len(probs)))], [np.log(probs)])
    return DensityEstimator(partition, net)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
