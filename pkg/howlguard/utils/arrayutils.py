import numpy as np
from scipy.stats import entropy


def clamp_unit(weights):
    return np.clip(weights, 0., 1.)


def renormalize(weights):
    """Scale non-negative weights so they sum to 1."""
    total = np.sum(weights)
    if not total > 0:
        raise ValueError(f"cannot renormalize weights summing to {total}")
    return weights / total


def weights_entropy(weights):
    """Shannon entropy of the weights divided by ln K, in [0, 1].

    The weights are taken as relative masses, so unnormalized vectors are
    scaled to sum to 1 first. 0 ln 0 counts as 0.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size < 2:
        return 0.
    if not np.sum(weights) > 0:
        return 0.
    return float(min(entropy(weights) / np.log(weights.size), 1.))
