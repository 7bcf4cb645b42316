"""
Shannon entropy and mutual information of finite distributions (base 2)
"""

import numpy as np
from scipy import special

from qkd_security.logging_exception import DimensionMismatchError

LN2 = np.log(2.0)


def entropy(p) -> float:
    """
    H(p) in bits

    Args:
        p (array-like): Nonnegative weights; normalized here if they do not sum to 1

    Returns:
        float: Entropy of the normalized distribution
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < -1e-15):
        raise DimensionMismatchError("Entropy needs a nonempty nonnegative distribution")
    total = p.sum()
    if total <= 0.0:
        raise DimensionMismatchError("Distribution has zero total mass")
    p = np.clip(p / total, 0.0, None)
    return float(np.sum(special.entr(p)) / LN2)


def mutual_information(joint) -> float:
    """
    I(X;Y) = H(X) + H(Y) - H(X,Y) for a 2-D joint table

    Args:
        joint (array-like): p(x, y) with x along axis 0

    Returns:
        float: Mutual information in bits
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise DimensionMismatchError(f"Joint table must be 2-D, got shape {joint.shape}")
    joint = joint / joint.sum()
    value = entropy(joint.sum(axis=1)) + entropy(joint.sum(axis=0)) - entropy(joint)
    return max(0.0, float(value))


def conditional_mutual_information(joint) -> float:
    """
    I(X;Y|Z) for a 3-D table p(x, y, z)
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 3:
        raise DimensionMismatchError(f"Joint table must be 3-D, got shape {joint.shape}")
    joint = joint / joint.sum()
    total = 0.0
    for z in range(joint.shape[2]):
        pz = joint[:, :, z].sum()
        if pz > 0.0:
            total += pz * mutual_information(joint[:, :, z])
    return total
