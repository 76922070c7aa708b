"""
Factor Count Rules
Eigenvalue-ratio and scree rules on the retained target-operator eigenvalues
"""

from typing import Dict, Sequence

import numpy as np

from utils.errors import ParameterError

RATIO_FLOOR = 1e-12

K_RULES = ("ratio", "scree", "scree_literal")


def _retained_magnitudes(alphas: Sequence[float], k0: int) -> np.ndarray:
    if k0 < 2:
        raise ParameterError(f"k0 must be >= 2, got {k0}")
    alphas = np.asarray(alphas, dtype=float).ravel()
    if alphas.size < k0:
        raise ParameterError(f"need {k0} eigenvalues, got {alphas.size}")
    return np.abs(alphas[:k0])


def estimate_k_ratio(alphas: Sequence[float], k0: int) -> int:
    """
    Eigenvalue-ratio rule

    K = argmin_{1 <= i <= k0-1} |alpha_{i+1}| / |alpha_i|; ties go to the
    smallest i. Magnitudes are floored at 1e-12 before dividing.

    Args:
        alphas: Eigenvalues sorted by |alpha| descending
        k0: Number of retained eigenvalues (>= 2)

    Returns:
        Estimated number of factors in [1, k0 - 1]
    """
    magnitudes = np.maximum(_retained_magnitudes(alphas, k0), RATIO_FLOOR)
    ratios = magnitudes[1:] / magnitudes[:-1]
    return int(np.argmin(ratios)) + 1


def estimate_k_scree(alphas: Sequence[float], k0: int, variant: str = "elbow") -> int:
    """
    Scree rule

    The "elbow" variant picks the largest drop between consecutive |alpha|;
    the "literal" variant returns the position of the smallest |alpha|, which
    is always k0 for sorted input.

    Args:
        alphas: Eigenvalues sorted by |alpha| descending
        k0: Number of retained eigenvalues (>= 2)
        variant: "elbow" or "literal"

    Returns:
        Estimated number of factors
    """
    magnitudes = _retained_magnitudes(alphas, k0)
    if variant == "elbow":
        return int(np.argmax(magnitudes[:-1] - magnitudes[1:])) + 1
    if variant == "literal":
        return int(np.argmin(magnitudes)) + 1
    raise ParameterError(f"scree variant must be 'elbow' or 'literal', got '{variant}'")


def estimate_k_all(alphas: Sequence[float], k0: int) -> Dict[str, int]:
    """Every rule on the same eigenvalues; a single candidate counts as one factor"""
    if k0 == 1:
        return {rule: 1 for rule in K_RULES}
    return {
        "ratio": estimate_k_ratio(alphas, k0),
        "scree": estimate_k_scree(alphas, k0, "elbow"),
        "scree_literal": estimate_k_scree(alphas, k0, "literal"),
    }


def check_k_rule(k_rule: str) -> str:
    if k_rule not in K_RULES:
        raise ParameterError(f"k_rule must be one of {', '.join(K_RULES)}; got '{k_rule}'")
    return k_rule
