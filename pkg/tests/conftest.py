import numpy as np
import pytest

from ingarch_sieve import (
    ContractionBounds,
    ParametricLink,
    SplineLink,
    build_sieve_config,
)


@pytest.fixture
def truth():
    """The reference data-generating link."""
    return ParametricLink()


@pytest.fixture
def reference_sieve():
    """Sieve of the reference experiment: spacing 0.2, 11-value grid."""
    return build_sieve_config(2.0, 1000, grid_points=11, count_cap=5)


@pytest.fixture
def reference_bounds():
    return ContractionBounds(2.0, 0.62, 0.50)


def random_contractive_coeffs(rng, config, intensity_lipschitz, count_lipschitz):
    """Random real-valued coefficient matrix satisfying the contraction bounds.

    Each level is a random walk with steps inside the slope allowance,
    clipped into the gap band around the previous level.  Clipping is
    1-Lipschitz in every argument, so neither the range clip nor the gap
    clip can break the slope bound.
    """
    m = config.max_intensity
    step = intensity_lipschitz * config.spacing
    rows = config.basis_count
    levels = config.count_cap + 1

    def bounded_walk():
        walk = np.cumsum(rng.uniform(-step, step, size=rows))
        return np.clip(walk + rng.uniform(0.0, m), 0.0, m)

    coeffs = np.empty((rows, levels))
    coeffs[:, 0] = bounded_walk()
    for y in range(1, levels):
        lo = np.maximum(coeffs[:, y - 1] - count_lipschitz, 0.0)
        hi = np.minimum(coeffs[:, y - 1] + count_lipschitz, m)
        coeffs[:, y] = np.clip(bounded_walk(), lo, hi)
    return coeffs


def random_contractive_link(rng, config, bounds):
    coeffs = random_contractive_coeffs(
        rng, config, bounds.intensity_lipschitz, bounds.count_lipschitz
    )
    return SplineLink(config, coeffs)
