"""One-step-ahead squared prediction error of candidate links.

A candidate link predicts the next count through the intensity it rebuilds
from the observed counts alone: starting from intensity zero, the link is
folded along the count sequence, and each rebuilt intensity is the
conditional-mean prediction of the following count.  The contrast of a
candidate is the mean squared prediction error over the sample; for
contractive links the zero start is forgotten geometrically fast, so the
seed choice is immaterial for all but the first few terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .process import LinkFunction
from .splines import SieveConfig

__all__ = ["iterate_link", "ContrastValue", "contrast", "contrast_batch"]


def iterate_link(link: LinkFunction, start: float, counts) -> float:
    """Fold the link along ``counts`` from the starting intensity.

    Returns the intensity after consuming every count:
    ``g(...g(g(start, c[0]), c[1])..., c[-1])``.  For a link with intensity
    Lipschitz constant ``L``, results from two starts differ by at most
    ``L**len(counts)`` times the start difference.
    """
    counts = np.asarray(counts)
    if counts.size == 0:
        raise ValueError("counts must be non-empty")
    lam = float(start)
    for y in counts:
        lam = link.value(lam, int(y))
    return lam


@dataclass(frozen=True)
class ContrastValue:
    """Mean squared one-step prediction error of a candidate link.

    ``predicted``, when retained, holds the ``n_terms`` rebuilt intensities:
    ``predicted[k]`` is the prediction of ``counts[k + 1]``, so the value is
    recomputable as ``mean((counts[1:] - predicted) ** 2)``.
    """

    value: float
    n_terms: int
    predicted: np.ndarray | None = None


def contrast(link: LinkFunction, counts, keep_predictions: bool = False) -> ContrastValue:
    """Contrast of a candidate on a count sequence, in a single O(n) sweep.

    ``counts`` must hold at least two observations; the contrast averages
    ``len(counts) - 1`` squared errors.  The rebuilt intensity starts at
    zero and is advanced once per observation, so the link is evaluated
    exactly ``len(counts) - 1`` times.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size < 2:
        raise ValueError("contrast needs at least two observations")
    n = counts.size - 1
    predicted = np.empty(n) if keep_predictions else None
    lam = 0.0
    acc = 0.0
    for i in range(n):
        lam = link.value(lam, int(counts[i]))
        if predicted is not None:
            predicted[i] = lam
        d = counts[i + 1] - lam
        acc += d * d
    return ContrastValue(float(acc / n), n, predicted)


def contrast_batch(config: SieveConfig, coeff_stack: np.ndarray, counts) -> np.ndarray:
    """Contrast of many spline candidates over the same counts, vectorized.

    ``coeff_stack`` has shape ``(batch, basis_count, count_cap + 1)``.  The
    arithmetic mirrors ``SplineLink.value`` operation for operation, so each
    entry of the result is bitwise equal to the scalar contrast of the
    corresponding candidate.  This is the hot path of the optimizer: the
    recursion is sequential in time but advances all candidates in lockstep.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size < 2:
        raise ValueError("contrast needs at least two observations")
    coeff_stack = np.asarray(coeff_stack, dtype=float)
    if coeff_stack.ndim != 3 or coeff_stack.shape[1:] != (
        config.basis_count,
        config.count_cap + 1,
    ):
        raise ValueError("coefficient stack shape does not match the sieve")
    batch = coeff_stack.shape[0]
    m = config.max_intensity
    spacing = config.spacing
    top = config.num_intervals - 1
    rows = np.arange(batch)
    lam = np.zeros(batch)
    acc = np.zeros(batch)
    n = counts.size - 1
    capped = np.minimum(counts, config.count_cap)
    for i in range(n):
        y = capped[i]
        pos = lam / spacing
        iv = np.minimum(pos.astype(np.int64), top)
        u = pos - iv
        w0 = 0.5 * (1.0 - u) * (1.0 - u)
        w2 = 0.5 * u * u
        w1 = 1.0 - w0 - w2
        lam = (
            coeff_stack[rows, iv, y] * w0
            + coeff_stack[rows, iv + 1, y] * w1
            + coeff_stack[rows, iv + 2, y] * w2
        )
        np.minimum(np.maximum(lam, 0.0, out=lam), m, out=lam)
        d = counts[i + 1] - lam
        acc += d * d
    return acc / n
