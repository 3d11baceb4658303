"""Link functions and simulation of Poisson count autoregressions.

The model: counts ``Y_t`` are conditionally Poisson with intensity
``lambda_t``, and the intensity evolves through a link function,
``lambda_{t+1} = g(lambda_t, Y_t)``.  Every link maps
``[0, max_intensity] x {0, 1, 2, ...}`` back into ``[0, max_intensity]``,
so simulated intensity paths stay in a compact range.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DOMAIN_TOL",
    "LinkFunction",
    "ContractionBounds",
    "ParametricLink",
    "ConstantLink",
    "ProcessPath",
    "poisson_draw",
    "simulate",
    "write_path_csv",
    "read_path_csv",
]

# Slack for floating-point drift when validating intensities at the domain
# edges; values inside the slack are clamped, values beyond it are errors.
DOMAIN_TOL = 1e-9


class LinkFunction:
    """Base class for intensity recursion maps on [0, max_intensity] x N."""

    max_intensity: float

    def value(self, lam: float, y: int) -> float:
        """Evaluate the link at intensity ``lam`` and count ``y``."""
        raise NotImplementedError

    def values(self, lams, ys) -> np.ndarray:
        """Vectorized :meth:`value` over equal-length arrays."""
        lams = np.asarray(lams, dtype=float)
        ys = np.asarray(ys)
        return np.array([self.value(l, int(y)) for l, y in zip(lams, ys)])

    def __call__(self, lam: float, y: int) -> float:
        return self.value(lam, y)

    def _clamp_domain(self, lam: float) -> float:
        m = self.max_intensity
        if not (-DOMAIN_TOL <= lam <= m + DOMAIN_TOL):
            raise ValueError(f"intensity {lam!r} outside [0, {m}]")
        return min(max(lam, 0.0), m)


@dataclass(frozen=True)
class ContractionBounds:
    """Joint Lipschitz bounds certifying that a link is contractive.

    A link ``g`` conforms to these bounds if
    ``|g(l1, y1) - g(l2, y2)| <= intensity_lipschitz * |l1 - l2|
    + count_lipschitz * |y1 - y2|`` and its values stay in
    ``[0, max_intensity]``.  With ``strict`` set the two constants must sum
    to less than one, which forces the influence of the starting intensity
    to decay geometrically along any count sequence.
    """

    max_intensity: float
    intensity_lipschitz: float
    count_lipschitz: float
    strict: bool = False

    def __post_init__(self):
        if not self.max_intensity > 0:
            raise ValueError("max_intensity must be positive")
        if self.intensity_lipschitz < 0 or self.count_lipschitz < 0:
            raise ValueError("Lipschitz constants must be non-negative")
        if self.strict and not self.intensity_lipschitz + self.count_lipschitz < 1:
            raise ValueError(
                "strict mode requires intensity_lipschitz + count_lipschitz < 1"
            )


@dataclass(frozen=True)
class ParametricLink(LinkFunction):
    """Bounded sinusoidal link used as the reference data-generating truth.

    ``value(lam, y)`` is
    ``intercept + intensity_coef * lam + count_coef * min(y, count_cap)
    + wave_coef * (sin(2*pi*lam/period) + cos(2*pi*min(y, count_cap)/period))``
    floored at 0 and capped at ``max_intensity``.  The defaults give the
    reference truth used throughout the test experiments.
    """

    intercept: float = 0.3
    intensity_coef: float = 0.3
    count_coef: float = 0.3
    wave_coef: float = -0.1
    period: float = 2.0
    max_intensity: float = 2.0
    count_cap: int = 5

    def value(self, lam: float, y: int) -> float:
        lam = self._clamp_domain(lam)
        yc = min(int(y), self.count_cap)
        w = 2.0 * math.pi / self.period
        raw = (
            self.intercept
            + self.intensity_coef * lam
            + self.count_coef * yc
            + self.wave_coef * (math.sin(w * lam) + math.cos(w * yc))
        )
        return min(max(raw, 0.0), self.max_intensity)

    def values(self, lams, ys) -> np.ndarray:
        lams = np.minimum(np.maximum(np.asarray(lams, dtype=float), 0.0),
                          self.max_intensity)
        yc = np.minimum(np.asarray(ys, dtype=float), self.count_cap)
        w = 2.0 * np.pi / self.period
        raw = (
            self.intercept
            + self.intensity_coef * lams
            + self.count_coef * yc
            + self.wave_coef * (np.sin(w * lams) + np.cos(w * yc))
        )
        return np.minimum(np.maximum(raw, 0.0), self.max_intensity)

    @property
    def intensity_slope_bound(self) -> float:
        """Supremum of the intensity-direction derivative."""
        return self.intensity_coef + abs(self.wave_coef) * 2.0 * math.pi / self.period

    @property
    def count_gap_bound(self) -> float:
        """Largest change across adjacent count levels."""
        return self.count_coef + 2.0 * abs(self.wave_coef)


@dataclass(frozen=True)
class ConstantLink(LinkFunction):
    """Link that ignores its arguments; the counts are then i.i.d. Poisson."""

    level: float
    max_intensity: float

    def __post_init__(self):
        if not 0.0 <= self.level <= self.max_intensity:
            raise ValueError("level must lie in [0, max_intensity]")

    def value(self, lam: float, y: int) -> float:
        self._clamp_domain(lam)
        return self.level

    def values(self, lams, ys) -> np.ndarray:
        return np.full(len(np.asarray(lams)), self.level)


def poisson_draw(lam: float, rng: np.random.Generator) -> int:
    """Draw one Poisson(lam) variate by inversion.

    Uses sequential search on the CDF: a single uniform ``u`` is drawn and
    the smallest ``k`` with ``P(X <= k) >= u`` is returned.  This consumes
    exactly one uniform per draw, which keeps streams reproducible and
    independent of any library Poisson implementation.  The expected cost
    is ``O(1 + lam)``, fine for the moderate intensities of this model.
    """
    if not lam >= 0.0:
        raise ValueError(f"Poisson intensity must be non-negative, got {lam!r}")
    u = rng.random()
    p = math.exp(-lam)
    cdf = p
    k = 0
    # Hard cap guards against degenerate loops if exp(-lam) underflows.
    kmax = 1000 + int(100.0 * lam)
    while u > cdf and k < kmax:
        k += 1
        p *= lam / k
        cdf += p
        if p == 0.0:
            break
    return k


@dataclass(frozen=True)
class ProcessPath:
    """A simulated trajectory of (intensity, count) pairs.

    ``intensities[t + 1] == link(intensities[t], counts[t])`` holds exactly
    for the link the path was simulated from, so a stored path can be
    re-validated bit for bit.  ``seed`` is ``None`` for paths loaded from
    CSV, where the generator state is unknown.
    """

    intensities: np.ndarray
    counts: np.ndarray
    seed: int | None
    burn_in: int
    initial_intensity: float

    def __post_init__(self):
        intensities = np.asarray(self.intensities, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if intensities.shape != counts.shape or intensities.ndim != 1:
            raise ValueError("intensities and counts must be equal-length 1-d arrays")
        if counts.size and counts.min() < 0:
            raise ValueError("counts must be non-negative")
        intensities.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return self.counts.size

    @property
    def max_count(self) -> int:
        return int(self.counts.max())


def simulate(
    link: LinkFunction,
    n: int,
    burn_in: int = 50,
    initial_intensity: float | None = None,
    seed: int = 0,
) -> ProcessPath:
    """Simulate ``n`` (intensity, count) pairs from the link's recursion.

    Runs ``Y_t ~ Poisson(lambda_t)``, ``lambda_{t+1} = link(lambda_t, Y_t)``
    for ``burn_in + n`` steps and discards the first ``burn_in`` pairs.  The
    default start is mid-range, ``max_intensity / 2``; the burn-in makes the
    choice immaterial for contractive links.  Deterministic given ``seed``.

    Raises
    ------
    ValueError
        If the link ever returns a value outside ``[0, max_intensity]``,
        which indicates a non-conforming user link.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    m = link.max_intensity
    if initial_intensity is None:
        initial_intensity = m / 2.0
    if not 0.0 <= initial_intensity <= m:
        raise ValueError(f"initial intensity {initial_intensity!r} outside [0, {m}]")

    rng = np.random.default_rng(seed)
    total = burn_in + n
    intensities = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    lam = float(initial_intensity)
    for t in range(total):
        y = poisson_draw(lam, rng)
        if t >= burn_in:
            intensities[t - burn_in] = lam
            counts[t - burn_in] = y
        lam = link.value(lam, y)
        if not 0.0 <= lam <= m:
            raise ValueError(
                f"link returned {lam!r} outside [0, {m}] at step {t}; "
                "links must map into their stated intensity range"
            )
    return ProcessPath(intensities, counts, seed, burn_in, initial_intensity)


def _fmt(x: float) -> str:
    # Shortest decimal representation that round-trips exactly.
    return repr(float(x))


def write_path_csv(path: ProcessPath, file) -> None:
    """Write a path as CSV with header ``t,lambda,y``.

    Floats use the shortest round-trip representation, so reading the file
    back reproduces the stored intensities exactly.
    """
    close = False
    if isinstance(file, (str, bytes)) or hasattr(file, "__fspath__"):
        file = open(file, "w", newline="")
        close = True
    try:
        writer = csv.writer(file)
        writer.writerow(["t", "lambda", "y"])
        for t, (lam, y) in enumerate(zip(path.intensities, path.counts)):
            writer.writerow([t, _fmt(lam), int(y)])
    finally:
        if close:
            file.close()


def read_path_csv(file) -> ProcessPath:
    """Read a path written by :func:`write_path_csv`.

    The generator seed and burn-in are not part of the CSV, so the returned
    path carries ``seed=None`` and ``burn_in=0``.
    """
    close = False
    if isinstance(file, (str, bytes)) or hasattr(file, "__fspath__"):
        file = open(file, "r", newline="")
        close = True
    try:
        reader = csv.reader(file)
        header = next(reader, None)
        if header != ["t", "lambda", "y"]:
            raise ValueError(f"unexpected path CSV header: {header!r}")
        lams = []
        ys = []
        for row in reader:
            if not row:
                continue
            lams.append(float(row[1]))
            ys.append(int(row[2]))
    finally:
        if close:
            file.close()
    if not lams:
        raise ValueError("path CSV contains no rows")
    arr = np.array(lams)
    return ProcessPath(arr, np.array(ys, dtype=np.int64), None, 0, float(arr[0]))
