"""Quadratic B-spline candidate links with certified Lipschitz bounds.

Candidates are surfaces ``s(lam, y) = sum_p coeff[p, min(y, cap)] * N_p(lam)``
where ``N_p`` are the normalized quadratic B-splines on an equidistant knot
sequence covering ``[0, max_intensity]``.  Coefficients live on a finite
equidistant value grid during optimization, which makes the candidate set
finite; real-valued coefficients are accepted everywhere for analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .process import DOMAIN_TOL, ContractionBounds, LinkFunction

__all__ = [
    "CONSTRAINT_TOL",
    "SieveConfig",
    "build_sieve_config",
    "knot_intervals",
    "cox_de_boor",
    "bspline_basis",
    "SplineLink",
    "ConstraintReport",
    "check_contractive",
    "sieve_from_spacing",
    "sample_link_coefficients",
    "snap_to_grid",
    "save_spline_link",
    "load_spline_link",
]

# Slack for the constraint comparisons.  Links whose Lipschitz constants are
# exactly tight produce excesses on the order of the rounding error; the
# slack absorbs those without weakening the certificate beyond the 1e-10
# resolution the checker is tested at.
CONSTRAINT_TOL = 1e-12


def cox_de_boor(knots, index: int, degree: int, x: float) -> float:
    """Normalized B-spline ``N_{index,degree}`` at ``x`` by Cox-de Boor recursion.

    ``index`` addresses the knot array directly: the basis function is
    supported on ``[knots[index], knots[index + degree + 1]]``.  Degree-0
    functions are indicators of half-open intervals, which yields the
    continuous limit from the right at interior knots.
    """
    knots = np.asarray(knots, dtype=float)
    if index < 0 or index + degree + 1 >= knots.size:
        raise IndexError(f"basis index {index} out of range for {knots.size} knots")
    if degree == 0:
        return 1.0 if knots[index] <= x < knots[index + 1] else 0.0
    left_den = knots[index + degree] - knots[index]
    right_den = knots[index + degree + 1] - knots[index + 1]
    out = 0.0
    if left_den > 0.0:
        out += (x - knots[index]) / left_den * cox_de_boor(knots, index, degree - 1, x)
    if right_den > 0.0:
        out += (
            (knots[index + degree + 1] - x)
            / right_den
            * cox_de_boor(knots, index + 1, degree - 1, x)
        )
    return out


@dataclass(frozen=True)
class SieveConfig:
    """Knot sequence and coefficient grid defining the finite candidate set.

    ``knots`` holds the equidistant sequence from two spacings below 0 up to
    two spacings above ``max_intensity``; basis functions are indexed by
    ``p in {-2, ..., num_intervals - 1}``.  ``grid`` is the sorted set of
    admissible coefficient values; ``count_cap`` is the largest count level
    with its own coefficient column (evaluation clamps larger counts).
    """

    max_intensity: float
    spacing: float
    knots: np.ndarray
    grid: np.ndarray
    count_cap: int

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        grid = np.asarray(self.grid, dtype=float)
        m = self.max_intensity
        if not m > 0:
            raise ValueError("max_intensity must be positive")
        if self.count_cap < 0:
            raise ValueError("count_cap must be non-negative")
        l = int(round(m / self.spacing))
        if knots.size != l + 5:
            raise ValueError("knot sequence must run two spacings past each end")
        if knots[2] != 0.0 or knots[l + 2] != m:
            raise ValueError("knots must satisfy xi_0 = 0 and xi_l = max_intensity")
        steps = np.diff(knots)
        if np.any(np.abs(steps - self.spacing) > 1e-9 * max(1.0, m)):
            raise ValueError("knots must be equidistant with the stated spacing")
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must hold at least two increasing values")
        if grid[0] != 0.0 or grid[-1] != m:
            raise ValueError("grid must span [0, max_intensity] inclusively")
        gsteps = np.diff(grid)
        if np.any(np.abs(gsteps - gsteps[0]) > 1e-9 * max(1.0, m)):
            raise ValueError("grid must be equidistant")
        knots.setflags(write=False)
        grid.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "grid", grid)

    @property
    def num_intervals(self) -> int:
        """Number of knot intervals inside [0, max_intensity]."""
        return int(round(self.max_intensity / self.spacing))

    @property
    def basis_count(self) -> int:
        """Number of basis functions supported on [0, max_intensity]."""
        return self.num_intervals + 2

    @property
    def grid_step(self) -> float:
        return float(self.grid[1] - self.grid[0])


def knot_intervals(max_intensity: float, n: int, knot_scale: float = 2.0) -> int:
    """Number of knot intervals for sample size ``n`` (cube-root rule)."""
    if not max_intensity > 0:
        raise ValueError("max_intensity must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    return max(1, round(max_intensity * n ** (1.0 / 3.0) / knot_scale))


def build_sieve_config(
    max_intensity: float,
    n: int,
    grid_points: int = 11,
    count_cap: int = 5,
    knot_scale: float = 2.0,
) -> SieveConfig:
    """Build the sieve for a sample of size ``n``.

    The knot spacing follows the cube-root rule
    ``spacing = max_intensity / round(max_intensity * n**(1/3) / knot_scale)``
    so doubling ``n`` by a factor of eight halves the spacing up to rounding.
    The default ``knot_scale = 2`` gives spacing 0.2 at ``max_intensity = 2``
    and ``n = 1000``.  The coefficient grid is ``grid_points`` equidistant
    values spanning ``[0, max_intensity]``.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    if count_cap < 0:
        raise ValueError("count_cap must be non-negative")
    l = knot_intervals(max_intensity, n, knot_scale)
    return _config_from_intervals(max_intensity, l, grid_points, count_cap)


def sieve_from_spacing(
    max_intensity: float, spacing: float, grid_points: int, count_cap: int
) -> SieveConfig:
    """Build a sieve from an explicit knot spacing instead of a sample size."""
    if not 0 < spacing <= max_intensity:
        raise ValueError("spacing must lie in (0, max_intensity]")
    l = round(max_intensity / spacing)
    if l < 1 or abs(l * spacing - max_intensity) > 1e-9 * max_intensity:
        raise ValueError("spacing must divide max_intensity into whole intervals")
    return _config_from_intervals(max_intensity, l, grid_points, count_cap)


def _config_from_intervals(
    max_intensity: float, l: int, grid_points: int, count_cap: int
) -> SieveConfig:
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    spacing = max_intensity / l
    inner = np.linspace(0.0, max_intensity, l + 1)
    knots = np.concatenate(
        (
            [-2.0 * spacing, -spacing],
            inner,
            [max_intensity + spacing, max_intensity + 2.0 * spacing],
        )
    )
    grid = np.linspace(0.0, max_intensity, grid_points)
    return SieveConfig(max_intensity, spacing, knots, grid, count_cap)


def bspline_basis(config: SieveConfig, p: int, lam: float) -> float:
    """Evaluate the normalized quadratic basis ``N_p`` at ``lam`` in [0, M].

    ``p`` runs over ``{-2, ..., num_intervals - 1}``; the support of ``N_p``
    is ``[xi_p, xi_{p+3}]``.  The restricted family forms a partition of
    unity on the whole of ``[0, max_intensity]``.
    """
    if p < -2 or p > config.num_intervals - 1:
        raise IndexError(f"basis index {p} outside [-2, {config.num_intervals - 1}]")
    m = config.max_intensity
    if not (-DOMAIN_TOL <= lam <= m + DOMAIN_TOL):
        raise ValueError(f"evaluation point {lam!r} outside [0, {m}]")
    lam = min(max(lam, 0.0), m)
    return cox_de_boor(config.knots, p + 2, 2, lam)


@dataclass(frozen=True)
class SplineLink(LinkFunction):
    """Candidate link: a quadratic spline in the intensity, per count level.

    ``coeffs`` has shape ``(basis_count, count_cap + 1)``; entry ``[p + 2, y]``
    multiplies basis ``N_p`` at count level ``y``.  Counts beyond
    ``count_cap`` reuse the last column.  When every coefficient lies in
    ``[0, max_intensity]`` so does every value (partition of unity); the
    output is additionally clamped so floating-point drift cannot escape
    the range.
    """

    config: SieveConfig
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        want = (self.config.basis_count, self.config.count_cap + 1)
        if coeffs.shape != want:
            raise ValueError(f"coefficient matrix must have shape {want}, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def max_intensity(self) -> float:  # type: ignore[override]
        return self.config.max_intensity

    @classmethod
    def constant(cls, config: SieveConfig, level: float) -> "SplineLink":
        """The constant candidate s == level (all coefficients equal)."""
        coeffs = np.full((config.basis_count, config.count_cap + 1), float(level))
        return cls(config, coeffs)

    def value(self, lam: float, y: int) -> float:
        # Only the three basis functions over the containing knot interval
        # are nonzero, so evaluation is O(1) in the number of intervals.
        cfg = self.config
        lam = self._clamp_domain(lam)
        yc = min(int(y), cfg.count_cap)
        pos = lam / cfg.spacing
        iv = min(int(pos), cfg.num_intervals - 1)
        u = pos - iv
        w0 = 0.5 * (1.0 - u) * (1.0 - u)
        w2 = 0.5 * u * u
        w1 = 1.0 - w0 - w2
        c = self.coeffs
        out = c[iv, yc] * w0 + c[iv + 1, yc] * w1 + c[iv + 2, yc] * w2
        return min(max(out, 0.0), cfg.max_intensity)

    def values(self, lams, ys) -> np.ndarray:
        cfg = self.config
        lams = np.minimum(np.maximum(np.asarray(lams, dtype=float), 0.0),
                          cfg.max_intensity)
        yc = np.minimum(np.asarray(ys, dtype=np.int64), cfg.count_cap)
        pos = lams / cfg.spacing
        iv = np.minimum(pos.astype(np.int64), cfg.num_intervals - 1)
        u = pos - iv
        w0 = 0.5 * (1.0 - u) * (1.0 - u)
        w2 = 0.5 * u * u
        w1 = 1.0 - w0 - w2
        c = self.coeffs
        out = c[iv, yc] * w0 + c[iv + 1, yc] * w1 + c[iv + 2, yc] * w2
        return np.minimum(np.maximum(out, 0.0), cfg.max_intensity)


@dataclass(frozen=True)
class ConstraintReport:
    """Result of checking a spline candidate against contraction bounds.

    ``max_intensity_slope`` is the exact supremum of ``|ds/dlam|``: the
    derivative of a quadratic spline on equidistant knots is the degree-one
    spline with coefficients ``(a_p - a_{p-1}) / spacing``, and those hat
    functions all attain their peak of one inside the domain, so the
    supremum equals the largest absolute derivative coefficient.
    ``max_count_gap`` is the largest coefficient change between adjacent
    count levels, which bounds the sup-norm gap by partition of unity (a
    sufficient, slightly conservative criterion).  ``offending`` lists
    ``(p, y)`` pairs: for slope entries ``p`` is the derivative-coefficient
    index (difference between stored coefficients ``p`` and ``p - 1``), for
    gap entries ``y`` is the upper level of the violating pair, and range
    violations point at the coefficient itself.
    """

    passes: bool
    max_intensity_slope: float
    max_count_gap: float
    offending: tuple

    def __bool__(self) -> bool:
        return self.passes


def check_contractive(link: SplineLink, bounds: ContractionBounds) -> ConstraintReport:
    """Certify membership of a spline candidate in the contractive class.

    Verifies, per count level, the exact intensity-slope bound, the
    sufficient adjacent-level gap bound, and the coefficient range
    ``[0, max_intensity]``.  Comparisons allow ``CONSTRAINT_TOL`` of slack
    so links whose constants are exactly tight are not rejected over
    rounding noise.  Failures are reported, never raised.
    """
    cfg = link.config
    coeffs = link.coeffs
    offending = []
    tol = CONSTRAINT_TOL

    slopes = np.diff(coeffs, axis=0) / cfg.spacing
    max_slope = float(np.max(np.abs(slopes))) if slopes.size else 0.0
    bad = np.argwhere(np.abs(slopes) > bounds.intensity_lipschitz + tol)
    for j, y in bad:
        offending.append((int(j) - 1, int(y)))

    if cfg.count_cap >= 1:
        gaps = np.diff(coeffs, axis=1)
        max_gap = float(np.max(np.abs(gaps)))
        bad = np.argwhere(np.abs(gaps) > bounds.count_lipschitz + tol)
        for j, y in bad:
            offending.append((int(j) - 2, int(y) + 1))
    else:
        max_gap = 0.0

    in_range = True
    bad = np.argwhere((coeffs < -tol) | (coeffs > bounds.max_intensity + tol))
    for j, y in bad:
        in_range = False
        offending.append((int(j) - 2, int(y)))

    passes = (
        max_slope <= bounds.intensity_lipschitz + tol
        and max_gap <= bounds.count_lipschitz + tol
        and in_range
    )
    return ConstraintReport(passes, max_slope, max_gap, tuple(offending))


def sample_link_coefficients(
    config: SieveConfig, link: LinkFunction, count_cap: int | None = None
) -> np.ndarray:
    """Coefficients sampling ``link`` at the basis anchor points.

    Each basis function is anchored at the midpoint of its central knot
    interval (its Greville abscissa for quadratic splines), clamped into the
    domain near the boundary.  The resulting spline reproduces the link up
    to second order in the knot spacing and inherits its Lipschitz bounds.
    """
    if count_cap is None:
        count_cap = config.count_cap
    knots = config.knots
    anchors = 0.5 * (knots[1:config.basis_count + 1] + knots[2:config.basis_count + 2])
    anchors = np.minimum(np.maximum(anchors, 0.0), config.max_intensity)
    coeffs = np.empty((config.basis_count, count_cap + 1))
    for y in range(count_cap + 1):
        coeffs[:, y] = [link.value(a, y) for a in anchors]
    return coeffs


def snap_to_grid(values, grid) -> np.ndarray:
    """Map values to the nearest grid point (grid must be equidistant)."""
    grid = np.asarray(grid, dtype=float)
    step = grid[1] - grid[0]
    idx = np.rint((np.asarray(values, dtype=float) - grid[0]) / step).astype(np.int64)
    return grid[np.clip(idx, 0, grid.size - 1)]


def save_spline_link(link: SplineLink, base_path) -> None:
    """Write ``<base>.csv`` (rows ``p,y,alpha``) and ``<base>.cfg`` sidecar.

    The sidecar is plain ``key = value`` text recording the sieve geometry
    (max_intensity, spacing, count_cap and the coefficient grid), enough to
    rebuild the link exactly with :func:`load_spline_link`.
    """
    base = str(base_path)
    cfg = link.config
    with open(base + ".csv", "w", newline="") as fh:
        fh.write("p,y,alpha\n")
        for a in range(cfg.basis_count):
            for y in range(cfg.count_cap + 1):
                fh.write(f"{a - 2},{y},{repr(float(link.coeffs[a, y]))}\n")
    with open(base + ".cfg", "w") as fh:
        fh.write(f"max_intensity = {repr(float(cfg.max_intensity))}\n")
        fh.write(f"spacing = {repr(float(cfg.spacing))}\n")
        fh.write(f"count_cap = {cfg.count_cap}\n")
        fh.write("grid = " + ",".join(repr(float(g)) for g in cfg.grid) + "\n")


def load_spline_link(base_path) -> SplineLink:
    """Rebuild a spline link written by :func:`save_spline_link`."""
    base = str(base_path)
    keys = {}
    with open(base + ".cfg") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            keys[key.strip()] = value.strip()
    m = float(keys["max_intensity"])
    spacing = float(keys["spacing"])
    count_cap = int(keys["count_cap"])
    grid = np.array([float(v) for v in keys["grid"].split(",")])
    l = round(m / spacing)
    inner = np.linspace(0.0, m, l + 1)
    knots = np.concatenate(
        ([-2.0 * spacing, -spacing], inner, [m + spacing, m + 2.0 * spacing])
    )
    config = SieveConfig(m, spacing, knots, grid, count_cap)

    coeffs = np.empty((config.basis_count, count_cap + 1))
    seen = np.zeros_like(coeffs, dtype=bool)
    with open(base + ".csv") as fh:
        header = fh.readline().strip()
        if header != "p,y,alpha":
            raise ValueError(f"unexpected coefficient CSV header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            p_s, y_s, a_s = line.split(",")
            coeffs[int(p_s) + 2, int(y_s)] = float(a_s)
            seen[int(p_s) + 2, int(y_s)] = True
    if not seen.all():
        raise ValueError("coefficient CSV does not cover the full index range")
    return SplineLink(config, coeffs)
