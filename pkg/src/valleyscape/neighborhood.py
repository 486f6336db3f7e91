"""Area-ratio valley tests in delta-hypercube neighborhoods.

For a point ``x`` and half-width ``delta`` the neighborhood is the cube
``prod_i [x_i - delta, x_i + delta]``. Its lower/higher area ratio is

    measure{x' in cube : f(x') < f(x)} / measure{x' in cube : f(x') > f(x)}

estimated by Monte-Carlo counts (the cube volume cancels). A landscape has
a valley at ``x`` when its ratio is strictly smaller than the ratio of the
sphere benchmark at the same point and the same ``delta``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from valleyscape.errors import ConfigError, IndeterminateError
from valleyscape.landscape import (
    DEFAULT_GRADIENT_STEP,
    Domain,
    Landscape,
    as_point,
    gradient,
    sphere,
)
from valleyscape.sampling import RngStream, job_stream_id, substream

TIE_TOL = 1e-12
DEFAULT_DELTAS = (0.5, 1.0, 2.0, 5.0, 10.0)

FINITE = "FINITE"
INFINITE = "INFINITE"
UNDEFINED = "UNDEFINED"


@dataclass(frozen=True)
class Neighborhood:
    center: np.ndarray
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        object.__setattr__(self, "center", as_point(self.center))

    @property
    def box(self) -> Domain:
        return Domain(self.center - self.delta, self.center + self.delta)

    @property
    def volume(self) -> float:
        return (2.0 * self.delta) ** self.center.size


@dataclass(frozen=True)
class RatioEstimate:
    """Counts of strictly lower / strictly higher / tied samples in a cube."""

    lower: int
    higher: int
    ties: int
    n: int

    @property
    def flag(self) -> str:
        if self.higher > 0:
            return FINITE
        return INFINITE if self.lower > 0 else UNDEFINED

    @property
    def ratio(self) -> float:
        """``lower / higher``; ``inf`` for INFINITE, ``nan`` for UNDEFINED."""
        if self.higher > 0:
            return self.lower / self.higher
        return math.inf if self.lower > 0 else math.nan

    @property
    def se(self) -> float:
        """Delta-method standard error of the ratio under multinomial counts.

        With ``p_l = L/n`` and ``p_h = H/n``::

            Var(log R) ~ (1 - p_l)/L + (1 - p_h)/H + 2/n
        """
        if self.flag != FINITE:
            return math.nan
        if self.lower == 0:
            return 0.0
        pl, ph = self.lower / self.n, self.higher / self.n
        var_log = (1 - pl) / self.lower + (1 - ph) / self.higher + 2.0 / self.n
        return self.ratio * math.sqrt(var_log)

    def area_ratio(self, volume: float) -> float:
        """Same ratio computed from areas (counts scaled by cell volume)."""
        if self.flag != FINITE:
            return self.ratio
        cell = volume / self.n
        return (self.lower * cell) / (self.higher * cell)


def _classify(landscape: Landscape, center: np.ndarray, points: np.ndarray,
              tol: float = TIE_TOL) -> tuple[int, int, int]:
    f0 = float(landscape(center))
    diff = np.asarray(landscape(points), dtype=float) - f0
    lower = int(np.count_nonzero(diff < -tol))
    higher = int(np.count_nonzero(diff > tol))
    return lower, higher, diff.size - lower - higher


def estimate_area_ratio(landscape: Landscape, x, delta: float, n: int,
                        stream: RngStream) -> RatioEstimate:
    """Monte-Carlo lower/higher ratio from ``n`` uniform points in the cube.

    Samples with ``|f(x') - f(x)| <= 1e-12`` count as ties and are left out
    of both numerator and denominator.
    """
    center = as_point(x, landscape.dimension)
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    if n < 1:
        raise ConfigError(f"sample count must be >= 1, got {n}")
    u = stream.random((n, center.size))
    points = center - delta + (2.0 * delta) * u
    return RatioEstimate(*_classify(landscape, center, points), n)


def grid_area_ratio(landscape: Landscape, x, delta: float, cells: int = 2000,
                    chunk_rows: int = 250) -> RatioEstimate:
    """Deterministic oracle: classify the centers of a ``cells**d`` lattice.

    Only meant for small ``d`` (test and verification use). Each cell has
    equal volume, so the count ratio equals the midpoint-rule area ratio.
    """
    center = as_point(x, landscape.dimension)
    d = center.size
    axes = [center[i] - delta + (np.arange(cells) + 0.5) * (2.0 * delta / cells)
            for i in range(d)]
    if d == 1:
        return RatioEstimate(*_classify(landscape, center, axes[0][:, None]), cells)
    rest = np.stack([m.reshape(-1) for m in np.meshgrid(*axes[1:], indexing="ij")], axis=-1)
    lower = higher = ties = 0
    for start in range(0, cells, chunk_rows):
        first = axes[0][start:start + chunk_rows]
        pts = np.concatenate([np.repeat(first, len(rest))[:, None],
                              np.tile(rest, (first.size, 1))], axis=1)
        lo, hi, ti = _classify(landscape, center, pts)
        lower, higher, ties = lower + lo, higher + hi, ties + ti
    return RatioEstimate(lower, higher, ties, cells ** d)


# ------------------------------------------------------------------ valley test


def _strictly_less(a: RatioEstimate, b: RatioEstimate) -> bool:
    fa, fb = a.flag, b.flag
    if fa == UNDEFINED and fb == UNDEFINED:
        raise IndeterminateError("both area ratios are undefined (all samples tied)")
    if UNDEFINED in (fa, fb):
        return False
    return a.ratio < b.ratio


@dataclass(frozen=True)
class ValleyTestResult:
    point: np.ndarray
    delta: float
    tested: RatioEstimate
    benchmark: RatioEstimate
    verdict: bool

    @property
    def margin(self) -> float:
        """``benchmark ratio - tested ratio``; positive when the test passes."""
        a, b = self.tested.ratio, self.benchmark.ratio
        if math.isinf(a) and math.isinf(b):
            return 0.0
        return b - a


def valley_point_test(landscape: Landscape, x, delta: float, n: int, seed: int,
                      stream_id: int = 0, benchmark: Landscape | None = None,
                      benchmark_delta: float | None = None) -> ValleyTestResult:
    """Compare the area ratio of ``landscape`` at ``x`` with the sphere's.

    Both estimates use the stream ``(seed, stream_id)`` from its start, so
    the two landscapes are classified on identical sample offsets. The
    benchmark neighborhood half-width defaults to ``delta``.
    """
    center = as_point(x, landscape.dimension)
    bench = benchmark if benchmark is not None else sphere(landscape.dimension)
    bdelta = delta if benchmark_delta is None else benchmark_delta
    tested = estimate_area_ratio(landscape, center, delta, n, substream(seed, stream_id))
    ref = estimate_area_ratio(bench, center, bdelta, n, substream(seed, stream_id))
    return ValleyTestResult(center, float(delta), tested, ref, _strictly_less(tested, ref))


@dataclass(frozen=True)
class NarrownessReport:
    beta: float
    argmax: np.ndarray | None
    estimates: list[RatioEstimate]


def narrowness_beta(landscape: Landscape, points: Sequence, delta: float, n: int,
                    seed: int) -> NarrownessReport:
    """Largest area ratio over a finite set of valley points.

    Point ``i`` uses stream ``(seed, i)``. An INFINITE ratio at any point
    makes beta infinite; UNDEFINED points are skipped.
    """
    pts = [as_point(p, landscape.dimension) for p in points]
    if not pts:
        raise ConfigError("narrowness needs at least one valley point")
    estimates = [estimate_area_ratio(landscape, p, delta, n, substream(seed, job_stream_id(i)))
                 for i, p in enumerate(pts)]
    beta, arg = math.nan, None
    for p, est in zip(pts, estimates):
        r = est.ratio
        if math.isnan(r):
            continue
        if math.isnan(beta) or r > beta:
            beta, arg = r, p
    return NarrownessReport(beta, arg, estimates)


@dataclass
class WidthReport:
    alpha: float | None
    deltas: tuple[float, ...]
    results: dict[float, list[ValleyTestResult]] = field(default_factory=dict)

    def passed(self, delta: float) -> bool:
        return all(r.verdict for r in self.results[delta])

    def table(self) -> list[tuple[float, int, int]]:
        """``(delta, passes, points)`` per candidate."""
        return [(d, sum(r.verdict for r in self.results[d]), len(self.results[d]))
                for d in self.deltas]


def width_alpha(landscape: Landscape, points: Sequence, deltas: Sequence[float] = DEFAULT_DELTAS,
                n: int = 100_000, seed: int = 0) -> WidthReport:
    """Largest candidate delta up to which the valley test passes everywhere.

    Alpha is the largest candidate such that it and every smaller candidate
    pass at all points; ``None`` if the smallest candidate already fails.
    The test at point ``i`` and candidate ``j`` uses stream ``(seed, (i, j))``.
    """
    deltas = tuple(float(d) for d in deltas)
    if not deltas:
        raise ConfigError("width search needs at least one candidate delta")
    if any(d <= 0 for d in deltas) or list(deltas) != sorted(deltas):
        raise ConfigError("candidate deltas must be positive and sorted ascending")
    pts = [as_point(p, landscape.dimension) for p in points]
    if not pts:
        raise ConfigError("width search needs at least one valley point")
    report = WidthReport(None, deltas)
    for j, delta in enumerate(deltas):
        report.results[delta] = [
            valley_point_test(landscape, p, delta, n, seed, stream_id=job_stream_id(i, j))
            for i, p in enumerate(pts)
        ]
    for delta in deltas:
        if not report.passed(delta):
            break
        report.alpha = delta
    return report


@dataclass(frozen=True)
class Alignment:
    angle_deg: float
    stationary: bool
    gradient: np.ndarray


def gradient_alignment(landscape: Landscape, direction, points: Sequence,
                       step: float = DEFAULT_GRADIENT_STEP, zero_tol: float = 1e-12) -> list[Alignment]:
    """Angle (degrees) between the gradient and the line spanned by ``direction``.

    The angle is taken to the nearer of ``+direction`` and ``-direction`` so
    it lies in [0, 90]. A gradient with norm ``<= zero_tol`` is reported as
    stationary with angle 0.
    """
    v = as_point(direction, landscape.dimension)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ConfigError("direction must be a unit vector")
    out = []
    for p in points:
        g = gradient(landscape, p, step)
        norm = float(np.linalg.norm(g))
        if norm <= zero_tol:
            out.append(Alignment(0.0, True, g))
            continue
        cos = min(1.0, abs(float(g @ v)) / norm)
        out.append(Alignment(math.degrees(math.acos(cos)), False, g))
    return out


# ------------------------------------------------------------------ CSV output


def ratio_scan_csv(results: Sequence[ValleyTestResult]) -> str:
    """Rows ``x1,...,xd,delta,lower,higher,ties,ratio,se,sphere_ratio,verdict``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if not results:
        return ""
    d = results[0].point.size
    writer.writerow([f"x{i + 1}" for i in range(d)] +
                    ["delta", "lower", "higher", "ties", "ratio", "se", "sphere_ratio", "verdict"])
    for r in results:
        t = r.tested
        writer.writerow([f"{c:.17g}" for c in r.point] + [
            f"{r.delta:.17g}", t.lower, t.higher, t.ties, f"{t.ratio:.17g}", f"{t.se:.17g}",
            f"{r.benchmark.ratio:.17g}", "true" if r.verdict else "false",
        ])
    return buf.getvalue()
