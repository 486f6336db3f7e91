"""Objective functions, elliptic valley families, homeomorphic transforms.

Objectives are vectorized: they take an array of shape ``(..., d)`` and
return fitness values of shape ``(...)``. All landscapes are minimized.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from valleyscape.errors import (
    AmbiguousValleyError,
    ConfigError,
    DimensionError,
    InputError,
    InvalidHomeomorphismError,
)

Objective = Callable[[np.ndarray], np.ndarray]

ORDER_TIE_TOL = 1e-12
ROUND_TRIP_TOL = 1e-9
DEFAULT_GRADIENT_STEP = 1e-5


def as_point(x, dimension: int | None = None) -> np.ndarray:
    """Validate a single point and return it as a float array of shape (d,)."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DimensionError(f"expected a 1-d point, got shape {p.shape}")
    if dimension is not None and p.size != dimension:
        raise DimensionError(f"point has dimension {p.size}, expected {dimension}")
    if not np.all(np.isfinite(p)):
        raise InputError(f"point has non-finite coordinates: {p}")
    return p


@dataclass(frozen=True, init=False)
class Domain:
    """Axis-aligned box ``prod_i [lower_i, upper_i]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        lo = np.asarray(lower, dtype=float).reshape(-1)
        hi = np.asarray(upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionError("lower and upper bounds must be non-empty and the same length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("domain bounds must be finite")
        if not np.all(lo < hi):
            raise ConfigError(f"degenerate domain: need lower < upper on every axis ({lo}, {hi})")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, dimension: int) -> Domain:
        return cls([lo] * dimension, [hi] * dimension)

    @property
    def dimension(self) -> int:
        return self.lower.size

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)


class Landscape:
    """A deterministic objective over R^d with a label.

    Calling the landscape evaluates the objective on a point or a batch of
    points without validation; :func:`evaluate` is the checked entry point.
    """

    def __init__(self, objective: Objective, dimension: int, label: str,
                 domain: Domain | None = None):
        if dimension < 1:
            raise ConfigError("dimension must be >= 1")
        if domain is not None and domain.dimension != dimension:
            raise DimensionError("domain dimension does not match landscape dimension")
        self._objective = objective
        self.dimension = int(dimension)
        self.label = label
        self.domain = domain
        self.params: EllipticParams | None = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label!r}, d={self.dimension})"

    def __call__(self, x) -> np.ndarray:
        return self._objective(np.asarray(x, dtype=float))


def evaluate(landscape: Landscape, x) -> float:
    """Checked single-point evaluation."""
    p = as_point(x, landscape.dimension)
    return float(landscape(p))


# ------------------------------------------------------------ elliptic family


@dataclass(frozen=True)
class EllipticParams:
    """Coefficients ``c_i`` of the separable quadratic ``sum_i c_i * x_i**2``.

    Zero coefficients are only accepted with ``allow_zero=True`` (the
    degenerate landscape ``x1**2`` over R^2 is ``(1, 0)`` with the flag).
    """

    coefficients: tuple[float, ...]
    allow_zero: bool = False

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            raise ConfigError("elliptic landscape needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ConfigError("coefficients must be finite")
        if self.allow_zero:
            if any(c < 0 for c in coeffs):
                raise ConfigError(f"coefficients must be >= 0, got {coeffs}")
            if all(c == 0 for c in coeffs):
                raise ConfigError("at least one coefficient must be positive")
        elif any(c <= 0 for c in coeffs):
            raise ConfigError(f"coefficients must be > 0 (pass allow_zero=True for degenerate "
                              f"landscapes), got {coeffs}")

    @property
    def dimension(self) -> int:
        return len(self.coefficients)


def _fmt_coeff(c: float) -> str:
    return f"{c:g}"


def make_elliptic(params: EllipticParams | Sequence[float], allow_zero: bool = False) -> Landscape:
    """Landscape with objective ``sum_i c_i * x_i**2``."""
    if not isinstance(params, EllipticParams):
        params = EllipticParams(tuple(params), allow_zero=allow_zero)
    c = np.array(params.coefficients)

    def objective(x):
        return np.sum(c * x * x, axis=-1)

    label = "elliptic:" + ",".join(_fmt_coeff(v) for v in params.coefficients)
    land = Landscape(objective, params.dimension, label)
    land.params = params
    return land


def sphere(dimension: int = 2) -> Landscape:
    land = make_elliptic(EllipticParams((1.0,) * dimension))
    land.label = "sphere" if dimension == 2 else f"sphere:{dimension}"
    return land


def elliptic_valley(gamma: float = 0.01, dimension: int = 2) -> Landscape:
    """``sum_{i<d} x_i**2 + gamma * x_d**2``; the default is ``x1**2 + (0.1 x2)**2``."""
    if not 0 < gamma < 1:
        raise ConfigError("gamma must lie in (0, 1)")
    return make_elliptic(EllipticParams((1.0,) * (dimension - 1) + (gamma,)))


def degenerate_valley() -> Landscape:
    """``x1**2`` on R^2: every point of the x2 axis is a global minimizer."""
    land = make_elliptic(EllipticParams((1.0, 0.0), allow_zero=True))
    land.label = "fz"
    return land


def rosenbrock() -> Landscape:
    """``(1 - x1)**2 + 100 (x2 - x1**2)**2``, minimum 0 at (1, 1)."""

    def objective(x):
        x1, x2 = x[..., 0], x[..., 1]
        return (1.0 - x1) ** 2 + 100.0 * (x2 - x1 * x1) ** 2

    return Landscape(objective, 2, "rosenbrock")


@dataclass(frozen=True)
class ValleyAxis:
    index: int                # 0-based axis along which the valley runs
    direction: np.ndarray     # unit vector e_index
    line: str                 # human-readable description, 1-based names
    flat: bool                # True when the axis is a line of global minimizers


def valley_axis(params: EllipticParams | Sequence[float]) -> ValleyAxis:
    """Valley of an elliptic landscape: the axis of the smallest coefficient.

    The valley is the coordinate line ``{x : x_i = 0 for i != k}`` where
    ``k = argmin c_i``; along it the fitness grows most slowly.
    """
    if not isinstance(params, EllipticParams):
        params = EllipticParams(tuple(params), allow_zero=True)
    c = np.array(params.coefficients)
    k = int(np.argmin(c))
    if np.count_nonzero(c == c[k]) > 1:
        raise AmbiguousValleyError(f"smallest coefficient {c[k]:g} is shared by several axes")
    direction = np.zeros(c.size)
    direction[k] = 1.0
    others = [f"x{i + 1} = 0" for i in range(c.size) if i != k]
    return ValleyAxis(k, direction, ", ".join(others) or "R", bool(c[k] == 0.0))


# ------------------------------------------------------------ homeomorphisms


@dataclass(frozen=True)
class Homeomorphism:
    """A pair of mutually inverse maps on R^d (vectorized over leading axes)."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    dimension: int
    label: str

    def round_trip_error(self, points: np.ndarray) -> float:
        """Largest sup-norm round-trip error over ``points`` in both directions."""
        points = np.asarray(points, dtype=float)
        e1 = np.max(np.abs(self.inverse(self.forward(points)) - points))
        e2 = np.max(np.abs(self.forward(self.inverse(points)) - points))
        return float(max(e1, e2))


def identity_map(dimension: int = 2) -> Homeomorphism:
    return Homeomorphism(lambda x: np.array(x, dtype=float), lambda y: np.array(y, dtype=float),
                         dimension, "id")


def linear_map(scales: Sequence[float]) -> Homeomorphism:
    """Axis scaling ``y_i = a_i * x_i`` with all ``a_i != 0``."""
    a = np.asarray(scales, dtype=float)
    if np.any(a == 0) or not np.all(np.isfinite(a)):
        raise ConfigError("linear map scales must be finite and non-zero")
    label = "lin(" + ",".join(_fmt_coeff(v) for v in a) + ")"
    return Homeomorphism(lambda x: x * a, lambda y: y / a, a.size, label)


def rosenbrock_map() -> Homeomorphism:
    """``y1 = 1 - x1``, ``y2 = x2 + (1 - x1)**2``.

    Pulling ``x1**2 + 100 x2**2`` through this map yields Rosenbrock.
    """

    def forward(x):
        x = np.asarray(x, dtype=float)
        y = np.empty_like(x)
        y[..., 0] = 1.0 - x[..., 0]
        y[..., 1] = x[..., 1] + (1.0 - x[..., 0]) ** 2
        return y

    def inverse(y):
        y = np.asarray(y, dtype=float)
        x = np.empty_like(y)
        x[..., 0] = 1.0 - y[..., 0]
        x[..., 1] = y[..., 1] - y[..., 0] ** 2
        return x

    return Homeomorphism(forward, inverse, 2, "rosen")


class TransformedLandscape(Landscape):
    """``g(y) = f(h^{-1}(y))`` for a base landscape ``f`` and map ``h``."""

    def __init__(self, base: Landscape, h: Homeomorphism):
        self.base = base
        self.map = h
        super().__init__(lambda y: base(h.inverse(y)), base.dimension,
                         f"homeo:{h.label}({base.label})")


def _probe_points(dimension: int, count: int = 64) -> np.ndarray:
    from valleyscape.sampling import substream, uniform_in_box

    return uniform_in_box(substream(0, 0), Domain.cube(-10.0, 10.0, dimension), count)


def make_transformed(base: Landscape, h: Homeomorphism,
                     probe: np.ndarray | None = None) -> TransformedLandscape:
    """Build ``g = base o h^{-1}`` after checking ``h`` round-trips on probe points."""
    if base.dimension != h.dimension:
        raise DimensionError(f"landscape has d={base.dimension} but map has d={h.dimension}")
    probe = _probe_points(h.dimension) if probe is None else np.asarray(probe, dtype=float)
    with np.errstate(all="ignore"):
        err = h.round_trip_error(probe)
    if not err <= ROUND_TRIP_TOL:
        raise InvalidHomeomorphismError(f"{h.label}: round-trip error {err:.3g} > {ROUND_TRIP_TOL}")
    return TransformedLandscape(base, h)


@dataclass(frozen=True)
class OrderCheck:
    violations: int
    total: int


def _tol_sign(diff: np.ndarray, tol: float) -> np.ndarray:
    return np.where(np.abs(diff) <= tol, 0, np.sign(diff)).astype(int)


def check_order_preservation(base: Landscape, transformed: Landscape, domain: Domain,
                             pairs: int = 1000, seed: int = 0,
                             h: Homeomorphism | None = None,
                             tol: float = ORDER_TIE_TOL) -> OrderCheck:
    """Count random pairs whose fitness order differs between ``f`` and ``g o h``.

    A pair ``(x, x')`` drawn uniformly from ``domain`` is a violation when
    the tolerance-aware sign of ``f(x) - f(x')`` differs from that of
    ``g(h(x)) - g(h(x'))``. ``h`` defaults to the map carried by a
    :class:`TransformedLandscape`.
    """
    from valleyscape.sampling import substream, uniform_in_box

    if h is None:
        if not isinstance(transformed, TransformedLandscape):
            raise ConfigError("pass h explicitly for landscapes not built by make_transformed")
        h = transformed.map

    stream = substream(seed, 0)
    x = uniform_in_box(stream, domain, pairs)
    xp = uniform_in_box(stream, domain, pairs)
    s_base = _tol_sign(base(x) - base(xp), tol)
    s_trans = _tol_sign(transformed(h.forward(x)) - transformed(h.forward(xp)), tol)
    return OrderCheck(int(np.count_nonzero(s_base != s_trans)), pairs)


# ------------------------------------------------------------ ridge duality


def negate(landscape: Landscape) -> Landscape:
    """Landscape with objective ``-f``; ridges of ``f`` are valleys of the result."""
    return Landscape(lambda x: -landscape(x), landscape.dimension, "neg:" + landscape.label,
                     landscape.domain)


# ------------------------------------------------------------ gradient, grids


def gradient(landscape: Landscape, x, step: float = DEFAULT_GRADIENT_STEP) -> np.ndarray:
    """Central finite-difference gradient with absolute step ``step``."""
    if not step > 0:
        raise ConfigError(f"gradient step must be > 0, got {step}")
    p = as_point(x, landscape.dimension)
    dom = landscape.domain
    if dom is not None and (np.any(p - step < dom.lower) or np.any(p + step > dom.upper)):
        raise InputError("point must lie at least one step inside the domain")
    offsets = step * np.eye(p.size)
    plus = landscape(p + offsets)
    minus = landscape(p - offsets)
    return (plus - minus) / (2.0 * step)


@dataclass(frozen=True)
class Grid:
    """Row-major lattice: the last axis varies fastest."""

    axes: tuple[np.ndarray, ...]
    points: np.ndarray   # (K, d)
    values: np.ndarray   # (K,)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    def value_array(self) -> np.ndarray:
        """Fitness values reshaped to the lattice, ``[i, j]`` = (x1 index, x2 index)."""
        return self.values.reshape(self.shape)

    def to_csv(self) -> str:
        d = len(self.axes)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["f"])
        for p, v in zip(self.points, self.values):
            writer.writerow([f"{c:.17g}" for c in p] + [f"{v:.17g}"])
        return buf.getvalue()


def grid_evaluate(landscape: Landscape, domain: Domain,
                  resolution: int | Sequence[int]) -> Grid:
    """Evaluate on a lattice that includes both endpoints of every axis."""
    d = domain.dimension
    if d != landscape.dimension:
        raise DimensionError("domain dimension does not match landscape")
    res = [resolution] * d if np.isscalar(resolution) else list(resolution)
    if len(res) != d:
        raise DimensionError(f"need {d} resolutions, got {len(res)}")
    if any(int(r) < 2 for r in res):
        raise ConfigError("resolution must be >= 2 on every axis")
    axes = tuple(np.linspace(lo, hi, int(r)) for lo, hi, r in zip(domain.lower, domain.upper, res))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    return Grid(axes, points, np.asarray(landscape(points), dtype=float))


def read_grid_csv(text: str) -> Grid:
    """Inverse of :meth:`Grid.to_csv` for lattices written in row-major order."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    if not header or header[-1] != "f":
        raise InputError("grid CSV must have header x1,...,xd,f")
    data = np.array(body, dtype=float)
    d = len(header) - 1
    points, values = data[:, :d], data[:, d]
    axes = tuple(np.unique(points[:, i]) for i in range(d))
    if int(np.prod([a.size for a in axes])) != len(points):
        raise InputError("grid CSV is not a complete rectangular lattice")
    mesh = np.meshgrid(*axes, indexing="ij")
    expected = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    if not np.array_equal(expected, points):
        raise InputError("grid CSV rows are not in row-major lattice order")
    return Grid(axes, points, values)
