"""Deterministic, splittable random streams and the experiment RunConfig.

Every stream is a SplitMix64 generator whose starting state is a pure
function of ``(seed, stream_id)``::

    GAMMA = 0x9E3779B97F4A7C15
    mix64(z):                                  # SplitMix64 finalizer
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)
    state0 = mix64(seed ^ mix64((stream_id + 1) * GAMMA))
    draw k (k = 1, 2, ...) = mix64(state0 + k * GAMMA)
    uniform float = (draw >> 11) * 2**-53      # 53-bit mantissa, in [0, 1)

All arithmetic is modulo 2**64. Because draw ``k`` depends only on
``state0`` and ``k``, the generator is counter based: any chunk of a
stream can be regenerated without replaying the ones before it.
"""

from __future__ import annotations

import copy
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from valleyscape.errors import ConfigError
from valleyscape.landscape import Domain

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_TWO_M53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (reference implementation)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


class RngStream:
    """A SplitMix64 stream identified by ``(seed, stream_id)``.

    The stream keeps a draw counter and advances it on every call. Use
    :meth:`clone` to fork an independent copy at the current position.
    """

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0):
        if not (0 <= seed <= MASK64 and 0 <= stream_id <= MASK64):
            raise ConfigError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)
        self._state0 = mix64(self.seed ^ mix64(((self.stream_id + 1) * GAMMA) & MASK64))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def clone(self) -> RngStream:
        return copy.copy(self)

    def next_uint64(self, count: int) -> np.ndarray:
        """Return the next ``count`` raw 64-bit draws as a uint64 array."""
        if count < 0:
            raise ConfigError(f"count must be >= 0, got {count}")
        k = np.arange(self.counter + 1, self.counter + 1 + count, dtype=np.uint64)
        z = np.uint64(self._state0) + k * np.uint64(GAMMA)
        self.counter += count
        return _mix64_array(z)

    def random(self, size: int | tuple[int, ...] = 1) -> np.ndarray:
        """Uniform floats in [0, 1), filled in C order from consecutive draws."""
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        raw = self.next_uint64(count)
        return ((raw >> np.uint64(11)).astype(np.float64) * _TWO_M53).reshape(shape)


def substream(seed: int, stream_id: int) -> RngStream:
    """Fresh stream whose whole sequence depends only on ``(seed, stream_id)``."""
    return RngStream(seed, stream_id)


def uniform_in_box(stream: RngStream, domain: Domain, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. uniform points in ``domain``.

    Consumes exactly ``count * d`` draws; point ``i`` coordinate ``j`` uses
    draw ``i * d + j``. Returns an array of shape ``(count, d)``.
    """
    if count < 0:
        raise ConfigError(f"count must be >= 0, got {count}")
    lower, upper = domain.lower, domain.upper
    if not np.all(lower < upper):
        raise ConfigError("degenerate domain: every lower bound must be < upper bound")
    u = stream.random((count, domain.dimension))
    return lower + (upper - lower) * u


def job_stream_id(*indices: int) -> int:
    """Pack small job indices (point index, delta index, ...) into one stream id."""
    sid = 0
    for i in indices:
        if not 0 <= i < (1 << 16):
            raise ConfigError(f"job index {i} out of range")
        sid = (sid << 16) | i
    return sid


# ---------------------------------------------------------------- RunConfig


def _fmt_float(v: float) -> str:
    return repr(float(v))


def format_domain(domain: Domain) -> str:
    return ",".join(f"{_fmt_float(lo)}:{_fmt_float(hi)}" for lo, hi in zip(domain.lower, domain.upper))


def parse_domain(text: str) -> Domain:
    """Parse ``lo:hi[,lo:hi...]`` into a :class:`Domain`."""
    lower, upper = [], []
    for part in text.split(","):
        try:
            lo, hi = part.split(":")
            lower.append(float(lo))
            upper.append(float(hi))
        except ValueError:
            raise ConfigError(f"bad domain axis {part!r}; expected lo:hi") from None
    return Domain(lower, upper)


@dataclass
class RunConfig:
    """Everything needed to reproduce an experiment bit for bit."""

    seed: int = 0
    n_population: int = 100
    n_select: int = 10
    domain: Domain = field(default_factory=lambda: Domain([-10.0, -10.0], [10.0, 10.0]))
    deltas: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0, 10.0)
    samples: int = 100_000
    function: str = "elliptic:1,0.01"

    # key names in the text format
    _KEYS = {
        "seed": "seed",
        "n_population": "n",
        "n_select": "m",
        "domain": "domain",
        "deltas": "deltas",
        "samples": "samples",
        "function": "function",
    }

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 1 <= self.n_select <= self.n_population:
            raise ConfigError(f"need 1 <= m <= n, got m={self.n_select}, n={self.n_population}")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if any(d <= 0 for d in self.deltas):
            raise ConfigError("delta values must be > 0")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def to_text(self) -> str:
        values = {
            "seed": str(self.seed),
            "n": str(self.n_population),
            "m": str(self.n_select),
            "domain": format_domain(self.domain),
            "deltas": ",".join(_fmt_float(d) for d in self.deltas),
            "samples": str(self.samples),
            "function": self.function,
        }
        return "".join(f"{k}={v}\n" for k, v in values.items())

    def digest(self) -> str:
        """SHA-256 of the canonical text form."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    @classmethod
    def from_mapping(cls, items: dict[str, str], base: RunConfig | None = None) -> RunConfig:
        """Build a config from text-format keys, starting from ``base`` (or defaults)."""
        base = base or cls()
        kwargs = {f.name: getattr(base, f.name) for f in fields(cls)}
        by_key = {v: k for k, v in cls._KEYS.items()}
        for key, raw in items.items():
            if key not in by_key:
                raise ConfigError(f"unknown config key {key!r}")
            name = by_key[key]
            try:
                if name in ("seed", "n_population", "n_select", "samples"):
                    kwargs[name] = int(raw)
                elif name == "domain":
                    kwargs[name] = parse_domain(raw)
                elif name == "deltas":
                    kwargs[name] = tuple(float(v) for v in raw.split(","))
                else:
                    kwargs[name] = raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text: str, base: RunConfig | None = None) -> RunConfig:
        items = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            items[key.strip()] = value.strip()
        return cls.from_mapping(items, base)

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        return cls.from_text(Path(path).read_text())
