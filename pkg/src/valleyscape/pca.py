"""PCA projection: estimate a valley's direction and location from samples.

Pipeline: sample a population uniformly in a box, keep the ``M`` fittest
points, compute their mean and unbiased covariance, take the leading
eigenvector, then project the selected points onto the line
``m + t * v1`` and map them back into the search space.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from valleyscape.errors import ConfigError, InputError
from valleyscape.landscape import Domain, Landscape
from valleyscape.sampling import substream, uniform_in_box

SYMMETRY_TOL = 1e-12
UNIT_TOL = 1e-12
ISOTROPY_TOL = 1e-9


@dataclass(frozen=True)
class SelectedSet:
    points: np.ndarray    # (M, d)
    fitness: np.ndarray   # (M,)
    indices: np.ndarray   # positions in the source population


def select_best(population: np.ndarray, landscape: Landscape, m: int,
                fitness: np.ndarray | None = None) -> SelectedSet:
    """Truncation selection of the ``m`` lowest-fitness points.

    Ties are broken by population index (earlier wins).
    """
    population = np.asarray(population, dtype=float)
    if not 1 <= m <= len(population):
        raise ConfigError(f"need 1 <= M <= population size ({len(population)}), got {m}")
    if fitness is None:
        fitness = np.asarray(landscape(population), dtype=float)
    order = np.argsort(fitness, kind="stable")[:m]
    return SelectedSet(population[order], fitness[order], order)


@dataclass(frozen=True)
class CovarianceModel:
    mean: np.ndarray
    cov: np.ndarray


def mean_and_covariance(points) -> CovarianceModel:
    """Sample mean and unbiased ``1/(M-1)`` covariance of the rows of ``points``."""
    if isinstance(points, SelectedSet):
        points = points.points
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or len(x) < 2:
        raise ConfigError("covariance needs at least two points")
    mean = x.mean(axis=0)
    dev = x - mean
    cov = np.einsum("ki,kj->ij", dev, dev) / (len(x) - 1)
    return CovarianceModel(mean, 0.5 * (cov + cov.T))


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray    # descending
    vectors: np.ndarray   # columns, unit length


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    # first component whose magnitude ties the maximum (to rounding) is made positive
    mag = np.abs(v)
    k = int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])
    return -v if v[k] < 0 else v


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 64):
    """Cyclic Jacobi eigenvalue iteration for a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` unsorted, eigenvectors as columns.
    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||A||_F``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) * 1e-18 > abs(apq):
                    t = apq / diff  # theta too large to square
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def eigendecompose_symmetric(sigma) -> EigenDecomposition:
    """Full eigen-decomposition sorted by descending eigenvalue.

    Each eigenvector is sign-normalized so that its largest-magnitude
    component is positive.
    """
    s = np.asarray(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InputError(f"expected a square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InputError("matrix has non-finite entries")
    if np.max(np.abs(s - s.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(s))):
        raise InputError("matrix is not symmetric")
    values, vectors = jacobi_eigh(0.5 * (s + s.T))
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = np.column_stack([_sign_normalize(vectors[:, k]) for k in order])
    return EigenDecomposition(values, vectors)


def project_reconstruct(points, mean, v1) -> tuple[np.ndarray, np.ndarray]:
    """Scalar projections ``y_i = v1 . (x_i - m)`` and points ``m + v1 * y_i``."""
    v1 = np.asarray(v1, dtype=float)
    if abs(np.linalg.norm(v1) - 1.0) > UNIT_TOL:
        raise InputError("projection direction must have unit length")
    mean = np.asarray(mean, dtype=float)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = (x - mean) @ v1
    return y, mean + np.outer(y, v1)


def eigen_ratio(values) -> float:
    """``lambda_1 / lambda_2``; ``inf`` when ``lambda_2`` is (numerically) zero."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ConfigError("eigenvalue ratio needs d >= 2")
    l1, l2 = values[0], values[1]
    if l2 <= 1e-12 * max(abs(l1), 1e-300):
        return math.inf
    return float(l1 / l2)


@dataclass(frozen=True)
class ValleyEstimate:
    """Everything produced by one PCA-projection run."""

    population: np.ndarray
    population_fitness: np.ndarray
    selected: SelectedSet
    model: CovarianceModel
    eigen: EigenDecomposition
    projections: np.ndarray
    reconstructed: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.model.mean

    @property
    def direction(self) -> np.ndarray:
        return self.eigen.vectors[:, 0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigen.values

    @property
    def isotropic(self) -> bool:
        """True when the two leading eigenvalues coincide (no preferred direction)."""
        v = self.eigen.values
        return v.size >= 2 and abs(v[0] - v[1]) <= ISOTROPY_TOL * max(1.0, abs(v[0]))


def eigen_ratio_diagnostic(estimate: ValleyEstimate) -> float:
    """Valleyness score ``lambda_1 / lambda_2`` of the selected set."""
    return eigen_ratio(estimate.eigen.values)


def pca_projection(landscape: Landscape, domain: Domain, n: int = 100, m: int = 10,
                   seed: int = 0, stream_id: int = 0) -> ValleyEstimate:
    """Run the whole PCA-projection pipeline from stream ``(seed, stream_id)``."""
    if domain.dimension != landscape.dimension:
        raise ConfigError("domain dimension does not match landscape")
    if not 2 <= m <= n:
        raise ConfigError(f"need 2 <= M <= N, got M={m}, N={n}")
    population = uniform_in_box(substream(seed, stream_id), domain, n)
    fitness = np.asarray(landscape(population), dtype=float)
    selected = select_best(population, landscape, m, fitness=fitness)
    model = mean_and_covariance(selected.points)
    eigen = eigendecompose_symmetric(model.cov)
    y, recon = project_reconstruct(selected.points, model.mean, eigen.vectors[:, 0])
    return ValleyEstimate(population, fitness, selected, model, eigen, y, recon)


def angle_to_axis(direction, axis: int) -> float:
    """Angle in degrees between the line of ``direction`` and coordinate axis ``axis``."""
    v = np.asarray(direction, dtype=float)
    cos = min(1.0, abs(v[axis]) / np.linalg.norm(v))
    return math.degrees(math.acos(cos))


# ------------------------------------------------------------------ output


def _num(v: float) -> str:
    return f"{v:.17g}"


def pca_csv(estimate: ValleyEstimate, landscape: Landscape) -> str:
    """CSV ``role,x1,...,xd,f,y`` with population, selected and projected rows.

    ``y`` is empty for population rows.
    """
    d = estimate.population.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["role"] + [f"x{i + 1}" for i in range(d)] + ["f", "y"])
    for p, f in zip(estimate.population, estimate.population_fitness):
        w.writerow(["population"] + [_num(c) for c in p] + [_num(f), ""])
    for p, f, y in zip(estimate.selected.points, estimate.selected.fitness, estimate.projections):
        w.writerow(["selected"] + [_num(c) for c in p] + [_num(f), _num(y)])
    recon_f = np.asarray(landscape(estimate.reconstructed), dtype=float)
    for p, f, y in zip(estimate.reconstructed, recon_f, estimate.projections):
        w.writerow(["projected"] + [_num(c) for c in p] + [_num(f), _num(y)])
    return buf.getvalue()


def read_pca_csv(text: str) -> dict[str, np.ndarray]:
    """Parse :func:`pca_csv` output into ``{role: (k, d) coordinates}``."""
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    if not header or header[0] != "role" or header[-2:] != ["f", "y"]:
        raise InputError("PCA CSV must have header role,x1,...,xd,f,y")
    d = len(header) - 3
    out: dict[str, list] = {}
    for r in rows[1:]:
        if r:
            out.setdefault(r[0], []).append([float(v) for v in r[1:1 + d]])
    return {k: np.array(v) for k, v in out.items()}


def pca_summary(estimate: ValleyEstimate) -> str:
    """Plain-text summary block: mean, v1, eigenvalues, ratio and flags."""
    def vec(a):
        return "[" + ", ".join(f"{v:.12g}" for v in a) + "]"

    ratio = eigen_ratio(estimate.eigen.values) if estimate.eigen.values.size >= 2 else math.nan
    flags = []
    if estimate.isotropic:
        flags.append("ISOTROPIC")
    if math.isinf(ratio):
        flags.append("INFINITE_RATIO")
    return (
        f"mean: {vec(estimate.mean)}\n"
        f"v1: {vec(estimate.direction)}\n"
        f"eigenvalues: {vec(estimate.eigen.values)}\n"
        f"lambda1/lambda2: {ratio:.12g}\n"
        f"flags: {','.join(flags) or 'none'}\n"
    )
