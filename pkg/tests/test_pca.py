import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valleyscape import (
    ConfigError,
    Domain,
    InputError,
    eigen_ratio_diagnostic,
    eigendecompose_symmetric,
    mean_and_covariance,
    pca_projection,
    project_reconstruct,
    rosenbrock,
    select_best,
)
from valleyscape.pca import angle_to_axis, eigen_ratio, jacobi_eigh, pca_csv, pca_summary, read_pca_csv

SQ2 = math.sqrt(0.5)


def random_symmetric(rng, d):
    a = rng.normal(size=(d, d))
    return a + a.T


class TestSelectBest:
    def test_no_truncation(self, fs):
        pop = np.array([[3.0, 0], [1, 0], [2, 0]])
        sel = select_best(pop, fs, 3)
        assert sel.points.tolist() == [[1, 0], [2, 0], [3, 0]]

    def test_order(self, fs):
        pop = np.array([[0.0, 0], [1, 0], [2, 0]])
        sel = select_best(pop, fs, 2)
        assert sel.points.tolist() == [[0, 0], [1, 0]] and sel.fitness.tolist() == [0, 1]

    def test_ties_by_index(self, fs):
        pop = np.array([[1.0, 0], [0, 1], [-1, 0], [0, 0.5]])
        sel = select_best(pop, fs, 2)
        assert sel.indices.tolist() == [3, 0]

    def test_selected_dominate(self, fe, square10, rng):
        pop = rng.uniform(-10, 10, size=(100, 2))
        sel = select_best(pop, fe, 10)
        rest = np.delete(fe(pop), sel.indices)
        assert sel.fitness.max() <= rest.min()

    @pytest.mark.parametrize("m", [0, 4])
    def test_out_of_range(self, fs, m):
        with pytest.raises(ConfigError):
            select_best(np.zeros((3, 2)), fs, m)


class TestCovariance:
    def test_two_points(self):
        cm = mean_and_covariance([[1, 0], [-1, 0]])
        assert cm.mean.tolist() == [0, 0] and cm.cov.tolist() == [[2, 0], [0, 0]]

    def test_identical_points(self):
        cm = mean_and_covariance(np.ones((5, 3)) * 2.5)
        assert np.all(cm.cov == 0)

    def test_diagonal_pair(self):
        assert mean_and_covariance([[1, 1], [-1, -1]]).cov.tolist() == [[2, 2], [2, 2]]

    def test_matches_numpy(self, rng):
        x = rng.normal(size=(12, 4))
        cm = mean_and_covariance(x)
        np.testing.assert_allclose(cm.cov, np.cov(x, rowvar=False), rtol=1e-12, atol=1e-14)
        assert np.array_equal(cm.cov, cm.cov.T)

    def test_needs_two(self):
        with pytest.raises(ConfigError):
            mean_and_covariance([[1, 2]])


class TestEigen:
    def test_diagonal(self):
        e = eigendecompose_symmetric(np.diag([2.0, 0.5]))
        assert e.values.tolist() == [2, 0.5]
        assert np.array_equal(e.vectors, np.eye(2))

    def test_two_by_two(self):
        e = eigendecompose_symmetric([[2, 1], [1, 2]])
        np.testing.assert_allclose(e.values, [3, 1], atol=1e-14)
        np.testing.assert_allclose(e.vectors[:, 0], [SQ2, SQ2], atol=1e-14)
        np.testing.assert_allclose(e.vectors[:, 1], [SQ2, -SQ2], atol=1e-14)

    def test_rank_one(self):
        e = eigendecompose_symmetric([[2, 2], [2, 2]])
        np.testing.assert_allclose(e.values, [4, 0], atol=1e-14)
        np.testing.assert_allclose(e.vectors[:, 0], [SQ2, SQ2], atol=1e-14)

    def test_asymmetric(self):
        with pytest.raises(InputError):
            eigendecompose_symmetric([[1, 2], [0, 1]])

    def test_not_square(self):
        with pytest.raises(InputError):
            eigendecompose_symmetric(np.zeros((2, 3)))

    def test_zero_matrix(self):
        e = eigendecompose_symmetric(np.zeros((3, 3)))
        assert np.all(e.values == 0) and np.array_equal(e.vectors, np.eye(3))

    def test_sign_convention(self, rng):
        e = eigendecompose_symmetric(random_symmetric(rng, 5))
        for v in e.vectors.T:
            assert v[np.argmax(np.abs(v))] > 0

    @pytest.mark.parametrize("d", [1, 2, 3, 5, 10])
    def test_against_lapack(self, rng, d):
        """Jacobi spectrum equals numpy's LAPACK route on random matrices."""
        s = random_symmetric(rng, d)
        e = eigendecompose_symmetric(s)
        np.testing.assert_allclose(e.values, np.sort(np.linalg.eigvalsh(s))[::-1],
                                   rtol=1e-12, atol=1e-12)

    def test_invariants_100_trials(self, rng):
        for trial in range(100):
            d = int(rng.integers(1, 11))
            s = random_symmetric(rng, d) * 10.0 ** rng.integers(-3, 4)
            e = eigendecompose_symmetric(s)
            lam, v = e.values, e.vectors
            assert np.all(np.diff(lam) <= 0)
            for i in range(d):
                assert np.max(np.abs(s @ v[:, i] - lam[i] * v[:, i])) <= 1e-9 * (1 + abs(lam[i]))
                assert abs(np.linalg.norm(v[:, i]) - 1) <= 1e-12
            off = v.T @ v - np.eye(d)
            assert np.max(np.abs(off)) <= 1e-9

    def test_jacobi_unsorted_output(self):
        vals, vecs = jacobi_eigh(np.array([[1.0, 0], [0, 3]]))
        assert vals.tolist() == [1, 3]


class TestProjection:
    def test_center(self):
        y, xr = project_reconstruct([[1.0, 2.0]], [1, 2], [0, 1])
        assert y.tolist() == [0] and xr.tolist() == [[1, 2]]

    def test_on_line(self):
        m, v = np.array([0.5, -1.0]), np.array([0.6, 0.8])
        x = m + np.outer([-3, 0.1, 7], v)
        _, xr = project_reconstruct(x, m, v)
        np.testing.assert_allclose(xr, x, atol=1e-12)

    def test_substitution(self):
        y, xr = project_reconstruct([[3.0, 4.0]], [0, 0], [0, 1])
        assert y.tolist() == [4] and xr.tolist() == [[0, 4]]

    def test_non_unit(self):
        with pytest.raises(InputError):
            project_reconstruct([[1.0, 1.0]], [0, 0], [1, 1])

    def test_idempotent(self, rng):
        x = rng.normal(size=(20, 3))
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        m = x.mean(axis=0)
        y, xr = project_reconstruct(x, m, v)
        y2, xr2 = project_reconstruct(xr, m, v)
        assert np.max(np.abs(y2 - y)) <= 1e-12
        np.testing.assert_allclose(xr2, xr, atol=1e-12)


class TestEigenRatio:
    def test_collinear_is_infinite(self):
        cm = mean_and_covariance([[1, 0], [-1, 0], [2, 0], [-2, 0]])
        assert eigen_ratio(eigendecompose_symmetric(cm.cov).values) == math.inf

    def test_isotropic(self):
        assert eigen_ratio(eigendecompose_symmetric(np.eye(2)).values) == 1

    def test_needs_two_dims(self):
        with pytest.raises(ConfigError):
            eigen_ratio([1.0])


class TestPcaProjection:
    def test_shapes(self, fe, square10):
        est = pca_projection(fe, square10, 100, 10, seed=1)
        assert est.population.shape == (100, 2)
        assert est.selected.points.shape == est.reconstructed.shape == (10, 2)
        assert est.projections.shape == (10,)

    def test_deterministic(self, fe, square10):
        a = pca_projection(fe, square10, 100, 10, seed=3)
        b = pca_projection(fe, square10, 100, 10, seed=3)
        assert pca_csv(a, fe) == pca_csv(b, fe) and pca_summary(a) == pca_summary(b)

    def test_reconstruction_on_line(self, fe, square10):
        est = pca_projection(fe, square10, 100, 10, seed=4)
        d = est.reconstructed - est.mean
        cross = d[:, 0] * est.direction[1] - d[:, 1] * est.direction[0]
        assert np.max(np.abs(cross)) <= 1e-12

    def test_elliptic_direction(self, fe, square10):
        angles = [angle_to_axis(pca_projection(fe, square10, 100, 10, seed=s).direction, 1)
                  for s in range(20)]
        assert np.median(angles) <= 15

    def test_sphere_runs(self, fs, square10):
        est = pca_projection(fs, square10, 100, 10, seed=0)
        assert est.direction.shape == (2,)

    def test_rosenbrock_reconstruction_in_basin(self):
        f = rosenbrock()
        est = pca_projection(f, Domain([-1, -1], [2, 2]), 100, 10, seed=0)
        assert np.median(f(est.reconstructed)) < np.median(est.population_fitness)

    def test_diagnostic_contrast(self, fe, fs, square10):
        re = [eigen_ratio_diagnostic(pca_projection(fe, square10, seed=s)) for s in range(20)]
        rs = [eigen_ratio_diagnostic(pca_projection(fs, square10, seed=s)) for s in range(20)]
        assert np.median(re) > np.median(rs)

    def test_bad_sizes(self, fe, square10):
        with pytest.raises(ConfigError):
            pca_projection(fe, square10, 10, 1)
        with pytest.raises(ConfigError):
            pca_projection(fe, square10, 10, 11)

    def test_isotropy_flag(self):
        from valleyscape.pca import CovarianceModel, EigenDecomposition, ValleyEstimate

        eig = EigenDecomposition(np.array([1.0, 1.0]), np.eye(2))
        est = ValleyEstimate(np.zeros((2, 2)), np.zeros(2), None, CovarianceModel(np.zeros(2), np.eye(2)),
                             eig, np.zeros(2), np.zeros((2, 2)))
        assert est.isotropic and "ISOTROPIC" in pca_summary(est)

    def test_csv(self, fe, square10):
        est = pca_projection(fe, square10, 100, 10, seed=7)
        text = pca_csv(est, fe)
        lines = text.splitlines()
        assert lines[0] == "role,x1,x2,f,y"
        roles = read_pca_csv(text)
        assert {k: len(v) for k, v in roles.items()} == {"population": 100, "selected": 10,
                                                         "projected": 10}
        np.testing.assert_array_equal(roles["projected"], est.reconstructed)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(2, 6))
def test_variance_optimality(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(15, d)) * rng.uniform(0.1, 5, size=d)
    cm = mean_and_covariance(x)
    v1 = eigendecompose_symmetric(cm.cov).vectors[:, 0]
    best = np.var((x - cm.mean) @ v1, ddof=1)
    dirs = rng.normal(size=(100, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    assert np.all(np.var((x - cm.mean) @ dirs.T, axis=0, ddof=1) <= best * (1 + 1e-12))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(2, 6))
def test_rotation_equivariance(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(15, d)) * np.linspace(3, 0.5, d)
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    v = eigendecompose_symmetric(mean_and_covariance(x).cov)
    w = eigendecompose_symmetric(mean_and_covariance(x @ q.T).cov)
    if v.values[0] - v.values[1] < 1e-6 * v.values[0]:
        return  # leading direction not identifiable
    cos = abs(float((q @ v.vectors[:, 0]) @ w.vectors[:, 0]))
    assert math.acos(min(1.0, cos)) <= 1e-6
