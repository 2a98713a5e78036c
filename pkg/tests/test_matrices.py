import numpy as np
import pytest
import scipy.sparse
from hypothesis import given, settings
from hypothesis import strategies as st

from traceinv import (
    DimensionMismatch,
    InvalidShape,
    NotPositiveDefinite,
    SpdMatrix,
    build_design_matrix,
    build_exponential_kernel,
    build_kernel,
    cholesky,
    grid_points,
    random_points,
    solve_lower_triangular,
)
from traceinv.matrices import apply_householder

from conftest import spd_from_eigenvalues


class TestSpdMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidShape):
            SpdMatrix.from_dense([[1.0, 0.5], [0.2, 1.0]])

    def test_rejects_rectangular(self):
        with pytest.raises(InvalidShape):
            SpdMatrix.from_dense(np.ones((2, 3)))

    def test_identity_has_no_entries(self):
        I = SpdMatrix.identity(4)
        assert I.data is None
        assert I.trace() == 4.0
        np.testing.assert_array_equal(I.to_dense(), np.eye(4))

    def test_sparse_round_trip(self):
        dense = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 1.0]])
        A = SpdMatrix.from_sparse(scipy.sparse.csr_matrix(dense))
        np.testing.assert_array_equal(A.to_dense(), dense)
        assert A.kind == "sparse"


class TestCholesky:
    def test_identity(self):
        L = cholesky(SpdMatrix.identity(3))
        np.testing.assert_array_equal(L.to_dense(), np.eye(3))

    def test_2x2_closed_form(self):
        L = cholesky(SpdMatrix.from_dense([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(L.to_dense(), [[2.0, 0.0], [1.0, np.sqrt(2.0)]],
                                   rtol=0, atol=1e-15)

    def test_random_spd_via_eigen_oracle(self, rng):
        # known-spectrum construction is the independent oracle
        A, _ = spd_from_eigenvalues(rng, rng.uniform(0.5, 4.0, 50))
        L = cholesky(A).to_dense()
        rel = np.linalg.norm(L @ L.T - A.to_dense()) / np.linalg.norm(A.to_dense())
        assert rel <= 1e-10

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(SpdMatrix.from_dense([[1.0, 2.0], [2.0, 1.0]]))

    def test_tiny_pivot_raises(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(SpdMatrix.from_dense(np.diag([1.0, 1e-16])))

    def test_sparse_factor_keeps_class(self):
        dense = np.diag([2.0, 3.0, 5.0])
        factor = cholesky(SpdMatrix.from_sparse(scipy.sparse.csr_matrix(dense)))
        assert factor.kind == "sparse"
        np.testing.assert_allclose(factor.to_dense() @ factor.to_dense().T, dense)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 10_000))
    def test_factor_reproduces_source(self, n, seed):
        rng = np.random.default_rng(seed)
        A, _ = spd_from_eigenvalues(rng, 10.0 ** rng.uniform(-2, 2, n))
        L = cholesky(A).to_dense()
        rel = np.linalg.norm(L @ L.T - A.to_dense()) / np.linalg.norm(A.to_dense())
        assert rel <= 1e-10


class TestSolveLowerTriangular:
    def test_identity(self):
        L = cholesky(SpdMatrix.identity(3))
        e2 = np.array([0.0, 1.0, 0.0])
        np.testing.assert_array_equal(solve_lower_triangular(L, e2), e2)

    def test_forward_substitution_by_hand(self):
        L = cholesky(SpdMatrix.from_dense([[4.0, 2.0], [2.0, 3.0]]))
        x = solve_lower_triangular(L, np.array([2.0, 1.0 + np.sqrt(2.0)]))
        np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-14)

    def test_round_trip(self, rng):
        n = 20
        A, _ = spd_from_eigenvalues(rng, rng.uniform(1.0, 5.0, n))
        L = cholesky(A)
        y = rng.standard_normal(n)
        b = L.to_dense() @ y
        x = solve_lower_triangular(L, b)
        assert np.linalg.norm(L.to_dense() @ x - b) / np.linalg.norm(b) <= 1e-12
        np.testing.assert_allclose(x, y, rtol=1e-10)

    def test_dimension_mismatch(self):
        L = cholesky(SpdMatrix.identity(3))
        with pytest.raises(DimensionMismatch):
            solve_lower_triangular(L, np.ones(4))


class TestPointClouds:
    def test_single_cell_center(self):
        pts = grid_points(1)
        np.testing.assert_array_equal(pts.coords, [[0.5, 0.5]])

    def test_two_by_two(self):
        pts = grid_points(2)
        expected = {(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)}
        assert {tuple(row) for row in pts.coords} == expected

    def test_grid_min_distance_brute_force(self):
        pts = grid_points(50)
        assert pts.n == 2500
        coords = pts.coords
        # brute-force pairwise check on a thinned subset plus exact rows
        import scipy.spatial.distance as dist

        d = dist.pdist(coords)
        assert abs(d.min() - 0.02) <= 1e-12

    def test_random_points_in_unit_square(self):
        pts = random_points(100, seed=3)
        assert pts.n == 100
        assert pts.coords.min() >= 0.0 and pts.coords.max() <= 1.0


class TestKernels:
    def test_single_point(self):
        K = build_exponential_kernel(grid_points(1), rho=0.3)
        np.testing.assert_array_equal(K.to_dense(), [[1.0]])

    def test_two_points_at_distance_rho(self):
        from traceinv.matrices import PointCloud

        pts = PointCloud(coords=np.array([[0.0, 0.0], [0.1, 0.0]]))
        K = build_exponential_kernel(pts, rho=0.1)
        assert K.to_dense()[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-15)

    def test_three_collinear(self):
        from traceinv.matrices import PointCloud

        pts = PointCloud(coords=np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]]))
        K = build_exponential_kernel(pts, rho=0.1).to_dense()
        assert K[0, 2] == pytest.approx(np.exp(-2.0), rel=1e-14)
        assert K[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-14)
        assert K[1, 2] == pytest.approx(np.exp(-1.0), rel=1e-14)

    def test_unit_diagonal_and_entry_range(self):
        K = build_exponential_kernel(grid_points(7), rho=0.2).to_dense()
        np.testing.assert_array_equal(np.diag(K), np.ones(49))
        assert K.min() > 0.0 and K.max() <= 1.0

    def test_custom_kernel_handle(self):
        K = build_kernel(grid_points(3), lambda d: np.exp(-(d**2)))
        assert K.n == 9
        np.testing.assert_array_equal(np.diag(K.to_dense()), np.ones(9))


class TestDesignMatrix:
    def test_first_singular_value_is_one(self):
        # profile at i = 1 is exp(0) regardless of m
        for m in (5, 50):
            d = build_design_matrix(2 * m, m, np.ones(2 * m), np.ones(m))
            assert d.singular_values()[0] == 1.0

    def test_smallest_retained_value(self):
        d = build_design_matrix(1000, 500, np.ones(1000), np.ones(500))
        assert d.singular_values()[-1] == pytest.approx(np.exp(-40.0 * (499 / 500) ** 0.75),
                                                        rel=1e-15)

    def test_householder_orthogonal(self, rng):
        u = rng.standard_normal(20)
        V = np.eye(20) - 2.0 * np.outer(u, u) / np.dot(u, u)
        assert np.max(np.abs(V.T @ V - np.eye(20))) <= 1e-12

    def test_householder_involutive(self, rng):
        u = rng.standard_normal(15)
        x = rng.standard_normal((15, 3))
        twice = apply_householder(u, apply_householder(u, x))
        assert np.max(np.abs(twice - x)) <= 1e-12

    def test_singular_values_match_profile_via_svd(self, rng):
        # gentle decay keeps the whole profile above dense-SVD resolution
        n, m = 80, 40
        d = build_design_matrix(n, m, rng.standard_normal(n), rng.standard_normal(m),
                                decay_coeff=8.0)
        sv = np.sort(np.linalg.svd(d.matrix, compute_uv=False))[::-1]
        np.testing.assert_allclose(sv, d.singular_values(), rtol=1e-10)

    def test_rejects_wide(self):
        with pytest.raises(InvalidShape):
            build_design_matrix(3, 5, np.ones(3), np.ones(5))

    def test_rejects_zero_vectors(self):
        with pytest.raises(InvalidShape):
            build_design_matrix(6, 3, np.zeros(6), np.ones(3))
