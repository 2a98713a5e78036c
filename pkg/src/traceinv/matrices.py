"""Construction and factorization of symmetric positive-definite operands.

Everything downstream (trace estimators, interpolants, the experiment
drivers) consumes the types defined here: ``SpdMatrix`` for the operands
A and B, ``CholeskyFactor`` for triangular solves, ``PointCloud`` for the
spatial kernel study and ``DesignMatrix`` for the ridge-regression study.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.spatial.distance

from .exceptions import DimensionMismatch, InvalidShape, NotPositiveDefinite

SYMMETRY_RTOL = 1e-12

# Pivots below this fraction of the largest diagonal entry are treated as
# numerically indefinite rather than as a valid factorization.
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive-definite operand.

    Storage is dense, sparse symmetric, or an implicit identity (no stored
    entries). Positive definiteness is not checked at construction; it
    surfaces as :class:`NotPositiveDefinite` at factorization time.
    """

    n: int
    kind: str  # "dense" | "sparse" | "identity"
    data: object = field(repr=False, default=None)

    @classmethod
    def from_dense(cls, array, rtol=SYMMETRY_RTOL):
        array = np.asarray(array, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise InvalidShape(f"expected a square matrix, got shape {array.shape}")
        scale = np.max(np.abs(array)) or 1.0
        if np.max(np.abs(array - array.T)) > rtol * scale:
            raise InvalidShape("matrix is not symmetric within tolerance")
        return cls(n=array.shape[0], kind="dense", data=array)

    @classmethod
    def from_sparse(cls, matrix, rtol=SYMMETRY_RTOL):
        matrix = scipy.sparse.csr_matrix(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise InvalidShape(f"expected a square matrix, got shape {matrix.shape}")
        asym = abs(matrix - matrix.T)
        scale = np.max(np.abs(matrix.data)) if matrix.nnz else 1.0
        if asym.nnz and asym.max() > rtol * scale:
            raise InvalidShape("matrix is not symmetric within tolerance")
        return cls(n=matrix.shape[0], kind="sparse", data=matrix)

    @classmethod
    def identity(cls, n):
        return cls(n=int(n), kind="identity", data=None)

    @property
    def is_identity(self):
        return self.kind == "identity"

    def to_dense(self):
        if self.kind == "dense":
            return self.data
        if self.kind == "sparse":
            return self.data.toarray()
        return np.eye(self.n)

    def diagonal(self):
        if self.kind == "identity":
            return np.ones(self.n)
        return np.asarray(self.data.diagonal()) if self.kind == "sparse" else np.diag(self.data)

    def trace(self):
        return float(self.diagonal().sum())

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise DimensionMismatch(f"vector length {v.shape[0]} != order {self.n}")
        if self.kind == "identity":
            return v.copy()
        return self.data @ v

    def entry_norm(self):
        """Cheap magnitude estimate: largest entry in absolute value."""
        if self.kind == "identity":
            return 1.0
        if self.kind == "sparse":
            return float(np.max(np.abs(self.data.data))) if self.data.nnz else 0.0
        return float(np.max(np.abs(self.data)))


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source matrix."""

    L: object = field(repr=False)
    kind: str = "dense"

    @property
    def n(self):
        return self.L.shape[0]

    def to_dense(self):
        return self.L.toarray() if self.kind == "sparse" else self.L


def cholesky(A: SpdMatrix) -> CholeskyFactor:
    """Factor A = L L^T, raising NotPositiveDefinite on failure.

    Sparse inputs are densified for the factorization (problem sizes here
    are desk scale) and the factor is stored back in sparse form so the
    factor matches the storage class of its source.
    """
    if A.is_identity:
        return CholeskyFactor(L=np.eye(A.n), kind="dense")
    dense = A.to_dense()
    try:
        L = scipy.linalg.cholesky(dense, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc
    pivots = np.diag(L) ** 2
    max_diag = float(np.max(np.diag(dense)))
    if np.min(pivots) < PIVOT_RTOL * max_diag:
        raise NotPositiveDefinite(
            f"pivot {np.min(pivots):.3e} below tolerance {PIVOT_RTOL * max_diag:.3e}; "
            "matrix is numerically indefinite"
        )
    if A.kind == "sparse":
        return CholeskyFactor(L=scipy.sparse.csc_matrix(L), kind="sparse")
    return CholeskyFactor(L=L, kind="dense")


def solve_lower_triangular(factor: CholeskyFactor, b):
    """Solve L x = b by forward substitution."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.n:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != order {factor.n}")
    return scipy.linalg.solve_triangular(factor.to_dense(), b, lower=True, check_finite=False)


@dataclass(frozen=True)
class PointCloud:
    """Planar points in the unit square."""

    coords: np.ndarray  # (n, 2)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InvalidShape(f"expected (n, 2) coordinates, got {coords.shape}")
        if coords.size and (coords.min() < 0.0 or coords.max() > 1.0):
            raise InvalidShape("coordinates must lie in [0, 1]^2")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self):
        return self.coords.shape[0]


def grid_points(side) -> PointCloud:
    """Deterministic cell-center grid of side^2 points over [0, 1]^2.

    side = 1 gives the single point (0.5, 0.5); side = 2 gives the four
    points with coordinates in {0.25, 0.75}.
    """
    side = int(side)
    if side < 1:
        raise InvalidShape("side must be >= 1")
    centers = (np.arange(side) + 0.5) / side
    xs, ys = np.meshgrid(centers, centers, indexing="ij")
    return PointCloud(coords=np.column_stack([xs.ravel(), ys.ravel()]))


def random_points(count, seed) -> PointCloud:
    """Uniform random points over [0, 1]^2, for comparison with the grid."""
    rng = np.random.default_rng(seed)
    return PointCloud(coords=rng.uniform(0.0, 1.0, size=(int(count), 2)))


def build_kernel(points: PointCloud, kernel_fn) -> SpdMatrix:
    """Dense kernel matrix K_ij = kernel_fn(d_ij) over pairwise Euclidean distances."""
    dists = scipy.spatial.distance.squareform(
        scipy.spatial.distance.pdist(points.coords, metric="euclidean")
    )
    K = kernel_fn(dists)
    np.fill_diagonal(K, kernel_fn(np.zeros(points.n)))
    return SpdMatrix.from_dense(K)


def build_exponential_kernel(points: PointCloud, rho) -> SpdMatrix:
    """Isotropic exponential-decay correlation matrix exp(-|x_i - x_j| / rho)."""
    rho = float(rho)
    if rho <= 0.0:
        raise InvalidShape("rho must be positive")
    return build_kernel(points, lambda d: np.exp(-d / rho))


@dataclass(frozen=True)
class DesignMatrix:
    """Tall design matrix X = U S V^T built from two Householder reflectors.

    U = I - 2 u u^T / |u|^2 (order n) and V = I - 2 v v^T / |v|^2 (order m)
    are never materialized; X is assembled with rank-1 updates. The diagonal
    of S follows the decaying profile ``exp(-decay_coeff * ((i-1)/m)**decay_exp)``,
    which makes X numerically singular for the default parameters.
    """

    matrix: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    decay_coeff: float
    decay_exp: float

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def m(self):
        return self.matrix.shape[1]

    def singular_values(self):
        i = np.arange(1, self.m + 1)
        return np.exp(-self.decay_coeff * ((i - 1) / self.m) ** self.decay_exp)


def apply_householder(u, vectors):
    """Apply (I - 2 u u^T / |u|^2) to the columns of ``vectors``."""
    u = np.asarray(u, dtype=float)
    scale = 2.0 / np.dot(u, u)
    return vectors - np.outer(u, scale * (u @ vectors))


def build_design_matrix(n, m, u, v, decay_coeff=40.0, decay_exp=0.75) -> DesignMatrix:
    """Assemble X = U S V^T without forming the n-by-n reflector U."""
    n, m = int(n), int(m)
    if n <= m:
        raise InvalidShape(f"need n > m, got n={n}, m={m}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (n,) or v.shape != (m,):
        raise DimensionMismatch("u must have length n and v length m")
    if not np.any(u) or not np.any(v):
        raise InvalidShape("u and v must be nonzero")
    sigma = np.exp(-decay_coeff * (np.arange(m) / m) ** decay_exp)
    # Top m rows of S V^T, as a rank-1 update of diag(sigma); rows m..n are zero.
    top = np.diag(sigma) - np.outer(sigma * v, (2.0 / np.dot(v, v)) * v)
    X = np.zeros((n, m))
    X[:m, :] = top
    X = apply_householder(u, X)
    return DesignMatrix(matrix=X, u=u, v=v, decay_coeff=float(decay_coeff),
                        decay_exp=float(decay_exp))
