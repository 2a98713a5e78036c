"""Exact and stochastic estimators of trace(M^-1).

The exact Cholesky route accumulates the squared Frobenius norm of L^-1
by forward-substitution on blocks of identity columns, so the full inverse
factor is never stored. The stochastic routes (Hutchinson and stochastic
Lanczos quadrature) draw Rademacher probe vectors from per-sample seed
streams derived from one master seed, which makes results reproducible
and independent of the order in which samples are processed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .exceptions import DimensionMismatch, InvalidShape, NotPositiveDefinite
from .matrices import CholeskyFactor, SpdMatrix, cholesky

EXACT_EIGEN_MAX_ORDER = 2000
LANCZOS_BREAKDOWN_RTOL = 1e-13
TRACE_SOLVE_BLOCK = 256


@dataclass(frozen=True)
class TraceEstimate:
    """A trace(M^-1) value with method and sampling metadata."""

    value: float
    method: str  # "exact-cholesky" | "exact-eigen" | "hutchinson" | "slq"
    n_v: int = 0
    std_error: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.value <= 0.0:
            raise NotPositiveDefinite(f"trace estimate {self.value} is not positive")
        if self.std_error < 0.0:
            raise InvalidShape("std_error must be nonnegative")

    def record(self, t=None):
        """JSON-ready dict; ``t`` is the shift the estimate was taken at."""
        rec = {
            "t": t,
            "value": self.value,
            "method": self.method,
            "n_v": self.n_v,
            "std_error": self.std_error,
            "seed": self.seed,
        }
        return rec


@dataclass(frozen=True)
class LanczosTriDiag:
    """Tridiagonal output of the Lanczos recurrence."""

    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    @property
    def degree(self):
        return self.alpha.shape[0]


def shifted_operand(A: SpdMatrix, B: SpdMatrix, t) -> SpdMatrix:
    """Materialize A + t*B (diagonal update when B is the identity)."""
    if A.n != B.n:
        raise DimensionMismatch(f"orders differ: {A.n} vs {B.n}")
    t = float(t)
    if B.is_identity:
        if A.is_identity:
            return SpdMatrix.from_dense(np.eye(A.n) * (1.0 + t))
        if A.kind == "sparse":
            return SpdMatrix.from_sparse(A.data + t * scipy.sparse.eye(A.n))
        shifted = A.data.copy()
        shifted[np.diag_indices_from(shifted)] += t
        return SpdMatrix.from_dense(shifted)
    if A.kind == "sparse" and B.kind == "sparse":
        return SpdMatrix.from_sparse(A.data + t * B.data)
    return SpdMatrix.from_dense(A.to_dense() + t * B.to_dense())


def _frobenius_norm_sq_of_inverse(factor: CholeskyFactor, block=TRACE_SOLVE_BLOCK):
    """Sum of |x_i|^2 over solutions of L x_i = e_i, block by block.

    Column i of L^-1 is zero above row i, so each block only needs the
    trailing subsystem; the inverse factor itself is never assembled.
    """
    L = factor.to_dense()
    n = L.shape[0]
    total = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        rhs = np.zeros((n - start, stop - start))
        rhs[np.arange(stop - start), np.arange(stop - start)] = 1.0
        sub = np.ascontiguousarray(L[start:, start:])
        cols = scipy.linalg.solve_triangular(sub, rhs, lower=True, check_finite=False)
        total += float(np.sum(cols**2))
    return total


def trace_inv_exact_cholesky(M: SpdMatrix) -> TraceEstimate:
    """trace(M^-1) as the squared Frobenius norm of L^-1 from M = L L^T."""
    factor = cholesky(M)
    value = _frobenius_norm_sq_of_inverse(factor)
    return TraceEstimate(value=value, method="exact-cholesky")


def trace_inv_exact_eigen(A: SpdMatrix, B: SpdMatrix | None = None):
    """Closure t -> trace((A + t*B)^-1) from one (generalized) eigensolve.

    With eigenpairs (g_i, v_i) of the pencil (A, B) normalized so that
    V^T B V = I, the trace equals sum_i |v_i|^2 / (g_i + t), i.e.
    sum_i 1 / (lam_i + t*mu_i) with lam_i = g_i/|v_i|^2, mu_i = 1/|v_i|^2.
    When B is the identity this reduces to the plain eigenvalue sum. The
    closure raises NotPositiveDefinite for t at or below -min(lam/mu).
    """
    if A.n > EXACT_EIGEN_MAX_ORDER:
        raise InvalidShape(
            f"order {A.n} exceeds the exact-eigen guard ({EXACT_EIGEN_MAX_ORDER})"
        )
    if B is not None and B.n != A.n:
        raise DimensionMismatch(f"orders differ: {A.n} vs {B.n}")
    if B is None or B.is_identity:
        lam = scipy.linalg.eigh(A.to_dense(), eigvals_only=True, check_finite=False)
        mu = np.ones_like(lam)
    else:
        gamma, V = scipy.linalg.eigh(A.to_dense(), B.to_dense(), check_finite=False)
        weights = np.sum(V**2, axis=0)
        lam = gamma / weights
        mu = 1.0 / weights
    if np.min(lam) <= 0.0 or np.min(mu) <= 0.0:
        raise NotPositiveDefinite("pencil has non-positive eigenvalues")

    def evaluate(t):
        denom = lam + float(t) * mu
        if np.min(denom) <= 0.0:
            raise NotPositiveDefinite(f"A + t*B is not positive definite at t={t}")
        return float(np.sum(1.0 / denom))

    return evaluate


def _rademacher(n, rng):
    return rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0


def _sample_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def trace_inv_hutchinson(M: SpdMatrix, n_v, seed) -> TraceEstimate:
    """Monte-Carlo trace estimate (1/n_v) * sum_k z_k^T M^-1 z_k.

    Probes z_k are Rademacher. All solves reuse a single Cholesky
    factorization of M; samples are accumulated in index order.
    """
    n_v = int(n_v)
    if n_v < 1:
        raise InvalidShape("n_v must be >= 1")
    factor = cholesky(M)
    L = factor.to_dense()
    samples = np.empty(n_v)
    for k in range(n_v):
        z = _rademacher(M.n, _sample_rng(seed, k))
        y = scipy.linalg.solve_triangular(L, z, lower=True, check_finite=False)
        samples[k] = float(np.dot(y, y))  # z^T M^-1 z = |L^-1 z|^2
    value = float(np.mean(samples))
    std_error = float(np.std(samples, ddof=1) / np.sqrt(n_v)) if n_v > 1 else 0.0
    return TraceEstimate(value=value, method="hutchinson", n_v=n_v,
                         std_error=std_error, seed=int(seed))


def lanczos(M: SpdMatrix, v0, degree) -> LanczosTriDiag:
    """Lanczos tridiagonalization with full reorthogonalization.

    Stops early (graceful truncation) when the off-diagonal recurrence
    coefficient falls below LANCZOS_BREAKDOWN_RTOL times a cheap norm
    estimate of M, i.e. when an invariant subspace has been found.
    """
    degree = int(degree)
    if degree < 1:
        raise InvalidShape("degree must be >= 1")
    v0 = np.asarray(v0, dtype=float)
    norm0 = np.linalg.norm(v0)
    if norm0 == 0.0:
        raise InvalidShape("start vector must be nonzero")
    breakdown = LANCZOS_BREAKDOWN_RTOL * max(M.entry_norm(), 1e-300)

    n = M.n
    degree = min(degree, n)
    Q = np.zeros((n, degree))
    alpha = np.zeros(degree)
    beta = np.zeros(max(degree - 1, 0))
    q = v0 / norm0
    Q[:, 0] = q
    u = M.matvec(q)
    alpha[0] = float(np.dot(q, u))
    r = u - alpha[0] * q
    k = 1
    while k < degree:
        r -= Q[:, :k] @ (Q[:, :k].T @ r)  # full reorthogonalization
        b = float(np.linalg.norm(r))
        if b < breakdown:
            break
        q = r / b
        Q[:, k] = q
        u = M.matvec(q)
        alpha[k] = float(np.dot(q, u))
        beta[k - 1] = b
        r = u - alpha[k] * q - b * Q[:, k - 1]
        k += 1
    return LanczosTriDiag(alpha=alpha[:k], beta=beta[: max(k - 1, 0)])


def trace_inv_slq(M: SpdMatrix, n_v, degree, seed) -> TraceEstimate:
    """Stochastic Lanczos quadrature estimate of trace(M^-1).

    Each Rademacher probe is normalized to a unit start vector; the Gauss
    quadrature weights come from the first components of the eigenvectors
    of the Lanczos tridiagonal, and the per-probe estimate is
    n * sum_j w_j / theta_j. Non-positive quadrature nodes theta_j signal
    an indefinite operand.
    """
    n_v = int(n_v)
    if n_v < 1:
        raise InvalidShape("n_v must be >= 1")
    n = M.n
    samples = np.empty(n_v)
    for k in range(n_v):
        z = _rademacher(n, _sample_rng(seed, k))
        tri = lanczos(M, z, degree)
        if tri.degree == 1:
            theta = tri.alpha.copy()
            first = np.ones(1)
        else:
            theta, vecs = scipy.linalg.eigh_tridiagonal(tri.alpha, tri.beta)
            first = vecs[0, :]
        if np.min(theta) <= 0.0:
            raise NotPositiveDefinite(
                f"quadrature node {np.min(theta):.3e} <= 0; operand is not positive definite"
            )
        samples[k] = n * float(np.sum(first**2 / theta))
    value = float(np.mean(samples))
    std_error = float(np.std(samples, ddof=1) / np.sqrt(n_v)) if n_v > 1 else 0.0
    return TraceEstimate(value=value, method="slq", n_v=n_v,
                         std_error=std_error, seed=int(seed))


def estimate_trace_inv(M: SpdMatrix, method="cholesky", n_v=30, degree=30, seed=0) -> TraceEstimate:
    """Dispatch a trace(M^-1) estimate by method name."""
    if method == "cholesky":
        return trace_inv_exact_cholesky(M)
    if method == "eigen":
        value = trace_inv_exact_eigen(M)(0.0)
        return TraceEstimate(value=value, method="exact-eigen")
    if method == "hutchinson":
        return trace_inv_hutchinson(M, n_v=n_v, seed=seed)
    if method == "slq":
        return trace_inv_slq(M, n_v=n_v, degree=degree, seed=seed)
    raise InvalidShape(f"unknown trace method {method!r}")
