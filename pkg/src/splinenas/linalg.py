"""Column-pivoted Householder QR with rank estimation and verified solves.

The surrogate system is small (a few hundred rows at most) and sensitive to
near-degenerate support geometry, so stability is traded for speed: pivot
columns are selected by freshly recomputed norms and every solve is meant to
be re-checked with :func:`verify_residual`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, RankDeficient

DEFAULT_RANK_TOL = 1e-12


@dataclass(frozen=True)
class ResidualCheck:
    """Outcome of an ``A x - b`` check: pass/fail plus the max residual."""

    passed: bool
    max_residual: float

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True, eq=False)
class QrFactorization:
    """Packed Householder factorization ``A P = Q R``.

    ``packed`` holds R on and above the diagonal and the reflector tails
    below it (the leading 1 of each reflector is implicit); ``taus`` are the
    reflector scales. ``perm`` maps factor columns back to input columns:
    ``A[:, perm] == Q @ R``.
    """

    packed: np.ndarray
    taus: np.ndarray
    perm: np.ndarray
    rank: int
    rank_tol: float

    @property
    def rows(self) -> int:
        return self.packed.shape[0]

    @property
    def cols(self) -> int:
        return self.packed.shape[1]

    def r(self) -> np.ndarray:
        k = min(self.rows, self.cols)
        return np.triu(self.packed[:k, :])

    def q(self) -> np.ndarray:
        """Materialize the thin Q (rows x min(rows, cols))."""
        m = self.rows
        k = min(m, self.cols)
        q = np.eye(m, k)
        for j in reversed(range(k)):
            tau = self.taus[j]
            if tau == 0.0:
                continue
            v = np.empty(m - j)
            v[0] = 1.0
            v[1:] = self.packed[j + 1 :, j]
            q[j:, :] -= np.outer(v, tau * (v @ q[j:, :]))
        return q

    def apply_qt(self, b: np.ndarray) -> np.ndarray:
        """Compute Q^T b without materializing Q."""
        y = np.array(b, dtype=float)
        k = min(self.rows, self.cols)
        for j in range(k):
            tau = self.taus[j]
            if tau == 0.0:
                continue
            v = np.empty(self.rows - j)
            v[0] = 1.0
            v[1:] = self.packed[j + 1 :, j]
            y[j:] -= tau * (v @ y[j:]) * v
        return y

    def reconstruct(self) -> np.ndarray:
        """Rebuild the input matrix as Q R P^T (oracle for tests)."""
        out = np.empty((self.rows, self.cols))
        out[:, self.perm] = self.q() @ self.r()
        return out

    def diagonal(self) -> np.ndarray:
        k = min(self.rows, self.cols)
        return np.abs(np.diagonal(self.packed)[:k])


def qr_decompose(a, rank_tol: float = DEFAULT_RANK_TOL) -> QrFactorization:
    """Factor ``a`` as Q R with column pivoting and estimate its rank.

    Rank counts diagonal entries of R with magnitude above
    ``rank_tol * |R[0, 0]|``; pivoting makes the diagonal magnitudes
    non-increasing, so the estimate is a prefix length.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"need a 2-d matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFiniteInput("matrix contains NaN or infinite entries")
    if not rank_tol > 0.0:
        raise ValueError("rank_tol must be positive")

    m, n = a.shape
    k = min(m, n)
    packed = a
    taus = np.zeros(k)
    perm = np.arange(n)

    for j in range(k):
        norms = np.linalg.norm(packed[j:, j:], axis=0)
        p = j + int(np.argmax(norms))
        if p != j:
            packed[:, [j, p]] = packed[:, [p, j]]
            perm[[j, p]] = perm[[p, j]]

        x = packed[j:, j]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue  # remaining block is zero; taus[j] stays 0
        sigma = 1.0 if x[0] >= 0.0 else -1.0
        v0 = x[0] + sigma * norm_x
        v = x / v0
        v[0] = 1.0
        tau = sigma * v0 / norm_x

        packed[j:, j:] -= np.outer(v, tau * (v @ packed[j:, j:]))
        packed[j, j] = -sigma * norm_x
        packed[j + 1 :, j] = v[1:]
        taus[j] = tau

    diag = np.abs(np.diagonal(packed)[:k])
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > rank_tol * diag[0]))

    return QrFactorization(packed=packed, taus=taus, perm=perm, rank=rank, rank_tol=rank_tol)


def qr_solve(f: QrFactorization, b) -> np.ndarray:
    """Solve min ||A x - b|| from a factorization of A.

    Requires full estimated column rank; for square systems this is the
    plain linear solve.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (f.rows,):
        raise ValueError(f"b has shape {b.shape}, expected ({f.rows},)")
    n = f.cols
    if f.rank < n:
        raise RankDeficient(
            f"estimated rank {f.rank} < {n} columns (tol {f.rank_tol:g})"
        )

    y = f.apply_qt(b)[:n]
    r = f.packed
    xp = np.zeros(n)
    for i in reversed(range(n)):
        xp[i] = (y[i] - r[i, i + 1 :] @ xp[i + 1 :]) / r[i, i]

    x = np.empty(n)
    x[f.perm] = xp
    return x


def verify_residual(a, x, b, tol: float) -> ResidualCheck:
    """Check max_i |(A x - b)_i| <= tol, returning the residual either way."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or x.shape != (a.shape[1],) or b.shape != (a.shape[0],):
        raise ValueError("incompatible shapes for residual check")
    residual = a @ x - b
    max_residual = float(np.max(np.abs(residual))) if residual.size else 0.0
    return ResidualCheck(passed=max_residual <= tol, max_residual=max_residual)
