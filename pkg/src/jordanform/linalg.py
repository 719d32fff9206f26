"""Dense complex linear-algebra kernel.

QR factorization with row updating/downdating, Hessenberg reduction with a
prescribed first column, complex Schur form and eigenvalue reordering,
inverse-iteration null vectors for triangular matrices, and QR least
squares.  Everything works on plain ``numpy`` arrays of ``complex128``;
all functions are pure and safe to call concurrently on distinct inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, JordanFormError, RankDeficientError

EPS = float(np.finfo(np.float64).eps)


class NumericalWarning(UserWarning):
    """Non-fatal numerical issue (skipped swap, extra pass, ...)."""


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a dense C-ordered complex128 array.

    Raises ``JordanFormError`` for empty input or non-finite entries.
    """
    a = np.array(m, dtype=np.complex128, order="C")
    if a.ndim != 2:
        raise JordanFormError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if a.size == 0:
        raise JordanFormError(f"empty input: {name} has shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise JordanFormError(f"{name} contains non-finite entries")
    return a


def _unit_vector(v, n: int, name: str = "v") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != n:
        raise JordanFormError(f"{name} has length {v.shape[0]}, expected {n}")
    nv = np.linalg.norm(v)
    if abs(nv - 1.0) > 1e-8:
        raise JordanFormError(f"{name} must have unit 2-norm (got {nv})")
    return v / nv


@dataclass(frozen=True)
class QRFactorization:
    """QR factors of a matrix.

    ``q`` is unitary (square in full mode, tall in economic mode), ``r``
    upper triangular/trapezoidal with exact zeros below the diagonal.
    """

    q: np.ndarray
    r: np.ndarray
    economic: bool

    @property
    def matrix(self) -> np.ndarray:
        """The factored matrix, reconstructed as ``q @ r``."""
        return self.q @ self.r


@dataclass(frozen=True)
class HessenbergForm:
    """Unitary similarity ``a = q @ h @ q^H`` with ``h`` upper Hessenberg."""

    q: np.ndarray
    h: np.ndarray


class NullVectorResult(NamedTuple):
    z: np.ndarray
    sigma_est: float
    perturbed: bool


def householder_qr(m, economic: bool = False) -> QRFactorization:
    """Householder QR with deterministic sign convention.

    The diagonal of ``r`` is real and non-negative.  In economic mode the
    input must have at least as many rows as columns.
    """
    a = as_complex_matrix(m)
    rows, cols = a.shape
    if economic and rows < cols:
        raise JordanFormError("economic QR requires rows >= cols")
    q, r = np.linalg.qr(a, mode="reduced" if economic else "complete")
    # rotate column phases so diag(r) is real non-negative
    d = np.diag(r).copy()
    k = d.shape[0]
    phase = np.where(np.abs(d) > 0, d / np.abs(np.where(np.abs(d) > 0, d, 1.0)), 1.0)
    q[:, :k] = q[:, :k] * phase[np.newaxis, :]
    r[:k, :] = np.conj(phase)[:, np.newaxis] * r[:k, :]
    r = np.triu(r)
    r[:k, :k][np.diag_indices(k)] = np.abs(d)
    return QRFactorization(q=q, r=r, economic=economic)


def qr_insert_row(f: QRFactorization, row, position: int) -> QRFactorization:
    """Update a full QR factorization after inserting a row.

    O(m^2) Givens-based update; requires a full (non-economic)
    factorization.
    """
    if f.economic:
        raise JordanFormError("row updating requires a full QR factorization")
    u = np.asarray(row, dtype=np.complex128).reshape(-1)
    if u.shape[0] != f.r.shape[1]:
        raise JordanFormError(
            f"row length {u.shape[0]} does not match factor columns {f.r.shape[1]}"
        )
    if not 0 <= position <= f.q.shape[0]:
        raise JordanFormError(f"insert position {position} out of range")
    q1, r1 = sla.qr_insert(f.q, f.r, u, position, which="row")
    return QRFactorization(q=q1, r=np.triu(r1), economic=False)


def qr_delete_row(f: QRFactorization, position: int) -> QRFactorization:
    """Downdate a full QR factorization after deleting a row."""
    if f.economic:
        raise JordanFormError("row downdating requires a full QR factorization")
    if not 0 <= position < f.q.shape[0]:
        raise JordanFormError(f"delete position {position} out of range")
    if f.q.shape[0] <= 1:
        raise JordanFormError("cannot delete the last remaining row")
    q1, r1 = sla.qr_delete(f.q, f.r, position, which="row")
    return QRFactorization(q=q1, r=np.triu(r1), economic=False)


def _solve_triangular_protected(r, b, herm: bool, diag_floor: float):
    d = np.abs(np.diag(r))
    if np.any(d < diag_floor):
        r = r.copy()
        idx = np.where(d < diag_floor)[0]
        rd = np.diag(r).copy()
        for i in idx:
            rd[i] = diag_floor if rd[i] == 0 else rd[i] * (diag_floor / max(d[i], EPS * diag_floor))
        r[np.diag_indices_from(r)] = rd
        perturbed = True
    else:
        perturbed = False
    x = sla.solve_triangular(r, b, lower=False, trans="C" if herm else "N")
    return x, perturbed


def inverse_iteration_null_vector(
    r, seed=0, max_iters: int = 30
) -> NullVectorResult:
    """Estimate the smallest singular value and right singular vector of an
    upper-triangular matrix by two-solve inverse iteration.

    Each sweep solves ``R^H x = z`` then ``R y = x`` and normalizes; the
    iteration stops once successive estimates agree within 10%.  Diagonal
    entries smaller than ``eps * ||R||_F`` are perturbed up to that level
    before solving (reported via the ``perturbed`` flag).
    """
    a = as_complex_matrix(r, "r")
    n, m = a.shape
    if n != m:
        raise JordanFormError("inverse iteration requires a square triangular matrix")
    if np.any(np.abs(np.tril(a, -1)) > 0):
        raise JordanFormError("matrix is not upper triangular")
    scale = np.linalg.norm(a)
    if scale == 0.0:
        z = np.zeros(n, dtype=np.complex128)
        z[-1] = 1.0
        return NullVectorResult(z=z, sigma_est=0.0, perturbed=False)
    floor = EPS * scale
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z /= np.linalg.norm(z)
    perturbed = False
    sigma_prev = np.inf
    sigma = np.inf
    for _ in range(max_iters):
        x, p1 = _solve_triangular_protected(a, z, herm=True, diag_floor=floor)
        y, p2 = _solve_triangular_protected(a, x, herm=False, diag_floor=floor)
        perturbed = perturbed or p1 or p2
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            break
        z = y / ny
        sigma = float(np.linalg.norm(a @ z))
        if sigma_prev < np.inf and 0.9 <= sigma / max(sigma_prev, 1e-300) <= 1.1:
            sigma_prev = sigma
            break
        sigma_prev = sigma
    return NullVectorResult(z=z, sigma_est=float(min(sigma, sigma_prev)), perturbed=perturbed)


def second_singular_estimate(r, z, seed=1, iters: int = 6) -> float:
    """Estimate the second-smallest singular value of triangular ``r``,
    deflating the direction ``z`` (an approximate smallest singular
    vector) by projection at every step."""
    a = as_complex_matrix(r, "r")
    n = a.shape[0]
    if n <= 1:
        return float(np.linalg.norm(a))
    scale = np.linalg.norm(a)
    floor = EPS * max(scale, 1.0)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w = w - z * (np.conj(z) @ w)
    w /= max(np.linalg.norm(w), 1e-300)
    sigma = np.inf
    for _ in range(iters):
        x, _ = _solve_triangular_protected(a, w, herm=True, diag_floor=floor)
        y, _ = _solve_triangular_protected(a, x, herm=False, diag_floor=floor)
        y = y - z * (np.conj(z) @ y)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            break
        w = y / ny
        sigma = float(np.linalg.norm(a @ w))
    return sigma


class _IncrementalHessenberg:
    """Stepwise Householder Hessenberg reduction with prescribed first
    column of the transform.

    After ``advance(j)`` the first ``j`` columns of ``h`` and the first
    ``j + 1`` columns of ``q`` are final and will not change in later
    steps.
    """

    def __init__(self, a: np.ndarray, v: np.ndarray):
        n = a.shape[0]
        self.n = n
        # Householder-based unitary T with T e1 = v exactly
        if n == 1:
            t = np.ones((1, 1), dtype=np.complex128)
        else:
            # reflector P with P v = alpha e1; then T = P diag(alpha, I)
            # has first column exactly v.  |u|^2 = 2 + 2|v_0| never vanishes.
            theta = np.angle(v[0]) if abs(v[0]) > 0 else 0.0
            alpha = -np.exp(1j * theta)
            u = v.astype(np.complex128).copy()
            u[0] -= alpha
            u /= np.linalg.norm(u)
            t = np.eye(n, dtype=np.complex128) - 2.0 * np.outer(u, np.conj(u))
            t[:, 0] *= alpha
        self.q = t
        self.b = t.conj().T @ a @ t
        self.steps_done = 0

    def advance(self, upto: int) -> None:
        """Run reduction steps so that columns ``0..upto-1`` of ``h`` are
        final (0-based)."""
        n = self.n
        while self.steps_done < min(upto, n - 2):
            c = self.steps_done
            x = self.b[c + 1 :, c]
            nx = np.linalg.norm(x)
            if nx > 0:
                theta = np.angle(x[0]) if abs(x[0]) > 0 else 0.0
                alpha = -np.exp(1j * theta) * nx
                u = x.copy()
                u[0] -= alpha
                nu = np.linalg.norm(u)
                if nu > EPS * nx:
                    u /= nu
                    # two-sided application of P = I - 2 u u^H on trailing part
                    self.b[c + 1 :, :] -= 2.0 * np.outer(u, np.conj(u) @ self.b[c + 1 :, :])
                    self.b[:, c + 1 :] -= 2.0 * np.outer(self.b[:, c + 1 :] @ u, np.conj(u))
                    self.q[:, c + 1 :] -= 2.0 * np.outer(self.q[:, c + 1 :] @ u, np.conj(u))
            self.b[c + 2 :, c] = 0.0
            self.steps_done += 1

    def h_matrix(self) -> np.ndarray:
        h = self.b.copy()
        k = self.steps_done
        for c in range(min(k, self.n)):
            h[c + 2 :, c] = 0.0
        return h


def hessenberg_with_first_column(a, v) -> HessenbergForm:
    """Unitary reduction ``a = q h q^H`` with ``q e1`` equal to ``v`` up to
    a unit phase.

    The reduction is incremental: after ``j`` steps the leading ``j``
    columns of ``q`` and ``h`` are final, which makes the transform's
    leading columns an orthonormal basis of the Krylov subspace generated
    by ``v`` whenever that subspace has full dimension.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise JordanFormError("matrix must be square")
    v = _unit_vector(v, n)
    red = _IncrementalHessenberg(a, v)
    red.advance(n)
    h = np.asarray(red.h_matrix())
    for c in range(n):
        h[c + 2 :, c] = 0.0
    return HessenbergForm(q=red.q, h=h)


def schur_form(a):
    """Complex Schur decomposition ``a = q t q^H`` (Francis QR via LAPACK).

    Returns ``(q, t, eigenvalues)`` with the eigenvalues read off the
    diagonal of ``t``.
    """
    m = as_complex_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise JordanFormError("matrix must be square")
    try:
        t, q = sla.schur(m, output="complex")
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceError(f"Schur iteration did not converge: {exc}") from exc
    t = np.triu(t)
    return q, t, np.diag(t).copy()


def _swap_adjacent(q, t, p):
    """Unitary swap of the diagonal entries t[p,p] and t[p+1,p+1].

    Returns True if the swap was performed, False if it was skipped as
    ill-conditioned (eigenvalues nearly equal, strong coupling).
    """
    a = t[p, p]
    c = t[p, p + 1]
    d = t[p + 1, p + 1]
    # eigenvector of [[a, c], [0, d]] for eigenvalue d is [c, d - a]
    x = np.array([c, d - a], dtype=np.complex128)
    nx = np.linalg.norm(x)
    block_scale = abs(a) + abs(c) + abs(d)
    if nx <= EPS * block_scale:
        # c ~ 0 and d ~ a: plain permutation is exact enough
        g = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    else:
        u = x / nx
        g = np.column_stack([u, np.array([-np.conj(u[1]), np.conj(u[0])])])
    t2 = g.conj().T @ np.array([[a, c], [0.0, d]]) @ g
    if abs(t2[1, 0]) > 64.0 * EPS * max(block_scale, EPS):
        return False
    t[:, p : p + 2] = t[:, p : p + 2] @ g
    t[p : p + 2, :] = g.conj().T @ t[p : p + 2, :]
    q[:, p : p + 2] = q[:, p : p + 2] @ g
    t[p + 1, p] = 0.0
    return True


def reorder_schur(q, t, select):
    """Reorder a complex Schur form so the selected eigenvalues occupy the
    trailing diagonal block.

    ``select`` is a predicate on the eigenvalue index (position along the
    diagonal of the input ``t``) or a boolean sequence.  Implemented by
    unitary swaps of adjacent diagonal entries; a swap between nearly
    equal, strongly coupled eigenvalues is skipped with a
    ``NumericalWarning``.
    """
    q = np.array(q, dtype=np.complex128)
    t = np.array(t, dtype=np.complex128)
    n = t.shape[0]
    if callable(select):
        sel = np.array([bool(select(i)) for i in range(n)])
    else:
        sel = np.asarray(select, dtype=bool).copy()
        if sel.shape != (n,):
            raise JordanFormError("selection mask length mismatch")
    target = n - 1
    for _ in range(int(sel.sum())):
        src = np.where(sel[: target + 1])[0]
        if src.size == 0:
            break
        p = src[-1]
        ok = True
        while p < target:
            if not _swap_adjacent(q, t, p):
                warnings.warn(
                    f"skipped ill-conditioned eigenvalue swap at position {p}",
                    NumericalWarning,
                )
                ok = False
                break
            sel[p], sel[p + 1] = sel[p + 1], sel[p]
            p += 1
        if ok:
            sel[target] = False
            target -= 1
        else:
            break
    return q, t


def qr_least_squares(m, rhs) -> np.ndarray:
    """Minimize ``||m x - rhs||_2`` by QR.

    Raises ``RankDeficientError`` when ``m`` is numerically rank deficient
    (smallest/largest singular value below ``n * eps``).
    """
    a = as_complex_matrix(m)
    b = np.asarray(rhs, dtype=np.complex128).reshape(-1)
    rows, cols = a.shape
    if rows < cols:
        raise JordanFormError("least squares requires rows >= cols")
    if b.shape[0] != rows:
        raise JordanFormError("right-hand side length mismatch")
    q, r = np.linalg.qr(a, mode="reduced")
    dr = np.abs(np.diag(r))
    scale = dr.max() if dr.size else 0.0
    if scale == 0.0:
        raise RankDeficientError("rank-deficient least squares")
    if cols <= 400:
        sv = sla.svdvals(r)
        smin, smax = sv[-1], sv[0]
    else:
        smin = inverse_iteration_null_vector(np.triu(r), seed=3, max_iters=8).sigma_est
        smax = np.linalg.norm(r, 2)
    if smin / smax < max(rows, cols) * EPS:
        raise RankDeficientError("rank-deficient least squares")
    return sla.solve_triangular(r, q.conj().T @ b, lower=False)
