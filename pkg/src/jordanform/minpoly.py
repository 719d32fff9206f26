"""Minimal-polynomial chains via incremental Hessenberg reduction.

The degree of the minimal polynomial of a generic vector is found by
watching the smallest singular value of the triangular Krylov-basis
matrix during a Hessenberg reduction whose transform starts with that
vector; a large drop between consecutive steps marks the numerical rank
deficiency.  The partial reduction is then polished by Gauss-Newton,
deflated, and the process recurses on the trailing block, yielding
irreducible Hessenberg blocks whose characteristic polynomials are the
chain of minimal polynomials.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, JordanFormError, RankDeficientError, StructureError
from .linalg import (
    EPS,
    NumericalWarning,
    _IncrementalHessenberg,
    as_complex_matrix,
    householder_qr,
    inverse_iteration_null_vector,
    qr_least_squares,
)


@dataclass(frozen=True)
class Polynomial:
    """Monic polynomial with coefficients in ascending degree order.

    The leading coefficient is exactly 1 and stored last.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.shape[0] < 1:
            raise JordanFormError("polynomial needs at least one coefficient")
        lead = c[-1]
        if lead == 0:
            raise JordanFormError("leading coefficient must be nonzero")
        c = c / lead
        c[-1] = 1.0
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def derivative_coeffs(self) -> np.ndarray:
        """Raw (generally non-monic) coefficient vector of the derivative."""
        return np.polynomial.polynomial.polyder(self.coeffs)

    @staticmethod
    def from_roots(roots: Sequence[complex], multiplicities: Optional[Sequence[int]] = None) -> "Polynomial":
        c = np.array([1.0 + 0.0j])
        mults = [1] * len(roots) if multiplicities is None else list(multiplicities)
        for z, m in zip(roots, mults):
            for _ in range(int(m)):
                c = np.convolve(c, np.array([-z, 1.0 + 0.0j]))
        return Polynomial(c)


@dataclass(frozen=True)
class PartialHessenberg:
    """Leading part of a Hessenberg reduction at a Krylov breakpoint.

    ``q_cols`` holds the orthonormal Krylov basis, ``h_cols`` the leading
    square block of the Hessenberg matrix, ``coupling`` the magnitude of
    the residual ``a q_cols - q_cols h_cols`` that the refinement drives
    toward its least-squares minimum.
    """

    q_cols: np.ndarray
    h_cols: np.ndarray
    coupling: float
    start_vector: np.ndarray


@dataclass(frozen=True)
class MinimalPolynomialChain:
    """Chain of minimal polynomials with the reduction that produced it."""

    polys: tuple[Polynomial, ...]
    hessenberg_blocks: tuple[np.ndarray, ...]
    transform: np.ndarray
    degrees: tuple[int, ...]

    def __post_init__(self):
        if tuple(p.degree for p in self.polys) != tuple(self.degrees):
            raise JordanFormError("degree list inconsistent with polynomials")


def _krylov_rank_chain(a: np.ndarray, v: np.ndarray, seed):
    """Run the incremental reduction, yielding per-step smallest singular
    values of the triangular Krylov matrices ``[e1, h_1, ..., h_j]``."""
    n = a.shape[0]
    red = _IncrementalHessenberg(a, v)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigmas = [1.0]
    for j in range(1, n):
        red.advance(j)
        tri = np.zeros((j + 1, j + 1), dtype=np.complex128)
        tri[0, 0] = 1.0
        tri[: j + 1, 1:] = red.b[: j + 1, :j]
        tri = np.triu(tri)
        sigma = inverse_iteration_null_vector(tri, seed=rng).sigma_est
        sigmas.append(sigma)
        yield j, sigma, sigmas, red


def _breakpoint_scan(a: np.ndarray, v: np.ndarray, gamma: float, seed):
    """Return (degree, reduction, ratio) for the first numerically
    rank-deficient Krylov step; ratio is None when no deficiency occurs."""
    n = a.shape[0]
    if n == 1:
        red = _IncrementalHessenberg(a, v)
        return 1, red, None
    last_red = None
    for j, sigma, sigmas, red in _krylov_rank_chain(a, v, seed):
        last_red = red
        ratio = sigma / max(sigmas[-2], 1e-300)
        if ratio < gamma:
            return j, red, ratio
    return n, last_red, None


def _breakpoint_candidates(a: np.ndarray, v: np.ndarray, gamma: float, seed):
    """All plausible breakpoint degrees, most degenerate first.

    The first sub-threshold drop is the primary candidate.  When the
    singular values keep collapsing right after a drop, the chain had not
    bottomed out, so those positions are alternative candidates: the
    matrix may be far closer to the structure one step later (the full
    dimension is always the last resort).  Returns the candidate list and
    the completed reduction.
    """
    n = a.shape[0]
    if n == 1:
        return [1], _IncrementalHessenberg(a, v), None
    sig = [1.0]
    red = None
    for j, sigma, sigmas, r in _krylov_rank_chain(a, v, seed):
        red = r
        sig.append(sigma)
    hits = [j for j in range(1, n) if sig[j] / max(sig[j - 1], 1e-300) < gamma]
    first_ratio = None
    cands: list[int] = []
    for j in hits:
        if j in cands:
            continue
        if first_ratio is None:
            first_ratio = sig[j] / max(sig[j - 1], 1e-300)
        cands.append(j)
        k = j
        while k + 1 < n and sig[k + 1] < 0.5 * sig[k] and (k + 1) not in cands:
            cands.append(k + 1)
            k += 1
    if n not in cands:
        cands.append(n)
    return cands, red, first_ratio


def _eigenvalue_clusters(zs: np.ndarray, link: float = 0.1):
    """Single-linkage clusters of points in the complex plane; a multiple
    eigenvalue computed from a defective block scatters into such a
    cluster.  Returns (mean, radius) pairs."""
    k = zs.shape[0]
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for l in range(i + 1, k):
            if abs(zs[i] - zs[l]) <= link * (1.0 + min(abs(zs[i]), abs(zs[l]))):
                parent[find(i)] = find(l)
    groups: dict[int, list[complex]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(zs[i])
    out = []
    for members in groups.values():
        mean = np.mean(members)
        radius = max(abs(z - mean) for z in members)
        out.append((complex(mean), float(radius)))
    return out


def _partial_from_reduction(a, red, j: int, v: np.ndarray) -> PartialHessenberg:
    n = a.shape[0]
    red.advance(j)
    q_cols = red.q[:, :j].copy()
    h_cols = np.asarray(red.b[:j, :j]).copy()
    for c in range(j):
        h_cols[c + 2 :, c] = 0.0
    coupling = float(abs(red.b[j, j - 1])) if j < n else 0.0
    return PartialHessenberg(q_cols=q_cols, h_cols=h_cols, coupling=coupling, start_vector=v)


def krylov_breakpoint(a, v, gamma: float = 1e-4, seed=0):
    """First Krylov step at which the subspace dimension stalls.

    Returns ``(j, partial)`` where ``j`` is the degree of the minimal
    polynomial of ``v`` (numerically, per the gap-ratio test with
    threshold ``gamma``) and ``partial`` the Hessenberg reduction data
    through that step.  When no deficiency occurs through step ``n`` the
    whole space is cyclic and ``j = n``.
    """
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise JordanFormError("matrix must be square")
    if not 0.0 < gamma < 1.0:
        raise JordanFormError("gamma must be in (0, 1)")
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    nv = np.linalg.norm(v)
    if v.shape[0] != a.shape[0] or abs(nv - 1.0) > 1e-8:
        raise JordanFormError("v must be a unit vector of matching dimension")
    v = v / nv
    j, red, _ = _breakpoint_scan(a, v, gamma, seed)
    return j, _partial_from_reduction(a, red, j, v)


class _HessenbergLayout:
    """Unknown ordering for the partial-reduction refinement system:
    ``(q_1, ..., q_j, h-entries column-major within the Hessenberg
    pattern)``."""

    def __init__(self, n: int, j: int):
        self.n = n
        self.j = j
        self.entries = [(r, c) for c in range(j) for r in range(min(c + 2, j))]
        self.zeta = n * j + len(self.entries)
        self.eta = n * j + j * (j + 1) // 2 + n

    def pack(self, q, h):
        x = np.empty(self.zeta, dtype=np.complex128)
        x[: self.n * self.j] = q.reshape(-1, order="F")
        x[self.n * self.j :] = [h[r, c] for r, c in self.entries]
        return x

    def unpack(self, x):
        q = x[: self.n * self.j].reshape((self.n, self.j), order="F")
        h = np.zeros((self.j, self.j), dtype=np.complex128)
        for idx, (r, c) in enumerate(self.entries):
            h[r, c] = x[self.n * self.j + idx]
        return q, h


def _hess_f(a, q, h, c_vecs, v, lay):
    resid = a @ q - q @ h
    parts = [resid.reshape(-1, order="F")]
    tri = []
    for i in range(1, lay.j + 1):
        for l in range(1, i + 1):
            tri.append(np.conj(c_vecs[:, l - 1]) @ q[:, i - 1] - (1.0 if i == l else 0.0))
    parts.append(np.array(tri, dtype=np.complex128))
    parts.append(q[:, 0] - v)
    return np.concatenate(parts)


def _hess_jacobian(a, q, h, c_vecs, lay):
    n, j = lay.n, lay.j
    jac = np.zeros((lay.eta, lay.zeta), dtype=np.complex128)
    for col in range(j):
        rows = slice(col * n, (col + 1) * n)
        jac[rows, col * n : (col + 1) * n] += a
        for r in range(min(col + 2, j)):
            jac[rows, r * n : (r + 1) * n] -= h[r, col] * np.eye(n)
    for idx, (r, c) in enumerate(lay.entries):
        rows = slice(c * n, (c + 1) * n)
        jac[rows, n * j + idx] = -q[:, r]
    row = n * j
    for i in range(1, j + 1):
        for l in range(1, i + 1):
            jac[row, (i - 1) * n : i * n] = np.conj(c_vecs[:, l - 1])
            row += 1
    jac[row : row + n, 0:n] = np.eye(n)
    return jac


def refine_partial_hessenberg(a, partial: PartialHessenberg, c_vecs=None, max_iters: int = 10) -> PartialHessenberg:
    """Gauss-Newton polish of a partial Hessenberg reduction, minimizing
    the coupling to the trailing subspace.

    On divergence (three consecutive residual increases) the input is
    returned unchanged with a warning.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    j = partial.q_cols.shape[1]
    if j >= n or j == 0:
        return partial
    lay = _HessenbergLayout(n, j)
    v = partial.start_vector
    c_mat = partial.q_cols.copy() if c_vecs is None else np.asarray(c_vecs, dtype=np.complex128)
    x = lay.pack(partial.q_cols, partial.h_cols)
    q, h = lay.unpack(x)
    f = _hess_f(a, q, h, c_mat, v, lay)
    fn0 = np.linalg.norm(f)
    best = (fn0, x.copy())
    increases = 0
    prev = fn0
    for _ in range(max_iters):
        q, h = lay.unpack(x)
        jac = _hess_jacobian(a, q, h, c_mat, lay)
        try:
            step = qr_least_squares(jac, f)
        except RankDeficientError:
            warnings.warn("rank-deficient Jacobian in Hessenberg refinement", NumericalWarning)
            break
        x = x - step
        f = _hess_f(a, *lay.unpack(x), c_mat, v, lay)
        fn = float(np.linalg.norm(f))
        if not np.isfinite(fn):
            break
        if fn < best[0]:
            best = (fn, x.copy())
        if fn > prev:
            increases += 1
            if increases >= 3:
                warnings.warn(
                    "partial-Hessenberg refinement diverged; keeping the unrefined reduction",
                    NumericalWarning,
                )
                return partial
        else:
            increases = 0
        prev = fn
        if fn < EPS * max(1.0, np.linalg.norm(a)) * np.sqrt(n * j) or np.linalg.norm(step) < 1e-14 * max(
            1.0, np.linalg.norm(x)
        ):
            break
    if best[0] >= fn0:
        return partial
    q, h = lay.unpack(best[1])
    coupling = float(np.linalg.norm(a @ q - q @ h))
    return PartialHessenberg(q_cols=q, h_cols=h, coupling=coupling, start_vector=v)


def krylov_triangular(h_block) -> np.ndarray:
    """Triangular Krylov-basis factor built from a Hessenberg block:
    columns ``e1, H e1, H^2 e1, ...``."""
    h = as_complex_matrix(h_block)
    j = h.shape[0]
    r = np.zeros((j, j), dtype=np.complex128)
    col = np.zeros(j, dtype=np.complex128)
    col[0] = 1.0
    for c in range(j):
        r[:, c] = col
        if c + 1 < j:
            col = h @ col
    return np.triu(r)


def minpoly_coefficients(h_block, r_hat) -> Polynomial:
    """Monic minimal-polynomial coefficients from an irreducible
    Hessenberg block and the triangular Krylov factor.

    Solves ``[e1, H] z = 0`` (one-dimensional kernel for irreducible
    ``H``) and converts through the triangular system to the coefficient
    vector.
    """
    h = as_complex_matrix(h_block)
    r = as_complex_matrix(r_hat)
    j = h.shape[0]
    if h.shape[0] != h.shape[1] or r.shape != (j, j):
        raise JordanFormError("block and triangular factor must be square of equal size")
    v = np.zeros(j, dtype=np.complex128)
    v[j - 1] = 1.0
    for i in range(j - 1, 0, -1):
        sub = h[i, i - 1]
        if abs(sub) == 0.0:
            raise JordanFormError("Hessenberg block is reducible; cannot extract coefficients")
        v[i - 1] = -(h[i, i:] @ v[i:]) / sub
    alpha = -(h[0, :] @ v)
    u = sla.solve_triangular(r, v, lower=False)
    p = np.concatenate([[alpha], u])
    if abs(p[-1]) < EPS * np.linalg.norm(p):
        raise JordanFormError("degenerate leading coefficient in minimal polynomial")
    return Polynomial(p)


def minimal_polynomial_chain(a, gamma: float = 1e-4, seed=0) -> MinimalPolynomialChain:
    """Full chain of minimal polynomials by breakpoint detection,
    refinement, and recursive deflation.

    Degrees are checked to be non-increasing (a violation means a
    non-regular start vector slipped through; rerun with a new seed).
    The deflations use only unitary similarities, so the trailing blocks
    lose essentially no accuracy; the off-pattern leakage is monitored
    against ``1e-10 ||a||_F``.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise JordanFormError("matrix must be square")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    work = a.copy()
    u_total = np.eye(n, dtype=np.complex128)
    offset = 0
    polys: list[Polynomial] = []
    blocks: list[np.ndarray] = []
    degrees: list[int] = []
    leak = 0.0
    norm_a = np.linalg.norm(a)
    while work.shape[0] > 0:
        nc = work.shape[0]
        cands = None
        red = None
        v = None
        for attempt in range(3):
            v = rng.standard_normal(nc) + 1j * rng.standard_normal(nc)
            v /= np.linalg.norm(v)
            cands, red, first_ratio = _breakpoint_candidates(work, v, gamma, rng)
            # an ambiguous degree-1 call is cheap insurance against a
            # non-regular start vector
            if cands[0] == 1 and first_ratio is not None and first_ratio > gamma / 10.0 and attempt < 2:
                continue
            break
        # try candidate degrees in order, most degenerate first; accept the
        # first whose deflated block has its whole spectrum among the roots
        # of the extracted polynomial (divisibility of the next minimal
        # polynomial requires it)
        stage = None
        for j in cands:
            partial = _partial_from_reduction(work, red, j, v)
            if j < nc:
                partial = refine_partial_hessenberg(work, partial, max_iters=10)
            q_full = householder_qr(partial.q_cols, economic=False).q
            b = q_full.conj().T @ work @ q_full
            h_block = b[:j, :j].copy()
            stage_leak = 0.0
            for c in range(j):
                stage_leak += float(np.linalg.norm(h_block[c + 2 :, c]))
                h_block[c + 2 :, c] = 0.0
            stage_leak += float(np.linalg.norm(b[j:, :j]))
            trailing = b[j:, j:].copy()
            if j < nc:
                clusters = _eigenvalue_clusters(np.linalg.eigvals(h_block))
                rest = np.linalg.eigvals(trailing)
                ok = all(
                    any(
                        abs(mu - mean) <= max(3.0 * radius, 1e-3 * (1.0 + abs(mean)))
                        for mean, radius in clusters
                    )
                    for mu in rest
                )
                if not ok:
                    continue
            stage = (j, h_block, trailing, q_full, stage_leak)
            break
        if stage is None:
            raise StructureError(
                "no consistent Krylov breakpoint found; rerun with a new seed"
            )
        j, h_block, trailing, q_full, stage_leak = stage
        leak += stage_leak
        p = minpoly_coefficients(h_block, krylov_triangular(h_block))
        polys.append(p)
        blocks.append(h_block)
        degrees.append(j)
        if len(degrees) >= 2 and degrees[-1] > degrees[-2]:
            raise StructureError(
                "minimal-polynomial degrees increased along the chain; "
                "rerun with a new seed"
            )
        u_total[:, offset:] = u_total[:, offset:] @ q_full
        offset += j
        work = trailing
    if sum(degrees) != n:
        raise JordanFormError("minimal-polynomial degrees do not sum to the dimension")
    if leak > 1e-10 * max(norm_a, 1.0):
        warnings.warn(
            f"deflation leakage {leak:.2e} exceeds 1e-10 * ||a||_F", NumericalWarning
        )
    return MinimalPolynomialChain(
        polys=tuple(polys),
        hessenberg_blocks=tuple(blocks),
        transform=u_total,
        degrees=tuple(degrees),
    )
