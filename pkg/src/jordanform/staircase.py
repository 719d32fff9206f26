"""Unitary-staircase eigentriplets and their Gauss-Newton refinement.

A staircase eigentriplet ``(lambda, Y, S)`` of a matrix ``A`` satisfies
``A Y = Y (lambda I + S)`` where ``S`` is nilpotent with nonzero entries
only in the super-diagonal block strips sized by the Weyr characteristic.
The triplet is pinned down by auxiliary-vector constraints, computed
column by column from near-null vectors of a bordered system, and then
refined to a least-squares solution of the full quadratic system by
Gauss-Newton iteration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, JordanFormError, RankDeficientError, StructureError
from .linalg import (
    EPS,
    NumericalWarning,
    as_complex_matrix,
    householder_qr,
    inverse_iteration_null_vector,
    qr_delete_row,
    qr_insert_row,
    qr_least_squares,
    reorder_schur,
    schur_form,
    second_singular_estimate,
)
from .partitions import check_partition, phi_index_set


@dataclass(frozen=True)
class AuxiliaryVectors:
    """Random unit vectors pinning the staircase triplet.

    ``b`` constrains the within-block rotations (index set Phi), ``c``
    normalizes the columns of ``Y``; both are n-by-m with unit columns and
    reproducible from ``seed``.
    """

    b: np.ndarray
    c: np.ndarray
    seed: Optional[int]


def auxiliary_vectors(n: int, m: int, seed=0) -> AuxiliaryVectors:
    """Draw seeded complex-normal unit auxiliary vectors."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    b = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    c = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    b /= np.linalg.norm(b, axis=0)
    c /= np.linalg.norm(c, axis=0)
    return AuxiliaryVectors(b=b, c=c, seed=seed if isinstance(seed, int) else None)


@dataclass(frozen=True)
class StaircaseEigentriplet:
    """Eigentriplet ``(lambda, y, s)`` with Weyr block metadata."""

    lam: complex
    y: np.ndarray
    s: np.ndarray
    weyr: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return sum(self.weyr)


@dataclass
class TripletDiagnostics:
    residual: float
    staircase_cond: float
    cluster_cond: Optional[float]
    iterations: int
    step_norms: list[float] = field(default_factory=list)
    converged: bool = False
    reorth_passes: int = 0


class _SystemLayout:
    """Index bookkeeping for the least-squares system of one triplet."""

    def __init__(self, n: int, weyr: Sequence[int]):
        self.n = n
        self.weyr = check_partition(weyr, "weyr")
        self.m = sum(self.weyr)
        self.k = len(self.weyr)
        mu = [0]
        for w in self.weyr:
            mu.append(mu[-1] + w)
        self.mu = tuple(mu)
        # S-pattern entries in column-major order over the staircase strips
        entries = []
        for col in range(self.m):
            block = next(l for l in range(1, self.k + 1) if mu[l - 1] <= col < mu[l])
            for row in range(mu[block - 1]):
                entries.append((row, col))
        self.entries = tuple(entries)
        self.phi = phi_index_set(self.weyr)
        self.eta = self.n * self.m + self.m * (self.m + 1) // 2 + len(self.phi.pairs)
        self.zeta = 1 + self.n * self.m + len(self.entries)

    def column_top(self, col: int) -> int:
        """Number of allowed S rows above a column (its block's start)."""
        block = next(l for l in range(1, self.k + 1) if self.mu[l - 1] <= col < self.mu[l])
        return self.mu[block - 1]

    def mask(self) -> np.ndarray:
        m = np.zeros((self.m, self.m), dtype=bool)
        for r, c in self.entries:
            m[r, c] = True
        return m

    def pack(self, lam: complex, y: np.ndarray, s: np.ndarray) -> np.ndarray:
        x = np.empty(self.zeta, dtype=np.complex128)
        x[0] = lam
        x[1 : 1 + self.n * self.m] = y.reshape(-1, order="F")
        x[1 + self.n * self.m :] = [s[r, c] for r, c in self.entries]
        return x

    def unpack(self, x: np.ndarray):
        lam = complex(x[0])
        y = x[1 : 1 + self.n * self.m].reshape((self.n, self.m), order="F")
        s = np.zeros((self.m, self.m), dtype=np.complex128)
        for idx, (r, c) in enumerate(self.entries):
            s[r, c] = x[1 + self.n * self.m + idx]
        return lam, y, s


def staircase_mask(weyr: Sequence[int]) -> np.ndarray:
    """Boolean mask of the nilpotent staircase pattern for a Weyr
    characteristic."""
    w = check_partition(weyr, "weyr")
    return _SystemLayout(sum(w), w).mask()


def _project_staircase(s: np.ndarray, weyr: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(s)
    mask = staircase_mask(weyr)
    out[mask] = s[mask]
    return out


def initial_eigentriplet(
    a,
    lambda0: complex,
    weyr: Sequence[int],
    aux: AuxiliaryVectors,
    isolation_factor: float = 10.0,
) -> StaircaseEigentriplet:
    """Initial staircase eigentriplet from successive near-null vectors.

    Columns of ``Y`` (and the matching ``S`` column strips) are extracted
    one at a time from the kernel of a bordered matrix stacking the
    relevant ``b`` rows, ``a - lambda0 I`` with the already-computed block
    columns, and orthogonality rows against previous columns.  Within a
    block, consecutive bordered matrices differ by one deleted ``b`` row
    and one appended ``y^H`` row, so their QR factors are updated in
    O(size^2) instead of refactored.

    Raises ``StructureError`` when the near-null vector is not isolated
    (second singular estimate within ``isolation_factor`` of the
    smallest), which signals a wrong Weyr characteristic or a bad
    ``lambda0``.  Pass ``isolation_factor=0`` to disable the check.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise JordanFormError("matrix must be square")
    w = check_partition(weyr, "weyr")
    m = sum(w)
    k = len(w)
    if m > n:
        raise StructureError(f"multiplicity {m} exceeds dimension {n}")
    if aux.b.shape != (n, m):
        raise JordanFormError(f"aux.b must be {n}x{m}, got {aux.b.shape}")
    mu = [0]
    for x in w:
        mu.append(mu[-1] + x)
    rng = np.random.default_rng(aux.seed if aux.seed is not None else 0)
    e = a - lambda0 * np.eye(n)
    y = np.zeros((n, m), dtype=np.complex128)
    s = np.zeros((m, m), dtype=np.complex128)
    for i in range(k):
        width = w[i]
        ncols = n + mu[i]
        # bordered matrix G_{i,1}: b rows for the rest of the block, then
        # [a - lambda I | -previous column blocks], then orthogonality rows
        top = np.zeros((width - 1, ncols), dtype=np.complex128)
        top[:, :n] = aux.b[:, mu[i] + 1 : mu[i + 1]].conj().T
        mid = np.hstack([e, -y[:, : mu[i]]])
        bot = np.zeros((mu[i], ncols), dtype=np.complex128)
        bot[:, :n] = y[:, : mu[i]].conj().T
        g = np.vstack([top, mid, bot])
        fac = householder_qr(g, economic=False)
        for j in range(width):
            col = mu[i] + j
            r_sq = fac.r[:ncols, :ncols]
            null = inverse_iteration_null_vector(r_sq, seed=rng)
            if isolation_factor and isolation_factor > 0:
                sigma2 = second_singular_estimate(r_sq, null.z, seed=rng)
                if sigma2 < isolation_factor * null.sigma_est:
                    raise StructureError(
                        f"structure mismatch at step ({i + 1},{j + 1}): "
                        f"near-null vector not isolated "
                        f"(sigma {null.sigma_est:.2e} vs next {sigma2:.2e})"
                    )
            z = null.z
            nu = np.linalg.norm(z[:n])
            if nu < 1e-8:
                raise StructureError(
                    f"structure mismatch at step ({i + 1},{j + 1}): "
                    "null vector has no matrix-column component"
                )
            z = z / nu
            y[:, col] = z[:n]
            s[: mu[i], col] = z[n:]
            if j + 1 < width:
                fac = qr_delete_row(fac, 0)
                row = np.zeros(ncols, dtype=np.complex128)
                row[:n] = np.conj(y[:, col])
                fac = qr_insert_row(fac, row, fac.q.shape[0])
    return StaircaseEigentriplet(lam=complex(lambda0), y=y, s=s, weyr=w)


def assemble_f(a, triplet: StaircaseEigentriplet, aux: AuxiliaryVectors) -> np.ndarray:
    """Residual vector of the staircase least-squares system.

    Stacks the columns of ``(a - lambda I) Y - Y S``, the normalization
    triangle ``c_j^H y_i - delta_ij`` (j <= i), and the Phi constraints
    ``b_j^H y_i``, in that fixed order.
    """
    a = as_complex_matrix(a)
    lay = _SystemLayout(a.shape[0], triplet.weyr)
    lam, y, s = triplet.lam, triplet.y, triplet.s
    resid = (a - lam * np.eye(lay.n)) @ y - y @ s
    parts = [resid.reshape(-1, order="F")]
    tri = []
    for i in range(1, lay.m + 1):
        for j in range(1, i + 1):
            v = np.conj(aux.c[:, j - 1]) @ y[:, i - 1] - (1.0 if i == j else 0.0)
            tri.append(v)
    parts.append(np.array(tri, dtype=np.complex128))
    phi_vals = [np.conj(aux.b[:, j - 1]) @ y[:, i - 1] for (i, j) in lay.phi.pairs]
    parts.append(np.array(phi_vals, dtype=np.complex128))
    f = np.concatenate(parts)
    assert f.shape[0] == lay.eta
    return f


def assemble_jacobian(a, triplet: StaircaseEigentriplet, aux: AuxiliaryVectors) -> np.ndarray:
    """Jacobian of :func:`assemble_f` in the unknown ordering
    ``(lambda, y_1, ..., y_m, s)`` with S entries column-major over the
    staircase pattern."""
    a = as_complex_matrix(a)
    lay = _SystemLayout(a.shape[0], triplet.weyr)
    n, m = lay.n, lay.m
    lam, y, s = triplet.lam, triplet.y, triplet.s
    e = a - lam * np.eye(n)
    jac = np.zeros((lay.eta, lay.zeta), dtype=np.complex128)
    for r in range(m):
        rows = slice(r * n, (r + 1) * n)
        jac[rows, 0] = -y[:, r]
        jac[rows, 1 + r * n : 1 + (r + 1) * n] = e
        for i in range(lay.column_top(r)):
            jac[rows, 1 + i * n : 1 + (i + 1) * n] -= s[i, r] * np.eye(n)
    for idx, (sr, sc) in enumerate(lay.entries):
        rows = slice(sc * n, (sc + 1) * n)
        jac[rows, 1 + n * m + idx] = -y[:, sr]
    row = n * m
    for i in range(1, m + 1):
        for j in range(1, i + 1):
            jac[row, 1 + (i - 1) * n : 1 + i * n] = np.conj(aux.c[:, j - 1])
            row += 1
    for (i, j) in lay.phi.pairs:
        jac[row, 1 + (i - 1) * n : 1 + i * n] = np.conj(aux.b[:, j - 1])
        row += 1
    return jac


def _smallest_singular(mat: np.ndarray) -> float:
    if mat.shape[1] <= 500:
        sv = sla.svdvals(mat)
        return float(sv[-1])
    r = np.triu(np.linalg.qr(mat, mode="r"))
    return inverse_iteration_null_vector(r, seed=5, max_iters=12).sigma_est


def _gauss_newton_pass(a, lam, y, s, lay, b_work, c_work, rho, max_iters, step_norms):
    """One refinement pass of full Gauss-Newton steps.

    The iteration is not a descent method: with an ill-conditioned
    Jacobian the early steps can overshoot before snapping into the
    quadratic basin, so the best iterate (by ``||f||``) is remembered and
    transient growth is tolerated.  The pass ends when the step norm
    drops below ``rho * max(1, |lambda|)`` or when ``||f||`` stagnates at
    its floor (the least-squares residual of the nearest structured
    matrix).  Step norms still growing after the transient window signal
    a wrong structure.
    """
    aux_work = AuxiliaryVectors(b=b_work, c=c_work, seed=None)

    def f_of(x):
        l2, y2, s2 = lay.unpack(x)
        return assemble_f(a, StaircaseEigentriplet(lam=l2, y=y2, s=s2, weyr=lay.weyr), aux_work)

    x = lay.pack(lam, y, s)
    f = f_of(x)
    # the starting point is excluded from best-iterate tracking: the
    # initializer satisfies its own bordered system almost exactly, so its
    # ||f|| can undercut early iterates without being near the solution
    best_fn, best_x = np.inf, x.copy()
    best_history = [best_fn]
    iters = 0
    converged = False
    increases = 0
    prev_sn = np.inf
    for _ in range(max_iters):
        lam, y, s = lay.unpack(x)
        trip = StaircaseEigentriplet(lam=lam, y=y, s=s, weyr=lay.weyr)
        jac = assemble_jacobian(a, trip, aux_work)
        try:
            step = qr_least_squares(jac, f)
        except RankDeficientError as exc:
            raise ConvergenceError(
                "rank-deficient Jacobian in eigentriplet refinement",
                iterations=iters,
                kappa=np.inf,
            ) from exc
        x = x - step
        f = f_of(x)
        fn = float(np.linalg.norm(f))
        if not np.isfinite(fn):
            raise ConvergenceError(
                "no convergence - iteration produced non-finite values",
                iterations=iters,
            )
        iters += 1
        sn = float(np.linalg.norm(step))
        step_norms.append(sn)
        if fn < best_fn:
            best_fn, best_x = fn, x.copy()
        best_history.append(best_fn)
        if sn < rho * max(1.0, abs(complex(x[0]))):
            converged = True
            break
        # floor stagnation: no real progress for three iterations while
        # sitting at the best value reached
        if (
            iters >= 3
            and fn <= 1.5 * best_fn
            and best_history[-4] <= best_fn * 1.10
        ):
            x = best_x
            converged = True
            break
        if sn > prev_sn:
            increases += 1
            if increases >= 3 and iters > 6 and fn > 1e4 * best_fn:
                raise ConvergenceError(
                    "no convergence - structure likely wrong", iterations=iters
                )
        else:
            increases = 0
        prev_sn = sn
    if not converged:
        raise ConvergenceError(
            "no convergence - structure likely wrong (max_iters exceeded)",
            iterations=iters,
        )
    lam, y, s = lay.unpack(x)
    return lam, y, s, iters, float(np.linalg.norm(f_of(x)))


def refine_eigentriplet(
    a,
    triplet0: StaircaseEigentriplet,
    aux: AuxiliaryVectors,
    rho: float = 1e-8,
    max_iters: int = 30,
):
    """Gauss-Newton refinement to a numerical unitary-staircase
    eigentriplet.

    Runs the Gauss-Newton iteration with the ``c`` vectors set to the
    current basis columns, stops when the step norm drops below
    ``rho * max(1, |lambda|)``, then reorthogonalizes ``Y`` by economic QR
    and resets ``S`` to the staircase part of ``U^H a U - lambda I``.  If
    the QR factor strays from the identity by more than 1e-8 the whole
    refinement is rerun once with the auxiliary vectors replaced by the
    fresh orthonormal columns; in the spirit of "twice is enough" a third
    pass is never taken (a warning is issued instead).

    Returns the refined triplet together with :class:`TripletDiagnostics`.
    """
    a = as_complex_matrix(a)
    lay = _SystemLayout(a.shape[0], triplet0.weyr)
    lam, y, s = triplet0.lam, triplet0.y.copy(), _project_staircase(triplet0.s, lay.weyr)
    b_work = aux.b
    c_work = triplet0.y.copy()
    step_norms: list[float] = []
    total_iters = 0
    reorth_passes = 0
    for pass_idx in range(2):
        lam, y, s, iters, f_floor = _gauss_newton_pass(
            a, lam, y, s, lay, b_work, c_work, rho, max_iters, step_norms
        )
        total_iters += iters
        fac = householder_qr(y, economic=True)
        u, r = fac.q, fac.r
        s = _project_staircase(u.conj().T @ a @ u - lam * np.eye(lay.m), lay.weyr)
        y = u
        reorth_passes = pass_idx + 1
        r_defect = np.linalg.norm(r - np.eye(lay.m))
        # a defect at the scale of the least-squares floor is inherent to an
        # approximate structure, not a sign that more passes would help
        if r_defect <= max(1e-8, 2.0 * f_floor):
            break
        if pass_idx == 0:
            b_work = u.copy()
            c_work = u.copy()
        elif r_defect > max(1e-6, 10.0 * f_floor):
            warnings.warn(
                f"reorthogonalization defect {r_defect:.2e} persists after two passes",
                NumericalWarning,
            )
    trip = StaircaseEigentriplet(lam=lam, y=y, s=s, weyr=lay.weyr)
    res = residual(a, trip)
    aux_final = AuxiliaryVectors(b=b_work, c=y, seed=aux.seed)
    smin = _smallest_singular(assemble_jacobian(a, trip, aux_final))
    kappa = 2.0 / smin if smin > 0 else np.inf
    diag = TripletDiagnostics(
        residual=res,
        staircase_cond=kappa,
        cluster_cond=None,
        iterations=total_iters,
        step_norms=step_norms,
        converged=True,
        reorth_passes=reorth_passes,
    )
    return trip, diag


def residual(a, triplet: StaircaseEigentriplet) -> float:
    """Relative residual ``||a Y - Y (lambda I + S)||_F / ||a||_F``, the
    distance to the nearest matrix carrying the triplet exactly."""
    a = as_complex_matrix(a)
    na = np.linalg.norm(a)
    if na == 0.0:
        raise JordanFormError("residual undefined for the zero matrix")
    m = triplet.multiplicity
    r = a @ triplet.y - triplet.y @ (triplet.lam * np.eye(m) + triplet.s)
    return float(np.linalg.norm(r) / na)


def staircase_condition_number(a, triplet: StaircaseEigentriplet, aux: AuxiliaryVectors) -> float:
    """Condition number ``2 / sigma_min(J)`` of the eigentriplet system,
    evaluated with the ``c`` vectors equal to the (unitary) basis
    columns."""
    a = as_complex_matrix(a)
    if np.linalg.norm(triplet.y.conj().T @ triplet.y - np.eye(triplet.multiplicity)) > 1e-6:
        raise JordanFormError("staircase condition number requires a unitary triplet")
    aux_eval = AuxiliaryVectors(b=aux.b, c=triplet.y, seed=aux.seed)
    smin = _smallest_singular(assemble_jacobian(a, triplet, aux_eval))
    if smin <= EPS:
        return float(np.inf)
    return 2.0 / smin


def cluster_condition_number(a, lam: complex, y: np.ndarray) -> float:
    """Cluster condition number ``||(X^H Y)^{-1}||_2`` with ``X`` an
    orthonormal basis of the corresponding left invariant subspace
    (trailing Schur vectors after reordering the cluster)."""
    a = as_complex_matrix(a)
    n = a.shape[0]
    m = y.shape[1]
    q, t, eigs = schur_form(a)
    order = np.argsort(np.abs(eigs - lam))
    selected = np.zeros(n, dtype=bool)
    selected[order[:m]] = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalWarning)
        q2, _ = reorder_schur(q, t, selected)
    x = q2[:, n - m :]
    g = x.conj().T @ y
    sv = sla.svdvals(g)
    if sv[-1] <= EPS * max(1.0, sv[0]):
        return float(np.inf)
    return float(1.0 / sv[-1])


def nearest_matrix_with_triplet(a, triplet: StaircaseEigentriplet) -> np.ndarray:
    """Nearest matrix having ``(lambda, Y, S)`` as an exact eigentriplet.

    With ``Z`` a unitary complement of ``Y``, the matrix
    ``Y (lambda I + S) Y^H + Y Y^H a Z Z^H + Z Z^H a Z Z^H`` differs from
    ``a`` by exactly the triplet residual in Frobenius norm; that identity
    is verified before returning.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    m = triplet.multiplicity
    y = triplet.y
    if np.linalg.norm(y.conj().T @ y - np.eye(m)) > 1e-8:
        raise JordanFormError("nearest-matrix construction requires a unitary triplet")
    z = householder_qr(y, economic=False).q[:, m:]
    core = y @ (triplet.lam * np.eye(m) + triplet.s) @ y.conj().T
    az = a @ z
    ahat = core + (y @ (y.conj().T @ az) + z @ (z.conj().T @ az)) @ z.conj().T
    dist = np.linalg.norm(a - ahat)
    res = np.linalg.norm(a @ y - y @ (triplet.lam * np.eye(m) + triplet.s))
    if abs(dist - res) > 1e-12 * max(np.linalg.norm(a), 1.0):
        raise JordanFormError(
            f"nearest-matrix identity violated: |A-Ahat|={dist:.3e} vs residual {res:.3e}"
        )
    return ahat
