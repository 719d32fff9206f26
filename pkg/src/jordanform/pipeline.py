"""The two-stage algorithm: structure identification, then staircase or
Jordan decomposition.

Stage I computes a Schur form, deflates well-conditioned simple
eigenvalues, and identifies the Jordan structure of the remaining block
from the chain of minimal polynomials, whose multiple roots give both the
Segre characteristics and accurate initial eigenvalue estimates.  Stage II
computes a refined unitary-staircase eigentriplet per distinct multiple
eigenvalue and assembles the global decomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, JordanFormError, StructureError
from .linalg import (
    EPS,
    NumericalWarning,
    as_complex_matrix,
    householder_qr,
    reorder_schur,
    schur_form,
)
from .minpoly import minimal_polynomial_chain
from .partitions import (
    JordanStructure,
    bundle_codimension,
    check_partition,
    conjugate_partition,
    weyr_from_nullities,
)
from .polyroots import multiplicity_structure, refine_roots_fixed_multiplicities
from .staircase import (
    AuxiliaryVectors,
    StaircaseEigentriplet,
    TripletDiagnostics,
    auxiliary_vectors,
    cluster_condition_number,
    initial_eigentriplet,
    nearest_matrix_with_triplet,
    refine_eigentriplet,
    residual as triplet_residual,
)


@dataclass(frozen=True)
class Config:
    """Control parameters of the pipeline.

    ``delta``: deflation threshold on the simple-eigenvalue condition
    number; ``gamma``: gap-ratio threshold for numerical rank decisions;
    ``tau``: residual tolerance of the multiple-root finder; ``rho``:
    stopping tolerance of the eigentriplet refinement.
    """

    delta: float = 1000.0
    gamma: float = 1e-4
    tau: float = 1e-8
    rho: float = 1e-8
    seed: int = 0
    max_iters: int = 30

    def __post_init__(self):
        for name in ("delta", "gamma", "tau", "rho"):
            if getattr(self, name) <= 0:
                raise JordanFormError(f"config parameter {name} must be positive")


@dataclass
class StageOneResult:
    """Identified structure of the non-deflated block plus the deflated
    simple spectrum and the Schur data needed for assembly."""

    structure: JordanStructure
    initial_eigenvalues: tuple[complex, ...]
    simple_eigenvalues: tuple[complex, ...]
    schur_q: np.ndarray
    schur_t: np.ndarray
    block_size: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class JcfReport:
    """Full output of the pipeline."""

    structure: JordanStructure
    triplets: list[StaircaseEigentriplet]
    diagnostics: list[TripletDiagnostics]
    simple_eigenvalues: tuple[complex, ...]
    staircase: Optional[tuple[np.ndarray, np.ndarray]]
    jordan: Optional[tuple[np.ndarray, np.ndarray]]
    global_residual: Optional[float]
    bundle_codim: int
    warnings: list[str]
    hard_failure: bool = False
    seed_used: int = 0


def _eigen_condition_numbers(t: np.ndarray) -> np.ndarray:
    """Reciprocal-overlap condition numbers 1/|y^H x| of each eigenvalue
    of a triangular matrix, with protected solves."""
    n = t.shape[0]
    scale = np.linalg.norm(t)
    floor = max(EPS * scale, 1e-300)
    conds = np.empty(n)
    for k in range(n):
        lam = t[k, k]
        x = np.zeros(n, dtype=np.complex128)
        x[k] = 1.0
        if k > 0:
            m = t[:k, :k] - lam * np.eye(k)
            d = np.diag(m).copy()
            small = np.abs(d) < floor
            if np.any(small):
                m = m.copy()
                d[small] = floor
                m[np.diag_indices(k)] = d
            x[:k] = sla.solve_triangular(m, -t[:k, k], lower=False)
        y = np.zeros(n, dtype=np.complex128)
        y[k] = 1.0
        if k < n - 1:
            m = (t[k + 1 :, k + 1 :] - lam * np.eye(n - k - 1)).conj().T
            d = np.diag(m).copy()
            small = np.abs(d) < floor
            if np.any(small):
                m = m.copy()
                d[small] = floor
                m[np.diag_indices(n - k - 1)] = d
            y[k + 1 :] = sla.solve_triangular(m, -t[k, k + 1 :].conj(), lower=True)
        s = abs(np.vdot(y, x)) / (np.linalg.norm(x) * np.linalg.norm(y))
        conds[k] = 1.0 / max(s, 1e-300)
    return conds


def _match_roots_across_chain(facts):
    """Assemble Segre characteristics from the multiplicity structures of
    the minimal-polynomial chain.

    Roots of each later polynomial are matched to the nearest root of the
    previous one within ``1e-3 (1 + |lambda|)``; the exponent of a factor
    in the i-th polynomial is the i-th Segre entry of its eigenvalue.
    Unmatched or non-monotone exponents mean the chain is inconsistent.
    """
    clusters = [[(r, m)] for r, m in zip(facts[0].roots, facts[0].multiplicities)]
    for depth, fact in enumerate(facts[1:], start=2):
        taken: set[int] = set()
        for r, m in zip(fact.roots, fact.multiplicities):
            best = None
            for idx, hist in enumerate(clusters):
                # a root may only continue a cluster present in every
                # earlier polynomial (divisibility)
                if idx in taken or len(hist) != depth - 1:
                    continue
                d = abs(r - hist[-1][0])
                if d <= 1e-3 * (1.0 + abs(r)) and (best is None or d < best[0]):
                    best = (d, idx)
            if best is None:
                raise StructureError(
                    "structure identification failed - root "
                    f"{r:.6g} of a later minimal polynomial matches no earlier root; "
                    "rerun with a new seed"
                )
            idx = best[1]
            if m > clusters[idx][-1][1]:
                raise StructureError(
                    "structure identification failed - non-monotone exponents; "
                    "rerun with a new seed"
                )
            clusters[idx].append((r, m))
            taken.add(idx)
    entries = []
    initials = []
    for hist in clusters:
        segre = tuple(m for _, m in hist)
        total = sum(m for _, m in hist)
        lam = sum(r * m for r, m in hist) / total
        entries.append((complex(lam), segre))
        initials.append(complex(lam))
    return entries, initials


def identify_structure(a, cfg: Config = Config()) -> StageOneResult:
    """Stage I: Schur form, deflation of well-conditioned simple
    eigenvalues, and Jordan-structure identification of the rest.

    The minimal-polynomial chain of the non-deflated block is factored by
    the multiple-root finder; exponents across the chain give tentative
    Segre characteristics and multiplicity-weighted eigenvalue estimates.
    Each multiple eigenvalue's Weyr characteristic is then cross-checked
    against the rank oracle (nullities of powers at the refined estimate),
    which is decisive when the Krylov-based chain was ambiguous; a
    disagreement is recorded as a warning.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise JordanFormError("matrix must be square")
    warn: list[str] = []
    q, t, eigs = schur_form(a)
    conds = _eigen_condition_numbers(t)
    # deflation requires the eigenvalue to be well conditioned AND isolated:
    # a nondefective copy inside a multiple cluster can have a moderate
    # condition number but must stay with its cluster, whose computed
    # members scatter on the pejorative radius (a few percent)
    isolated = np.array(
        [
            all(
                abs(eigs[k] - eigs[l]) > 0.05 * (1.0 + abs(eigs[k]))
                for l in range(len(eigs))
                if l != k
            )
            for k in range(len(eigs))
        ]
    )
    deflate = (conds < cfg.delta) & isolated
    nb = int(np.sum(~deflate))
    if nb > 0 and nb < n:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NumericalWarning)
            q, t = reorder_schur(q, t, deflate)
    simple = tuple(np.diag(t)[nb:]) if nb < n else ()
    if nb == 0:
        structure = JordanStructure(entries=())
        return StageOneResult(
            structure=structure,
            initial_eigenvalues=(),
            simple_eigenvalues=simple,
            schur_q=q,
            schur_t=t,
            block_size=0,
            warnings=warn,
        )
    b = t[:nb, :nb]
    chain = minimal_polynomial_chain(b, gamma=cfg.gamma, seed=cfg.seed)
    facts = []
    chain_ok = True
    for i, p in enumerate(chain.polys):
        try:
            fact = multiplicity_structure(p, cfg.tau)
        except StructureError as exc:
            if i == 0:
                raise
            warn.append(f"multiplicity structure of chain polynomial {i + 1} failed: {exc}")
            chain_ok = False
            break
        try:
            fact = refine_roots_fixed_multiplicities(p, fact)
        except StructureError:
            pass  # keep the unrefined estimate
        facts.append(fact)
    chain_entries, chain_initials = None, None
    if chain_ok:
        try:
            chain_entries, chain_initials = _match_roots_across_chain(facts)
            if sum(sum(seg) for _, seg in chain_entries) != nb:
                chain_entries = None
                warn.append(
                    "chain exponents do not sum to the block size; "
                    "falling back to the rank oracle"
                )
        except StructureError as exc:
            chain_entries, chain_initials = None, None
            warn.append(f"chain exponent matching failed ({exc}); trying the rank oracle")
    # The rank oracle (nullities of powers at the refined root estimates)
    # settles Krylov rank calls that were numerically marginal.  The first
    # minimal polynomial carries every distinct eigenvalue of the block,
    # and its pejorative roots are accurate probe points.
    oracle_entries = []
    for lam0, m1 in zip(facts[0].roots, facts[0].multiplicities):
        try:
            weyr_oracle = weyr_from_nullities(b, lam0, tol=1e-8)
        except JordanFormError:
            oracle_entries = None
            break
        if not weyr_oracle or weyr_oracle[0] < 1:
            oracle_entries = None
            break
        oracle_entries.append((complex(lam0), conjugate_partition(weyr_oracle)))
    if oracle_entries is not None and sum(sum(s) for _, s in oracle_entries) != nb:
        oracle_entries = None
    if chain_entries is not None and oracle_entries is not None:
        if all(s == so for (_, s), (_, so) in zip(chain_entries, oracle_entries)):
            entries, initials = chain_entries, chain_initials
        else:
            warn.append(
                "rank oracle corrected the Segre characteristics: "
                f"{[s for _, s in chain_entries]} -> {[s for _, s in oracle_entries]}"
            )
            entries = [
                (lam, so) for (lam, _), (_, so) in zip(chain_entries, oracle_entries)
            ]
            initials = chain_initials
    elif chain_entries is not None:
        entries, initials = chain_entries, chain_initials
    elif oracle_entries is not None:
        entries = oracle_entries
        initials = [lam for lam, _ in oracle_entries]
    else:
        raise StructureError(
            "structure identification failed - rerun with a new seed"
        )
    # a deflated eigenvalue coinciding with an identified multiple one is a
    # 1x1 Jordan block of that eigenvalue (for example the simple block of
    # a {k, 1} structure); fold it back into the Segre characteristic
    merged_simple = []
    entries = list(entries)
    initials = list(initials)
    for lam_s in simple:
        hit = None
        for idx, (lam_m, segre) in enumerate(entries):
            if abs(lam_s - lam_m) <= 1e-3 * (1.0 + abs(lam_m)):
                hit = idx
                break
        if hit is None:
            merged_simple.append(lam_s)
        else:
            lam_m, segre = entries[hit]
            entries[hit] = (lam_m, tuple(sorted(segre + (1,), reverse=True)))
            warn.append(
                f"deflated eigenvalue {lam_s:.8g} merged into the multiple "
                f"eigenvalue {lam_m:.8g} as a 1x1 block"
            )
    structure = JordanStructure(entries=tuple(entries))
    return StageOneResult(
        structure=structure,
        initial_eigenvalues=tuple(initials),
        simple_eigenvalues=tuple(merged_simple),
        schur_q=q,
        schur_t=t,
        block_size=nb,
        warnings=warn,
    )


def _refine_one(a, lam0, weyr, cfg, seed_offset, warn):
    """Initial triplet plus refinement, with one reseeded retry."""
    n = a.shape[0]
    m = sum(weyr)
    last_exc = None
    for attempt in range(2):
        aux = auxiliary_vectors(n, m, seed=cfg.seed + 1009 * (seed_offset + 1) + attempt)
        try:
            trip = initial_eigentriplet(a, lam0, weyr, aux)
            return refine_eigentriplet(a, trip, aux, rho=cfg.rho, max_iters=cfg.max_iters), aux
        except (ConvergenceError, StructureError) as exc:
            last_exc = exc
            if attempt == 0:
                warn.append(
                    f"refinement retry at eigenvalue {lam0:.6g} after: {exc}"
                )
    raise last_exc


def staircase_decomposition(a, structure: JordanStructure, initials, cfg: Config = Config()):
    """Assemble a global unitary-staircase decomposition ``a = U T U^H``.

    Multiple eigenvalues are processed in sequence: each refined triplet
    contributes a diagonal block ``lambda I + S`` and its unitary
    complement compresses the working matrix for the next one.  The
    remaining (simple) spectrum ends up as the trailing triangular block.
    Returns ``(u, t, report)``.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    warn: list[str] = []
    blocks = []  # (cols in ambient coords, lam, s, diag)
    p_map = np.eye(n, dtype=np.complex128)
    work = a.copy()
    triplets: list[StaircaseEigentriplet] = []
    diagnostics: list[TripletDiagnostics] = []
    for idx, ((lam, segre), lam0) in enumerate(zip(structure.entries, initials)):
        weyr = conjugate_partition(segre)
        m = sum(weyr)
        try:
            (trip, diag), _aux = _refine_one(work, lam0, weyr, cfg, idx, warn)
        except (ConvergenceError, StructureError) as exc:
            warn.append(f"eigenvalue {lam0:.6g} failed to refine: {exc}")
            continue
        triplets.append(trip)
        diagnostics.append(diag)
        blocks.append((p_map @ trip.y, trip.lam, trip.s))
        z = householder_qr(trip.y, economic=False).q[:, m:]
        work = z.conj().T @ work @ z
        p_map = p_map @ z
    if work.shape[0] > 0:
        qs, ts, _ = schur_form(work)
        simple_cols = p_map @ qs
    else:
        ts = np.zeros((0, 0), dtype=np.complex128)
        simple_cols = np.zeros((n, 0), dtype=np.complex128)
    cols = [c for c, _, _ in blocks] + ([simple_cols] if simple_cols.shape[1] else [])
    u = np.hstack(cols) if cols else np.zeros((n, 0), dtype=np.complex128)
    t = u.conj().T @ a @ u
    # enforce the staircase sparsity exactly: zeros below the block
    # diagonal, lambda I + S on it
    off = 0
    for _, lam, s in blocks:
        m = s.shape[0]
        t[off : off + m, off : off + m] = lam * np.eye(m) + s
        t[off + m :, off : off + m] = 0.0
        off += m
    if ts.shape[0]:
        t[off:, off:] = ts
    na = np.linalg.norm(a)
    rho = float(np.linalg.norm(a @ u - u @ t) / na) if na > 0 else 0.0
    return u, t, {"warnings": warn, "triplets": triplets, "diagnostics": diagnostics, "residual": rho}


def staircase_to_jordan_local(lam: complex, u, s, weyr):
    """Similarity taking a staircase block ``lambda I + S`` to its Jordan
    blocks.

    Builds Jordan chains of the nilpotent staircase matrix directly: the
    kernel filtration of ``S`` is spanned by leading coordinate blocks, so
    chains are grown top-down through the full-rank super-diagonal blocks,
    completing each level with pivoted coordinate directions.  Each chain
    is scaled by its largest column so the returned transform has columns
    of norm at most one.  Returns ``(g, j_local)``.
    """
    w = check_partition(weyr, "weyr")
    m = sum(w)
    s = np.asarray(s, dtype=np.complex128).reshape(m, m)
    k = len(w)
    if s.shape != (m, m):
        raise JordanFormError("staircase block size mismatch")
    mu = [0]
    for x in w:
        mu.append(mu[-1] + x)
    norm_s = max(np.linalg.norm(s), 1.0)
    for l in range(1, k):
        blk = s[mu[l - 1] : mu[l], mu[l] : mu[l + 1]]
        sv = sla.svdvals(blk)
        if sv.size and sv[-1] <= 1e-10 * norm_s:
            raise StructureError("not a valid staircase nilpotent: rank collapse in a super-diagonal block")
    # level sets: level j holds m_j vectors of height j, positionally
    # aligned so that position p at level j is S times position p at j+1
    levels: dict[int, list[np.ndarray]] = {}
    levels[k] = [np.eye(m, dtype=np.complex128)[:, mu[k - 1] + i] for i in range(w[k - 1])]
    for j in range(k - 1, 0, -1):
        images = [s @ v for v in levels[j + 1]]
        comp = np.array([[im[mu[j - 1] + r] for im in images] for r in range(w[j - 1])])
        extra = w[j - 1] - len(images)
        new = []
        if extra > 0:
            if images:
                qm = np.linalg.qr(comp, mode="reduced")[0]
                proj = np.eye(w[j - 1]) - qm @ qm.conj().T
            else:
                proj = np.eye(w[j - 1], dtype=np.complex128)
            _, _, piv = sla.qr(proj, pivoting=True)
            for i in piv[:extra]:
                e = np.zeros(m, dtype=np.complex128)
                e[mu[j - 1] + int(i)] = 1.0
                new.append(e)
        levels[j] = images + new
    segre = conjugate_partition(w)
    g_cols = []
    j_blocks = []
    for p, height in enumerate(segre):
        chain = [levels[j][p] for j in range(1, height + 1)]
        scale = max(np.linalg.norm(c) for c in chain)
        g_cols.extend([c / scale for c in chain])
        jb = lam * np.eye(height, dtype=np.complex128) + np.diag(np.ones(height - 1), 1)
        j_blocks.append(jb)
    g = np.column_stack(g_cols)
    j_local = sla.block_diag(*j_blocks) if j_blocks else np.zeros((0, 0))
    resid = np.linalg.norm((lam * np.eye(m) + s) @ g - g @ j_local)
    if resid > 1e-10 * (1.0 + np.linalg.norm(s)) * np.linalg.norm(g):
        raise StructureError("not a valid staircase nilpotent: chain construction failed")
    return g, j_local


def _simple_eigenvectors(q, t, positions):
    """Eigenvectors of the original matrix for selected diagonal positions
    of its Schur form."""
    n = t.shape[0]
    scale = np.linalg.norm(t)
    floor = max(EPS * scale, 1e-300)
    vecs = []
    for k in positions:
        lam = t[k, k]
        x = np.zeros(n, dtype=np.complex128)
        x[k] = 1.0
        if k > 0:
            m = t[:k, :k] - lam * np.eye(k)
            d = np.diag(m).copy()
            small = np.abs(d) < floor
            if np.any(small):
                m = m.copy()
                d[small] = floor
                m[np.diag_indices(k)] = d
            x[:k] = sla.solve_triangular(m, -t[:k, k], lower=False)
        v = q @ x
        vecs.append(v / np.linalg.norm(v))
    return vecs


def jordan_decomposition(a, structure: JordanStructure, initials, cfg: Config = Config()):
    """Assemble a Jordan decomposition ``a X = X J``.

    Each multiple eigenvalue's refined triplet (computed on the full
    matrix, so its basis spans a true invariant subspace) is converted to
    Jordan chains; deflated simple eigenvalues contribute Schur-derived
    eigenvectors and 1-by-1 blocks.  Returns ``(x, j, report)``.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    warn: list[str] = []
    x_blocks = []
    j_blocks = []
    triplets: list[StaircaseEigentriplet] = []
    diagnostics: list[TripletDiagnostics] = []
    used_multiplicity = 0
    for idx, ((lam_e, segre), lam0) in enumerate(zip(structure.entries, initials)):
        weyr = conjugate_partition(segre)
        try:
            (trip, diag), _aux = _refine_one(a, lam0, weyr, cfg, idx, warn)
            g, j_local = staircase_to_jordan_local(trip.lam, trip.y, trip.s, weyr)
        except (ConvergenceError, StructureError) as exc:
            warn.append(f"eigenvalue {lam0:.6g} failed to convert: {exc}")
            continue
        triplets.append(trip)
        diagnostics.append(diag)
        x_blocks.append(trip.y @ g)
        j_blocks.append(j_local)
        used_multiplicity += sum(segre)
    q, t, eigs = schur_form(a)
    simple_positions = []
    used = np.zeros(n, dtype=bool)
    # map each structure eigenvalue to its diagonal cluster so the leftover
    # positions correspond to the simple spectrum
    for lam_e, segre in structure.entries:
        mult = sum(segre)
        order = np.argsort(np.abs(eigs - lam_e))
        picked = 0
        for kk in order:
            if picked == mult:
                break
            if not used[kk]:
                used[kk] = True
                picked += 1
    simple_positions = [kk for kk in range(n) if not used[kk]]
    simple_vals = []
    if simple_positions:
        vecs = _simple_eigenvectors(q, t, simple_positions)
        for kk, v in zip(simple_positions, vecs):
            x_blocks.append(v.reshape(-1, 1))
            j_blocks.append(np.array([[t[kk, kk]]]))
            simple_vals.append(t[kk, kk])
    x = np.hstack(x_blocks) if x_blocks else np.zeros((n, 0))
    j = sla.block_diag(*j_blocks) if j_blocks else np.zeros((0, 0))
    na = np.linalg.norm(a)
    rho = float(np.linalg.norm(a @ x - x @ j) / na) if na > 0 else 0.0
    return x, j, {
        "warnings": warn,
        "triplets": triplets,
        "diagnostics": diagnostics,
        "residual": rho,
        "simple_values": simple_vals,
    }


def numerical_jcf(a, cfg: Config = Config(), output: str = "jordan") -> JcfReport:
    """Full pipeline: identify the Jordan structure, refine eigentriplets,
    and assemble the requested decomposition.

    ``output`` is one of ``jordan``, ``staircase``, ``structure``.  A
    failed identification is retried once with a fresh seed; remaining
    failures produce a partial report flagged as hard failure.
    """
    a = as_complex_matrix(a)
    if output not in ("jordan", "staircase", "structure"):
        raise JordanFormError(f"unknown output mode {output!r}")
    warn: list[str] = []
    stage1 = None
    seed_used = cfg.seed
    for attempt in range(2):
        try:
            cfg_try = Config(
                delta=cfg.delta, gamma=cfg.gamma, tau=cfg.tau, rho=cfg.rho,
                seed=cfg.seed + attempt, max_iters=cfg.max_iters,
            )
            stage1 = identify_structure(a, cfg_try)
            seed_used = cfg_try.seed
            cfg = cfg_try
            break
        except (StructureError, ConvergenceError) as exc:
            warn.append(f"structure identification attempt {attempt + 1} failed: {exc}")
    if stage1 is None:
        return JcfReport(
            structure=JordanStructure(entries=()),
            triplets=[], diagnostics=[], simple_eigenvalues=(),
            staircase=None, jordan=None, global_residual=None,
            bundle_codim=0, warnings=warn + ["hard failure: structure unidentified"],
            hard_failure=True, seed_used=seed_used,
        )
    warn.extend(stage1.warnings)
    full_entries = list(stage1.structure.entries) + [
        (complex(lam), (1,)) for lam in stage1.simple_eigenvalues
    ]
    full_structure = JordanStructure(entries=tuple(full_entries))
    codim = full_structure.codimension() if full_entries else 0
    staircase_pair = None
    jordan_pair = None
    global_residual = None
    triplets: list[StaircaseEigentriplet] = []
    diagnostics: list[TripletDiagnostics] = []
    if output == "staircase":
        u, t, info = staircase_decomposition(a, stage1.structure, stage1.initial_eigenvalues, cfg)
        warn.extend(info["warnings"])
        staircase_pair = (u, t)
        global_residual = info["residual"]
        triplets, diagnostics = info["triplets"], info["diagnostics"]
    elif output == "jordan":
        x, j, info = jordan_decomposition(a, stage1.structure, stage1.initial_eigenvalues, cfg)
        warn.extend(info["warnings"])
        jordan_pair = (x, j)
        global_residual = info["residual"]
        triplets, diagnostics = info["triplets"], info["diagnostics"]
    hard = any(w.startswith("eigenvalue") for w in warn) and output != "structure"
    # attach cluster condition numbers for the multiple eigenvalues
    for trip, diag in zip(triplets, diagnostics):
        try:
            diag.cluster_cond = cluster_condition_number(a, trip.lam, trip.y)
        except JordanFormError:
            diag.cluster_cond = None
    return JcfReport(
        structure=full_structure,
        triplets=triplets,
        diagnostics=diagnostics,
        simple_eigenvalues=stage1.simple_eigenvalues,
        staircase=staircase_pair,
        jordan=jordan_pair,
        global_residual=global_residual,
        bundle_codim=codim,
        warnings=warn,
        hard_failure=hard,
        seed_used=seed_used,
    )
