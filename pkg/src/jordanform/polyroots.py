"""Multiple roots of perturbed polynomials.

The multiplicity structure is found first, from a square-free chain of
approximate GCDs (Sylvester-subresultant rank tests with a gap-ratio
threshold); the roots are then refined with the structure held fixed by
Gauss-Newton on the coefficient map.  Roots of a polynomial with a
preserved multiplicity structure are well conditioned even when the
polynomial is perturbed, which is what makes the two-step split pay off.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from dataclasses import dataclass
from typing import Sequence

from .errors import JordanFormError, RankDeficientError, StructureError
from .linalg import EPS, qr_least_squares, schur_form
from .minpoly import Polynomial


@dataclass(frozen=True)
class GcdResult:
    """Approximate GCD with cofactors (raw coefficient vectors scaled to
    the inputs) and the relative division residual."""

    gcd: Polynomial
    cofactors: tuple[np.ndarray, np.ndarray]
    residual: float


@dataclass(frozen=True)
class MultiplicityFactorization:
    """Roots with multiplicities and the re-expansion backward error."""

    roots: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    backward_error: float


def _as_coeffs(p) -> np.ndarray:
    if isinstance(p, Polynomial):
        return p.coeffs.copy()
    c = np.asarray(p, dtype=np.complex128).reshape(-1)
    while c.shape[0] > 1 and c[-1] == 0:
        c = c[:-1]
    if c.shape[0] == 0 or np.all(c == 0):
        raise JordanFormError("zero polynomial")
    return c


def _convolution_matrix(g: np.ndarray, shifts: int) -> np.ndarray:
    """Matrix of the map q -> g * q for q of length ``shifts``."""
    rows = g.shape[0] + shifts - 1
    m = np.zeros((rows, shifts), dtype=np.complex128)
    for c in range(shifts):
        m[c : c + g.shape[0], c] = g
    return m


def _lstsq_divide(p: np.ndarray, g: np.ndarray):
    """Least-squares polynomial division p ~ g * q; returns (q, residual)."""
    dq = p.shape[0] - g.shape[0] + 1
    if dq < 1:
        raise JordanFormError("division degree mismatch")
    m = _convolution_matrix(g, dq)
    q, _, _, _ = np.linalg.lstsq(m, p, rcond=None)
    res = float(np.linalg.norm(m @ q - p) / max(np.linalg.norm(p), 1e-300))
    return q, res


def _derivative(c: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyder(c)


def _root_scale(c: np.ndarray) -> float:
    """Geometric mean of the nonzero root magnitudes (from the lowest
    nonzero coefficient), used to balance coefficients before rank
    decisions."""
    d = c.shape[0] - 1
    if d == 0:
        return 1.0
    k = next((i for i in range(d + 1) if c[i] != 0), d)
    if k == d:
        return 1.0
    s = abs(c[k] / c[-1]) ** (1.0 / (d - k))
    return float(min(max(s, 1e-6), 1e6))


def _scale_poly(c: np.ndarray, s: float) -> np.ndarray:
    """Coefficients of the monic polynomial with roots divided by ``s``."""
    d = c.shape[0] - 1
    out = c * np.power(s, np.arange(d + 1) - d, dtype=float)
    return out / out[-1]


def _als_division(pn: np.ndarray, qn: np.ndarray, g0: np.ndarray, iters: int = 10):
    """Alternating least squares on ``pn ~ g u``, ``qn ~ g v`` with monic
    ``g``; returns the refined ``(g, relative residual)``."""
    d = g0.shape[0] - 1
    g = g0 / g0[-1]
    rhs = np.concatenate([pn, qn])
    for _ in range(iters):
        cg_p = _convolution_matrix(g, pn.shape[0] - d)
        u, _, _, _ = np.linalg.lstsq(cg_p, pn, rcond=None)
        cg_q = _convolution_matrix(g, qn.shape[0] - d)
        v, _, _, _ = np.linalg.lstsq(cg_q, qn, rcond=None)
        m = np.vstack([_convolution_matrix(u, d + 1), _convolution_matrix(v, d + 1)])
        ghat, _, _, _ = np.linalg.lstsq(m[:, :d], rhs - m[:, d], rcond=None)
        g = np.concatenate([ghat, [1.0 + 0.0j]])
    cg_p = _convolution_matrix(g, pn.shape[0] - d)
    u, _, _, _ = np.linalg.lstsq(cg_p, pn, rcond=None)
    cg_q = _convolution_matrix(g, qn.shape[0] - d)
    v, _, _, _ = np.linalg.lstsq(cg_q, qn, rcond=None)
    r = max(
        float(np.linalg.norm(cg_p @ u - pn) / np.linalg.norm(pn)),
        float(np.linalg.norm(cg_q @ v - qn) / np.linalg.norm(qn)),
    )
    return g, r


def approximate_gcd(p, q, tau: float = 1e-8) -> GcdResult:
    """Largest-degree approximate GCD certified by a refined division
    residual.

    Candidate degrees are screened by the smallest singular values of the
    Sylvester subresultant matrices; each candidate's divisor is polished
    by alternating least squares and accepted when both relative division
    residuals fall below ``0.1 sqrt(tau)``.  Coprime inputs return the
    constant 1.
    """
    pa = _as_coeffs(p)
    qa = _as_coeffs(q)
    if tau <= 0:
        raise JordanFormError("tau must be positive")
    dp, dq = pa.shape[0] - 1, qa.shape[0] - 1
    if dp == 0 or dq == 0:
        one = Polynomial(np.array([1.0 + 0.0j]))
        return GcdResult(gcd=one, cofactors=(pa, qa), residual=0.0)
    scale = max(_root_scale(pa), _root_scale(qa))
    pn = _scale_poly(pa, scale)
    qn = _scale_poly(qa, scale)
    pn = pn / np.linalg.norm(pn)
    qn = qn / np.linalg.norm(qn)
    dmax = min(dp, dq)
    accept = 0.1 * np.sqrt(tau)
    screen = max(1e-3, np.sqrt(tau))
    chosen = None
    for d in range(dmax, 0, -1):
        s = np.hstack(
            [
                _convolution_matrix(qn, dp - d + 1),
                _convolution_matrix(pn, dq - d + 1),
            ]
        )
        if sla.svdvals(s)[-1] > screen:
            continue
        _, _, vh = np.linalg.svd(s)
        null = vh[-1].conj()
        u = null[: dp - d + 1]  # cofactor direction of p
        w = -null[dp - d + 1 :]  # cofactor direction of q
        m = np.vstack([_convolution_matrix(u, d + 1), _convolution_matrix(w, d + 1)])
        g0, _, _, _ = np.linalg.lstsq(m, np.concatenate([pn, qn]), rcond=None)
        if abs(g0[-1]) < 1e-12 * np.linalg.norm(g0):
            continue
        g, r = _als_division(pn, qn, g0)
        if r <= accept:
            chosen = g
            break
    if chosen is None:
        one = Polynomial(np.array([1.0 + 0.0j]))
        return GcdResult(gcd=one, cofactors=(pa.copy(), qa.copy()), residual=0.0)
    deg = chosen.shape[0] - 1
    # undo the root scaling: gcd(t) = scale^deg * ghat(t / scale)
    g = chosen * np.power(scale, deg - np.arange(deg + 1), dtype=float)
    gcd = Polynomial(g)
    cof_p, res_p = _lstsq_divide(pa, gcd.coeffs)
    cof_q, res_q = _lstsq_divide(qa, gcd.coeffs)
    return GcdResult(gcd=gcd, cofactors=(cof_p, cof_q), residual=max(res_p, res_q))


def _simple_roots(c: np.ndarray) -> np.ndarray:
    """Roots of a (square-free) polynomial via the Schur form of its
    companion matrix."""
    d = c.shape[0] - 1
    if d == 0:
        return np.array([], dtype=np.complex128)
    monic = c / c[-1]
    comp = np.zeros((d, d), dtype=np.complex128)
    if d > 1:
        comp[1:, :-1] = np.eye(d - 1)
    comp[:, -1] = -monic[:-1]
    _, _, eigs = schur_form(comp)
    return eigs


def expand_from_roots(roots: Sequence[complex], multiplicities: Sequence[int]) -> np.ndarray:
    """Monic coefficient vector of prod (t - z_i)^{m_i} by convolution."""
    c = np.array([1.0 + 0.0j])
    for z, m in zip(roots, multiplicities):
        for _ in range(int(m)):
            c = np.convolve(c, np.array([-z, 1.0 + 0.0j]))
    return c


def _merge_close_roots(pairs, merge_tol: float = 1e-4):
    """Merge roots closer than the distinctness tolerance, summing
    multiplicities (the more degenerate reading of a tie)."""
    merged: list[tuple[complex, int]] = []
    for z, m in pairs:
        hit = None
        for i, (zm, mm) in enumerate(merged):
            if abs(z - zm) <= merge_tol * (1.0 + abs(z)):
                hit = i
                break
        if hit is None:
            merged.append((z, m))
        else:
            zm, mm = merged[hit]
            merged[hit] = ((zm * mm + z * m) / (mm + m), mm + m)
    return merged


def multiplicity_structure(p, tau: float = 1e-8) -> MultiplicityFactorization:
    """Initial multiplicity structure of a monic polynomial from the
    square-free chain ``u_0 = p``, ``u_{k+1} = agcd(u_k, u_k')``.

    Quotients of the chain isolate the square-free factors whose simple
    roots receive multiplicity from their chain position; the
    multiplicities must add up to the degree.
    """
    pa = _as_coeffs(p)
    if abs(pa[-1] - 1.0) > 1e-12:
        pa = pa / pa[-1]
    d = pa.shape[0] - 1
    if d < 1:
        raise JordanFormError("degree must be at least 1")
    # work in root-scaled coordinates so the chain's rank decisions and
    # divisions see balanced coefficients
    scale = _root_scale(pa)
    ps = _scale_poly(pa, scale)
    pairs = None
    try:
        us = [ps]
        while us[-1].shape[0] > 1:
            u = us[-1]
            g = approximate_gcd(u, _derivative(u), tau).gcd
            if g.degree >= u.shape[0] - 1:
                raise StructureError("structure undetermined - lower tau or reseed")
            us.append(g.coeffs)
        depth = len(us) - 1  # largest multiplicity present
        ws = []
        for k in range(1, depth + 1):
            if us[k - 1].shape[0] <= us[k].shape[0]:
                raise StructureError("structure undetermined - lower tau or reseed")
            w, _ = _lstsq_divide(us[k - 1], us[k])
            ws.append(w)
        pairs = []
        for k in range(1, depth + 1):
            if k < depth:
                if ws[k - 1].shape[0] < ws[k].shape[0]:
                    raise StructureError("structure undetermined - lower tau or reseed")
                vk, _ = _lstsq_divide(ws[k - 1], ws[k])
            else:
                vk = ws[k - 1]
            if vk.shape[0] - 1 >= 1:
                for z in _simple_roots(vk):
                    pairs.append((complex(scale * z), k))
        pairs = _merge_close_roots(pairs)
        if sum(m for _, m in pairs) != d:
            raise StructureError("structure undetermined - lower tau or reseed")
    except (StructureError, JordanFormError):
        # deep-chain fallback: the first GCD is by far the most reliable
        # link, and its quotient (the square-free part) pins the distinct
        # roots; multiplicities follow by nearest-root assignment counts
        g1 = approximate_gcd(ps, _derivative(ps), tau).gcd
        if g1.degree >= d:
            raise StructureError("structure undetermined - lower tau or reseed")
        if g1.degree == 0:
            distinct = _simple_roots(ps)
        else:
            w1, _ = _lstsq_divide(ps, g1.coeffs)
            distinct = _simple_roots(w1)
        if distinct.shape[0] == 0:
            raise StructureError("structure undetermined - lower tau or reseed")
        raw = _simple_roots(ps)
        counts = np.zeros(distinct.shape[0], dtype=int)
        for z in raw:
            counts[int(np.argmin(np.abs(distinct - z)))] += 1
        pairs = _merge_close_roots(
            [(complex(scale * z), int(c)) for z, c in zip(distinct, counts) if c > 0]
        )
        if sum(m for _, m in pairs) != d:
            raise StructureError("structure undetermined - lower tau or reseed")
    pairs.sort(key=lambda t: (-t[1], t[0].real, t[0].imag))
    roots = tuple(z for z, _ in pairs)
    mults = tuple(m for _, m in pairs)
    back = float(
        np.linalg.norm(expand_from_roots(roots, mults) - pa) / np.linalg.norm(pa)
    )
    return MultiplicityFactorization(roots=roots, multiplicities=mults, backward_error=back)


def refine_roots_fixed_multiplicities(
    p, fact: MultiplicityFactorization, max_iters: int = 20
) -> MultiplicityFactorization:
    """Gauss-Newton refinement of the roots with the multiplicity
    structure held fixed.

    Minimizes the coefficient-space distance between the structured
    expansion and the target polynomial; the returned backward error never
    exceeds the input's.
    """
    pa = _as_coeffs(p)
    if abs(pa[-1] - 1.0) > 1e-12:
        pa = pa / pa[-1]
    d = pa.shape[0] - 1
    mults = np.array(fact.multiplicities, dtype=int)
    if mults.sum() != d:
        raise JordanFormError("multiplicities must sum to the degree")
    scale = _root_scale(pa)
    ps = _scale_poly(pa, scale)
    z = np.array(fact.roots, dtype=np.complex128) / scale
    norm_p = np.linalg.norm(ps)

    def coeff_residual(zv):
        return (expand_from_roots(zv, mults) - ps)[:-1]  # leading entry cancels

    def jacobian(zv):
        cols = []
        for i in range(zv.shape[0]):
            m2 = mults.copy()
            m2[i] -= 1
            base = expand_from_roots(zv, m2)
            col = -mults[i] * base
            cols.append(np.concatenate([col, np.zeros(d - base.shape[0] + 1)])[:-1])
        return np.column_stack(cols)

    f = coeff_residual(z)
    best = (float(np.linalg.norm(f)), z.copy())
    for _ in range(max_iters):
        jac = jacobian(z)
        # column equilibration: the raw coefficient scales of
        # high-multiplicity expansions swamp the rank test otherwise
        col_scale = np.linalg.norm(jac, axis=0)
        if np.any(col_scale == 0):
            raise StructureError("multiplicity structure inconsistent")
        try:
            step = qr_least_squares(jac / col_scale, f) / col_scale
        except RankDeficientError as exc:
            raise StructureError("multiplicity structure inconsistent") from exc
        z = z - step
        f = coeff_residual(z)
        fn = float(np.linalg.norm(f))
        if fn < best[0]:
            best = (fn, z.copy())
        if np.linalg.norm(step) < 1e-15 * (1.0 + np.linalg.norm(z)) or fn < EPS * norm_p:
            break
    z = best[1] * scale
    # report the backward error against the unscaled polynomial
    back = float(np.linalg.norm(expand_from_roots(z, mults) - pa) / np.linalg.norm(pa))
    if back > fact.backward_error + 1e-15:
        return fact
    pairs = sorted(zip(z, mults), key=lambda t: (-t[1], t[0].real, t[0].imag))
    return MultiplicityFactorization(
        roots=tuple(complex(zz) for zz, _ in pairs),
        multiplicities=tuple(int(m) for _, m in pairs),
        backward_error=float(back),
    )
