"""Integer-partition machinery for Jordan structures.

Segre and Weyr characteristics are conjugate partitions of an eigenvalue's
algebraic multiplicity.  Partitions are stored in nonzero form (trailing
zeros implicit); all functions are pure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import JordanFormError
from .linalg import as_complex_matrix

DOMINATES = "dominates"
DOMINATED = "dominated"
EQUAL = "equal"
INCOMPARABLE = "incomparable"


def check_partition(parts: Sequence[int], name: str = "partition") -> tuple[int, ...]:
    """Validate a non-increasing sequence of positive integers."""
    p = tuple(int(x) for x in parts)
    for i, x in enumerate(p):
        if x < 1:
            raise JordanFormError(f"{name} parts must be positive, got {x}")
        if i > 0 and p[i - 1] < x:
            raise JordanFormError(f"{name} must be non-increasing, got {p}")
    return p


def conjugate_partition(parts: Sequence[int]) -> tuple[int, ...]:
    """Conjugate (transpose) of a partition; an involution.

    The j-th conjugate part is the number of parts >= j, e.g.
    ``[3, 2, 2, 1] -> [4, 3, 1]``.
    """
    p = check_partition(parts)
    if not p:
        return ()
    return tuple(sum(1 for x in p if x >= j) for j in range(1, p[0] + 1))


def bundle_codimension(segre_list: Sequence[Sequence[int]]) -> int:
    """Codimension of the matrix bundle with the given Segre
    characteristics (one partition per distinct eigenvalue).

    Computed as ``sum_i(-1 + sum_j (2j - 1) n_ij)`` and cross-checked
    against the conjugate form ``sum_i(-1 + sum_j m_ij^2)``.
    """
    if len(segre_list) == 0:
        warnings.warn("bundle_codimension of an empty structure is 0", stacklevel=2)
        return 0
    total = 0
    check = 0
    for segre in segre_list:
        p = check_partition(segre, "segre")
        if not p:
            raise JordanFormError("each Segre characteristic must be nonempty")
        total += -1 + sum((2 * j - 1) * nj for j, nj in enumerate(p, start=1))
        check += -1 + sum(mj * mj for mj in conjugate_partition(p))
    if total != check:  # pragma: no cover - internal consistency
        raise JordanFormError("codimension cross-check failed")
    return total


@dataclass(frozen=True)
class PhiIndexSet:
    """Constraint index pairs for one eigenvalue's Weyr characteristic.

    ``pairs`` holds 1-based ``(i, j)`` with ``mu[l-1] < i <= mu[l]`` and
    ``i < j <= mu[l]`` for some block ``l``; ``mu`` are the cumulative
    block sums with ``mu[0] = 0``.
    """

    pairs: tuple[tuple[int, int], ...]
    weyr: tuple[int, ...]
    mu: tuple[int, ...]


def phi_index_set(weyr: Sequence[int]) -> PhiIndexSet:
    """Index pairs (i, j), i < j, lying inside one Weyr block each."""
    w = check_partition(weyr, "weyr")
    mu = [0]
    for m in w:
        mu.append(mu[-1] + m)
    pairs = []
    for l in range(1, len(w) + 1):
        for i in range(mu[l - 1] + 1, mu[l] + 1):
            for j in range(i + 1, mu[l] + 1):
                pairs.append((i, j))
    return PhiIndexSet(pairs=tuple(pairs), weyr=w, mu=tuple(mu))


def weyr_from_nullities(a, lam: complex, tol: float = 1e-8) -> tuple[int, ...]:
    """Weyr characteristic of ``lam`` from numerical nullities of powers.

    ``m_j = nullity((a - lam I)^j) - nullity((a - lam I)^(j-1))`` with the
    numerical nullity counting singular values below ``tol`` times the
    largest one.  Serves as the independent oracle for the fast structure
    algorithms.
    """
    m = as_complex_matrix(a)
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise JordanFormError("matrix must be square")
    if tol <= 0:
        raise JordanFormError("tol must be positive")
    e = m - lam * np.eye(n)
    power = np.eye(n, dtype=np.complex128)
    weyr: list[int] = []
    prev_nullity = 0
    for _ in range(n):
        power = power @ e
        scale = np.linalg.norm(power)
        if scale == 0.0:
            nullity = n
        else:
            power = power / scale
            sv = sla.svdvals(power)
            nullity = int(np.sum(sv < tol * sv[0]))
        mj = nullity - prev_nullity
        if mj < 0 or (weyr and mj > weyr[-1]):
            raise JordanFormError(
                "inconsistent rank decisions in nullity sequence; adjust tol"
            )
        if mj == 0:
            break
        weyr.append(mj)
        prev_nullity = nullity
        if nullity >= n:
            break
    return tuple(weyr)


def dominance_compare(d: Sequence[int], e: Sequence[int]) -> str:
    """Classify two partitions of the same integer in the dominance order
    (prefix-sum comparison)."""
    pd = check_partition(d, "d")
    pe = check_partition(e, "e")
    if sum(pd) != sum(pe):
        raise JordanFormError("partitions must have equal sums")
    k = max(len(pd), len(pe))
    ge = le = True
    sd = se = 0
    for j in range(k):
        sd += pd[j] if j < len(pd) else 0
        se += pe[j] if j < len(pe) else 0
        if sd < se:
            ge = False
        if sd > se:
            le = False
    if ge and le:
        return EQUAL
    if ge:
        return DOMINATES
    if le:
        return DOMINATED
    return INCOMPARABLE


@dataclass(frozen=True)
class JordanStructure:
    """Per-eigenvalue Segre characteristics of a matrix.

    ``entries`` pairs each distinct eigenvalue with its Segre partition.
    """

    entries: tuple[tuple[complex, tuple[int, ...]], ...]

    def __post_init__(self):
        ents = tuple((complex(lam), check_partition(seg, "segre")) for lam, seg in self.entries)
        object.__setattr__(self, "entries", ents)

    @property
    def total(self) -> int:
        return sum(sum(seg) for _, seg in self.entries)

    @property
    def eigenvalues(self) -> tuple[complex, ...]:
        return tuple(lam for lam, _ in self.entries)

    def segre_of(self, lam: complex, tol: float = 1e-6) -> tuple[int, ...]:
        for ev, seg in self.entries:
            if abs(ev - lam) <= tol * (1.0 + abs(lam)):
                return seg
        raise JordanFormError(f"no structure entry near eigenvalue {lam}")

    def codimension(self) -> int:
        if not self.entries:
            return 0
        return bundle_codimension([seg for _, seg in self.entries])

    def check_separation(self, tol: float) -> None:
        evs = self.eigenvalues
        for i in range(len(evs)):
            for j in range(i + 1, len(evs)):
                if abs(evs[i] - evs[j]) <= tol:
                    raise JordanFormError(
                        f"structure eigenvalues {evs[i]} and {evs[j]} are not separated"
                    )
