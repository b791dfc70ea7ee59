"""Schur-Weyl machinery for N two-level systems (polarization qubits).

The N-qubit space decomposes into total-angular-momentum sectors j, each
occurring with a multiplicity determined by the Clebsch-Gordan series.  This
module provides the counting side of that decomposition (multiplicities,
irrep dimensions via the Weyl character formula, parameter counts) and the
explicit orthonormal change of basis from the computational {H,V}^N basis to
(j, multiplicity copy, weight) labels, built by sequential angular-momentum
coupling.

Half-integer angular momenta are represented exactly as doubled integers:
``two_j = 2j`` and ``two_m = 2m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

#: Largest particle number for which the dense 2^N x 2^N basis is built.
N_MAX = 10


# ---------------------------------------------------------------------------
# Counting: multiplicities, dimensions, parameter counts
# ---------------------------------------------------------------------------

def occurring_two_j(n: int) -> list[int]:
    """Doubled j values present for n qubits, descending (n, n-2, ..., 0 or 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(range(n, -1, -2))


def su2_multiplicity(n: int, two_j: int) -> int:
    """Number of copies of spin j in the n-fold product of spin-1/2.

    Catalan-triangle form of the Clebsch-Gordan series:
    ``C(n, (n-2j)/2) - C(n, (n-2j)/2 - 1)``.  Returns 0 when (n, two_j) is
    not a valid pair (j < 0, j > n/2, or parity mismatch).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if two_j < 0 or two_j > n or (n - two_j) % 2 != 0:
        return 0
    k = (n - two_j) // 2
    return math.comb(n, k) - (math.comb(n, k - 1) if k >= 1 else 0)


def partitions(n: int, max_parts: int) -> Iterator[tuple[int, ...]]:
    """Partitions of n into at most max_parts parts, lexicographically decreasing."""
    def rec(remaining: int, cap: int, parts_left: int) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield ()
            return
        if parts_left == 0:
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in rec(remaining - first, first, parts_left - 1):
                yield (first,) + rest

    yield from rec(n, n, max_parts)


def _validate_partition(partition: Sequence[int], d: int) -> tuple[int, ...]:
    lam = tuple(int(x) for x in partition)
    if len(lam) == 0 or len(lam) > d:
        raise ValueError(f"partition must have between 1 and d={d} parts, got {lam}")
    if any(x < 0 for x in lam):
        raise ValueError(f"partition entries must be nonnegative, got {lam}")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError(f"partition entries must be weakly decreasing, got {lam}")
    return lam


def two_j_to_partition(n: int, two_j: int) -> tuple[int, int]:
    """Two-row Young diagram ((n + 2j)/2, (n - 2j)/2) for spin j of n qubits."""
    if su2_multiplicity(n, two_j) == 0:
        raise ValueError(f"two_j={two_j} does not occur for n={n}")
    return ((n + two_j) // 2, (n - two_j) // 2)


def partition_to_two_j(partition: Sequence[int]) -> int:
    """Inverse of :func:`two_j_to_partition` for at-most-two-row diagrams."""
    lam = _validate_partition(partition, 2)
    lam = lam + (0,) * (2 - len(lam))
    return lam[0] - lam[1]


def weyl_dimension(partition: Sequence[int], d: int) -> int:
    """Dimension of the SU(d) irrep labelled by a Young diagram.

    Weyl character formula: prod over 1 <= i < j <= d of
    ``(lam_i - lam_j + j - i) / (j - i)`` with the partition padded to
    length d by zeros.  For d = 2 this is 2j + 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    lam = _validate_partition(partition, d) + (0,) * (d - len(partition))
    result = Fraction(1)
    for i in range(d):
        for j in range(i + 1, d):
            result *= Fraction(lam[i] - lam[j] + j - i, j - i)
    assert result.denominator == 1
    return int(result)


def symmetric_dimension(n: int, d: int) -> int:
    """Dimension C(n+d-1, n) of the totally symmetric subspace of n qudits."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    return math.comb(n + d - 1, n)


def accessible_param_count(n: int, d: int) -> int:
    """Number of independent real parameters in an accessible density matrix.

    Equals C(n + d^2 - 1, n), which is also the sum of squared irrep
    dimensions over all partitions of n into at most d parts.  The identity
    is cross-checked here for small arguments.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    count = math.comb(n + d * d - 1, n)
    if n <= 8 and d <= 4:
        by_sum = sum(weyl_dimension(lam, d) ** 2 for lam in partitions(n, d))
        assert by_sum == count, f"parameter-count identity failed for n={n}, d={d}"
    return count


# ---------------------------------------------------------------------------
# Explicit Schur basis by sequential coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchurBasisVector:
    """One basis vector |j, mu, m> with its computational-basis amplitudes.

    ``amplitudes[idx]`` is the coefficient of the computational string whose
    bits (most significant = particle 1) encode H as 0 and V as 1.
    """
    two_j: int
    mu: int
    two_m: int
    amplitudes: np.ndarray


class SchurBasis:
    """Orthonormal (j, mu, m) basis of (C^2)^(x)n, ordered j desc, mu asc, m desc.

    Multiplicity copies are sequential-coupling paths: particle 1 is coupled
    with particle 2, the result with particle 3, and so on.  mu enumerates
    the intermediate-j paths in ascending lexicographic order of the doubled
    intermediate momenta.
    """

    def __init__(self, n: int, vectors: Sequence[SchurBasisVector]):
        self.n = n
        self.vectors = tuple(vectors)
        self._row = {(v.two_j, v.mu, v.two_m): i for i, v in enumerate(self.vectors)}
        self._cached_matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.vectors)

    def row_index(self, two_j: int, mu: int, two_m: int) -> int:
        return self._row[(two_j, mu, two_m)]

    def sector_rows(self, two_j: int, mu: int) -> list[int]:
        """Row indices of the (j, mu) copy, weight m descending."""
        return [self.row_index(two_j, mu, two_m)
                for two_m in range(two_j, -two_j - 1, -2)]

    @property
    def matrix(self) -> np.ndarray:
        """Unitary U with U[row] = conj(amplitudes); U rho U^dag lands in Schur labels."""
        if self._cached_matrix is None:
            u = np.array([v.amplitudes.conj() for v in self.vectors])
            u.setflags(write=False)
            self._cached_matrix = u
        return self._cached_matrix

    def amplitude_matrix(self, two_j: int, mu: int) -> np.ndarray:
        """Rows of ``matrix`` for one (j, mu) copy, shape (2j+1, 2^n)."""
        return self.matrix[self.sector_rows(two_j, mu), :]


def _couple_spin_half(vecs: dict[int, np.ndarray], two_jp: int, up: bool) -> dict[int, np.ndarray]:
    """Couple one more spin-1/2 onto a spin-j' standard multiplet.

    ``vecs`` maps two_m' to amplitude vectors over 2^k strings; the new
    particle is appended as the least significant bit (0 = H).  Standard
    Condon-Shortley coefficients, so each returned multiplet is again a
    ladder-consistent standard basis.
    """
    two_j = two_jp + 1 if up else two_jp - 1
    dim = len(next(iter(vecs.values())))
    out: dict[int, np.ndarray] = {}
    for two_m in range(two_j, -two_j - 1, -2):
        v = np.zeros(2 * dim)
        # fractions (j' +/- m + 1/2) / (2j' + 1) in doubled-integer form
        c_h = Fraction(two_jp + two_m + 1, 2 * (two_jp + 1))
        c_v = Fraction(two_jp - two_m + 1, 2 * (two_jp + 1))
        if not up:
            c_h, c_v = -c_v, c_h
        if abs(two_m - 1) <= two_jp:
            coef = math.sqrt(abs(c_h)) * (1 if c_h >= 0 else -1)
            v[0::2] += coef * vecs[two_m - 1]
        if abs(two_m + 1) <= two_jp:
            coef = math.sqrt(abs(c_v)) * (1 if c_v >= 0 else -1)
            v[1::2] += coef * vecs[two_m + 1]
        out[two_m] = v
    return out


@lru_cache(maxsize=None)
def schur_basis(n: int) -> SchurBasis:
    """Build the Schur basis for n qubits by sequential coupling.

    Raises ValueError outside 1 <= n <= N_MAX (dense storage cap).
    """
    if not 1 <= n <= N_MAX:
        raise ValueError(f"n must be between 1 and {N_MAX}, got {n}")

    paths: dict[tuple[int, ...], dict[int, np.ndarray]] = {
        (1,): {1: np.array([1.0, 0.0]), -1: np.array([0.0, 1.0])}
    }
    for _ in range(n - 1):
        grown: dict[tuple[int, ...], dict[int, np.ndarray]] = {}
        for path, vecs in paths.items():
            two_jp = path[-1]
            grown[path + (two_jp + 1,)] = _couple_spin_half(vecs, two_jp, up=True)
            if two_jp > 0:
                grown[path + (two_jp - 1,)] = _couple_spin_half(vecs, two_jp, up=False)
        paths = grown

    by_sector: dict[int, list[tuple[int, ...]]] = {}
    for path in sorted(paths):
        by_sector.setdefault(path[-1], []).append(path)

    vectors: list[SchurBasisVector] = []
    for two_j in occurring_two_j(n):
        assert len(by_sector.get(two_j, [])) == su2_multiplicity(n, two_j)
        for mu, path in enumerate(by_sector[two_j], start=1):
            for two_m in range(two_j, -two_j - 1, -2):
                amp = paths[path][two_m].astype(complex)
                amp.setflags(write=False)
                vectors.append(SchurBasisVector(two_j, mu, two_m, amp))
    return SchurBasis(n, vectors)


# ---------------------------------------------------------------------------
# Collective rotations restricted to a sector
# ---------------------------------------------------------------------------

def symmetric_power(u: np.ndarray, k: int) -> np.ndarray:
    """Matrix of u^(x)k restricted to the symmetric subspace of k qubits.

    Basis ordered by weight m descending, i.e. index r = number of V's.
    Valid for any 2x2 matrix u, not only unitaries.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("u must be 2x2")
    if k == 0:
        return np.ones((1, 1), dtype=complex)
    s = np.zeros((k + 1, k + 1), dtype=complex)
    fact = [math.factorial(i) for i in range(k + 1)]
    for rp in range(k + 1):
        scale_rp = fact[k - rp] * fact[rp]
        for r in range(k + 1):
            total = 0.0 + 0.0j
            for p in range(0, k - r + 1):
                q = (k - rp) - p
                if q < 0 or q > r:
                    continue
                total += (math.comb(k - r, p) * math.comb(r, q)
                          * u[0, 0] ** p * u[1, 0] ** (k - r - p)
                          * u[0, 1] ** q * u[1, 1] ** (r - q))
            s[rp, r] = total * math.sqrt(scale_rp / (fact[k - r] * fact[r]))
    return s


def sector_rotation(u: np.ndarray, n: int, two_j: int) -> np.ndarray:
    """Block of the collective rotation u^(x)n within one spin-j sector.

    Identical for every multiplicity copy of the sequential-coupling basis:
    det(u)^((n-2j)/2) times the symmetric (2j)-fold power of u.  Rows and
    columns are ordered by weight m descending.
    """
    u = np.asarray(u, dtype=complex)
    if su2_multiplicity(n, two_j) == 0:
        raise ValueError(f"two_j={two_j} does not occur for n={n}")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    return det ** ((n - two_j) // 2) * symmetric_power(u, two_j)
