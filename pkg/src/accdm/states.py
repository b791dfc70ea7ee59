"""N-photon states with visible polarization and hidden mode labels.

Expands creation-operator products into totally symmetric first-quantized
states, traces out the hidden modes, and represents the result as a
block-diagonal accessible density matrix: one Hermitian block per total
angular momentum j, stored once, with the convention that the full 2^N
matrix repeats each block across its multiplicity copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Mapping

import numpy as np

from .expressions import CreationOperatorExpression
from .schur import N_MAX, occurring_two_j, schur_basis, su2_multiplicity

NORM_TOL = 1e-10
SYMMETRY_TOL = 1e-10
HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
AMPLITUDE_CUTOFF = 1e-14

Label = tuple[str, str]          # (polarization, primitive mode)


# ---------------------------------------------------------------------------
# First-quantized symmetric states
# ---------------------------------------------------------------------------

class FirstQuantizedState:
    """Normalized, totally symmetric amplitude map over N-particle labels.

    Keys are length-N tuples of (polarization, mode) pairs; invariance under
    any permutation of the particle slots is checked on construction.
    """

    def __init__(self, n: int, amplitudes: Mapping[tuple[Label, ...], complex]):
        if not 1 <= n <= N_MAX:
            raise ValueError(f"n must be between 1 and {N_MAX}")
        amps = {k: complex(v) for k, v in amplitudes.items() if v != 0}
        for key in amps:
            if len(key) != n:
                raise ValueError(f"label tuple {key} does not have {n} slots")
            if any(pol not in ("H", "V") for pol, _ in key):
                raise ValueError(f"bad polarization in {key}")
        norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} is not 1 within {NORM_TOL}")
        for i in range(n - 1):
            for key, amp in amps.items():
                swapped = key[:i] + (key[i + 1], key[i]) + key[i + 2:]
                if abs(amps.get(swapped, 0) - amp) > SYMMETRY_TOL:
                    raise ValueError(
                        f"amplitudes not symmetric under swapping slots {i},{i + 1}")
        self.n = n
        self.amplitudes = amps
        self.modes = tuple(sorted({m for key in amps for _, m in key}))

    def visible_vectors(self) -> dict[tuple[str, ...], np.ndarray]:
        """Polarization amplitude vector (length 2^n) for each hidden string."""
        out: dict[tuple[str, ...], np.ndarray] = {}
        for key, amp in self.amplitudes.items():
            hidden = tuple(m for _, m in key)
            idx = 0
            for pol, _ in key:
                idx = (idx << 1) | (0 if pol == "H" else 1)
            vec = out.setdefault(hidden, np.zeros(2 ** self.n, dtype=complex))
            vec[idx] += amp
        return out

    def visible_density_matrix(self) -> np.ndarray:
        """Reduced polarization matrix: partial trace over the hidden slots."""
        dim = 2 ** self.n
        rho = np.zeros((dim, dim), dtype=complex)
        for vec in self.visible_vectors().values():
            rho += np.outer(vec, vec.conj())
        return rho


def _distinct_permutations(items: tuple) -> Iterator[tuple]:
    """All distinct orderings of a multiset (plain recursion; N is small)."""
    if len(items) <= 1:
        yield items
        return
    seen = set()
    for i, head in enumerate(items):
        if head in seen:
            continue
        seen.add(head)
        rest = items[:i] + items[i + 1:]
        for tail in _distinct_permutations(rest):
            yield (head,) + tail


def expand_and_symmetrize(expr: CreationOperatorExpression) -> FirstQuantizedState:
    """Expand an operator product into its normalized symmetric state.

    Each monomial of the expansion contributes the equally weighted sum over
    the distinct arrangements of its labels, scaled by
    sqrt(prod occupation!) / sqrt(number of arrangements) so that relative
    weights match the bosonic norms (e.g. a repeated operator picks up the
    sqrt(2) of (a_H^dag)^2 acting on vacuum).  The total is normalized at
    the end and near-zero amplitudes from exact cancellations are dropped.
    """
    n = expr.n
    if n > N_MAX:
        raise ValueError(f"expression has {n} factors, cap is {N_MAX}")

    monomials: dict[tuple[Label, ...], complex] = {}

    def accumulate(i: int, coef: complex, labels: tuple[Label, ...]):
        if i == n:
            key = tuple(sorted(labels))
            monomials[key] = monomials.get(key, 0) + coef
            return
        for term in expr.factors[i]:
            accumulate(i + 1, coef * term.coefficient,
                       labels + ((term.polarization, term.mode),))

    accumulate(0, expr.prefactor, ())

    # exact-zero cleanup, relative so that uniformly small coefficients survive
    scale = max((abs(c) for c in monomials.values()), default=0.0)
    if scale == 0.0:
        raise ValueError("expression expands to zero: all terms cancel")

    amplitudes: dict[tuple[Label, ...], complex] = {}
    for labels, coef in monomials.items():
        if abs(coef) < AMPLITUDE_CUTOFF * scale:
            continue
        occupations: dict[Label, int] = {}
        for lab in labels:
            occupations[lab] = occupations.get(lab, 0) + 1
        count = math.factorial(n)
        for occ in occupations.values():
            count //= math.factorial(occ)
        weight = coef * math.sqrt(
            math.prod(math.factorial(occ) for occ in occupations.values()) / count)
        for arrangement in _distinct_permutations(labels):
            amplitudes[arrangement] = amplitudes.get(arrangement, 0) + weight

    if not amplitudes:
        raise ValueError("expression expands to zero: all terms cancel")
    norm = math.sqrt(sum(abs(a) ** 2 for a in amplitudes.values()))
    cleaned = {k: v / norm for k, v in amplitudes.items()
               if abs(v / norm) >= AMPLITUDE_CUTOFF}
    renorm = math.sqrt(sum(abs(a) ** 2 for a in cleaned.values()))
    cleaned = {k: v / renorm for k, v in cleaned.items()}
    return FirstQuantizedState(n, cleaned)


# ---------------------------------------------------------------------------
# Accessible density matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AccessibleDensityMatrix:
    """One Hermitian PSD block per j, rows/columns ordered m = j down to -j.

    The implied full matrix repeats block j across its su2_multiplicity(n, j)
    copies, so the normalization reads sum_j mult_j * trace(block_j) = 1.
    """

    n: int
    blocks: dict[int, np.ndarray]

    def __post_init__(self):
        expected = occurring_two_j(self.n)
        if sorted(self.blocks) != sorted(expected):
            raise ValueError(f"blocks must cover two_j in {expected}")
        total = 0.0
        for two_j, block in self.blocks.items():
            dim = two_j + 1
            if block.shape != (dim, dim):
                raise ValueError(f"block for two_j={two_j} must be {dim}x{dim}")
            if np.abs(block - block.conj().T).max() > HERMITICITY_TOL:
                raise ValueError(f"block for two_j={two_j} is not Hermitian")
            eigs = np.linalg.eigvalsh(block)
            if eigs.min() < -PSD_TOL:
                raise ValueError(
                    f"block for two_j={two_j} has negative eigenvalue {eigs.min()}")
            block.setflags(write=False)
            total += su2_multiplicity(self.n, two_j) * block.trace().real
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"multiplicity-weighted trace {total} is not 1")

    @classmethod
    def maximally_mixed(cls, n: int) -> "AccessibleDensityMatrix":
        dim = 2 ** n
        return cls(n, {tj: np.eye(tj + 1, dtype=complex) / dim
                       for tj in occurring_two_j(n)})

    @property
    def param_count(self) -> int:
        return sum((tj + 1) ** 2 for tj in self.blocks)

    def multiplicity(self, two_j: int) -> int:
        return su2_multiplicity(self.n, two_j)

    def symmetric_population(self) -> float:
        """Population of the totally symmetric sector j = n/2."""
        return self.blocks[self.n].trace().real

    def purity(self) -> float:
        return sum(self.multiplicity(tj) * (b @ b).trace().real
                   for tj, b in self.blocks.items())

    def full_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix with each block repeated over its copies."""
        basis = schur_basis(self.n)
        dim = 2 ** self.n
        assembled = np.zeros((dim, dim), dtype=complex)
        for two_j, block in self.blocks.items():
            for mu in range(1, self.multiplicity(two_j) + 1):
                rows = basis.sector_rows(two_j, mu)
                assembled[np.ix_(rows, rows)] = block
        u = basis.matrix
        return u.conj().T @ assembled @ u

    def allclose(self, other: "AccessibleDensityMatrix", atol: float = 1e-10) -> bool:
        return self.n == other.n and all(
            np.abs(self.blocks[tj] - other.blocks[tj]).max() <= atol
            for tj in self.blocks)


def _extract_blocks(rho_schur: np.ndarray, n: int) -> tuple[dict[int, np.ndarray], float]:
    """Average the (j, mu) diagonal blocks over mu; also return the largest
    magnitude found outside those diagonal blocks."""
    basis = schur_basis(n)
    remainder = rho_schur.copy()
    blocks: dict[int, np.ndarray] = {}
    for two_j in occurring_two_j(n):
        mult = su2_multiplicity(n, two_j)
        dim = two_j + 1
        acc = np.zeros((dim, dim), dtype=complex)
        for mu in range(1, mult + 1):
            rows = basis.sector_rows(two_j, mu)
            acc += rho_schur[np.ix_(rows, rows)]
            remainder[np.ix_(rows, rows)] = 0.0
        acc /= mult
        blocks[two_j] = (acc + acc.conj().T) / 2
    return blocks, float(np.abs(remainder).max())


def accessible_projection(rho: np.ndarray, *, method: str = "schur") -> AccessibleDensityMatrix:
    """Project a visible density matrix onto the accessible operator space.

    This is the S_N twirl (1/N!) sum_P P rho P^dag, expressed in block form;
    it leaves rho unchanged whenever rho already commutes with all
    permutations.  ``method="schur"`` extracts and mu-averages Schur-basis
    blocks; ``method="average"`` performs the explicit permutation average
    (small n only) -- both agree to high precision.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2 ** n != dim or not 1 <= n <= N_MAX:
        raise ValueError(f"expected a 2^n x 2^n matrix with 1 <= n <= {N_MAX}")
    if np.abs(rho - rho.conj().T).max() > NORM_TOL:
        raise ValueError("input matrix is not Hermitian within tolerance")
    if abs(rho.trace().real - 1.0) > NORM_TOL:
        raise ValueError("input matrix does not have unit trace within tolerance")

    if method == "average":
        if n > 6:
            raise ValueError("explicit permutation averaging is limited to n <= 6")
        acc = np.zeros_like(rho)
        for perm in permutations(range(n)):
            p = _permutation_matrix(perm, n)
            acc += p @ rho @ p.T
        rho = acc / math.factorial(n)
    elif method != "schur":
        raise ValueError(f"unknown method {method!r}")

    basis = schur_basis(n)
    u = basis.matrix
    blocks, _ = _extract_blocks(u @ rho @ u.conj().T, n)
    return AccessibleDensityMatrix(n, blocks)


def _permutation_matrix(perm, n: int) -> np.ndarray:
    dim = 2 ** n
    p = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        new_idx = 0
        for i in range(n):
            new_idx = (new_idx << 1) | bits[perm[i]]
        p[new_idx, idx] = 1
    return p


def trace_hidden(state: FirstQuantizedState) -> AccessibleDensityMatrix:
    """Trace out the hidden modes of a symmetric state.

    The reduced polarization matrix of a totally symmetric state commutes
    with every permutation, so its Schur-basis coherences between different
    (j, mu) sectors must already vanish; this is asserted before the block
    form is returned.
    """
    rho = state.visible_density_matrix()
    basis = schur_basis(state.n)
    u = basis.matrix
    blocks, off_block = _extract_blocks(u @ rho @ u.conj().T, state.n)
    if off_block > SYMMETRY_TOL:
        raise ValueError(
            f"input state violates permutation symmetry: inter-sector coherence "
            f"{off_block:.3e} exceeds {SYMMETRY_TOL}")
    return AccessibleDensityMatrix(state.n, blocks)


# ---------------------------------------------------------------------------
# Coupled-coefficient parameterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoupledCoefficients:
    """Amplitudes C^j[m, m'] of the totally symmetric visible-hidden coupling.

    Row index m runs over the 2j+1 visible weights (descending); column m'
    runs over the su2_multiplicity(n, j) hidden partners.  Normalized so the
    squared amplitudes sum to 1 (against unit-norm coupled kets).
    """

    n: int
    tables: dict[int, np.ndarray]

    def __post_init__(self):
        expected = occurring_two_j(self.n)
        if any(tj not in expected for tj in self.tables):
            raise ValueError(f"tables keys must be a subset of {expected}")
        total = 0.0
        for two_j, table in self.tables.items():
            shape = (two_j + 1, su2_multiplicity(self.n, two_j))
            if table.shape != shape:
                raise ValueError(f"table for two_j={two_j} must have shape {shape}")
            total += float(np.sum(np.abs(table) ** 2))
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"coefficient norm {total} is not 1 within {NORM_TOL}")


def coupled_to_accessible(coeffs: CoupledCoefficients) -> AccessibleDensityMatrix:
    """Accessible density matrix of the state with the given coupled amplitudes.

    Block j is proportional to C^j (C^j)^dag; the hidden-partner index is
    summed out and the multiplicity-weighted trace is normalized to one.
    """
    total = sum(float(np.sum(np.abs(t) ** 2)) for t in coeffs.tables.values())
    if total < 1e-30:
        raise ValueError("all coupled coefficients are zero")
    blocks = {}
    for two_j in occurring_two_j(coeffs.n):
        dim = two_j + 1
        mult = su2_multiplicity(coeffs.n, two_j)
        table = coeffs.tables.get(two_j)
        if table is None:
            blocks[two_j] = np.zeros((dim, dim), dtype=complex)
        else:
            gram = table @ table.conj().T
            blocks[two_j] = (gram + gram.conj().T) / (2 * mult * total)
    return AccessibleDensityMatrix(coeffs.n, blocks)
