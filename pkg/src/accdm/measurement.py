"""Waveplate / polarizing-beamsplitter / photon-counting measurement model.

A quarter waveplate and a half waveplate rotate the collective polarization
state; a polarizing beamsplitter with number-resolving counters then yields
one of N+1 outcomes (N_H, N_V).  Every outcome operator commutes with
particle permutations, so each is represented exactly in accessible block
form: one Hermitian block per total angular momentum j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schur import N_MAX, occurring_two_j, sector_rotation, su2_multiplicity
from .states import AccessibleDensityMatrix

POVM_TOL = 1e-10


@dataclass(frozen=True)
class WaveplateSetting:
    """Fast-axis angles of the two plates, in degrees (period 180)."""

    qwp_deg: float
    hwp_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.qwp_deg) and math.isfinite(self.hwp_deg)):
            raise ValueError("waveplate angles must be finite")


@dataclass(frozen=True)
class CountRecord:
    """One (setting, outcome, count) row.

    Measured counts are integers; fractional counts are accepted so that
    exact expected-count data can be fed to the estimators.
    """

    qwp_deg: float
    hwp_deg: float
    n_h: int
    n_v: int
    count: float

    def __post_init__(self):
        if self.n_h < 0 or self.n_v < 0 or self.count < 0:
            raise ValueError("photon numbers and counts must be nonnegative")

    @property
    def setting(self) -> WaveplateSetting:
        return WaveplateSetting(self.qwp_deg, self.hwp_deg)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def waveplate_unitary(setting: WaveplateSetting) -> np.ndarray:
    """Jones matrix of the plate pair, QWP traversed first.

    Retarder conventions: quarter waveplate R(q) diag(1, i) R(-q), half
    waveplate R(h) diag(1, -1) R(-h), with R a real rotation and angles
    measured in degrees.
    """
    q = math.radians(setting.qwp_deg)
    h = math.radians(setting.hwp_deg)
    qwp = _rotation(q) @ np.diag([1.0, 1.0j]) @ _rotation(-q)
    hwp = _rotation(h) @ np.diag([1.0, -1.0]) @ _rotation(-h)
    return hwp @ qwp


def outcome_two_m(n: int, n_v: int) -> int:
    """Doubled weight n_h - n_v of the outcome with n_v vertical photons."""
    return n - 2 * n_v


def _outcome_rows(setting: WaveplateSetting, n: int) -> dict[int, np.ndarray]:
    """Per-sector row vectors whose outer products are the POVM blocks.

    For outcome index k (= N_V) the rotated projector block in sector j is
    conj(row) row^T with row the weight-(n-2k) row of the sector rotation;
    rows for weights outside the sector are zero.  Shape (n+1, 2j+1).
    """
    u = waveplate_unitary(setting)
    rows: dict[int, np.ndarray] = {}
    for two_j in occurring_two_j(n):
        w = sector_rotation(u, n, two_j)
        m = np.zeros((n + 1, two_j + 1), dtype=complex)
        for k in range(n + 1):
            two_m = outcome_two_m(n, k)
            if abs(two_m) <= two_j:
                m[k] = w[(two_j - two_m) // 2]
        rows[two_j] = m
    return rows


@dataclass(frozen=True)
class PovmElement:
    """Accessible block form of one outcome operator (N_H, N_V)."""

    n: int
    n_h: int
    n_v: int
    blocks: dict[int, np.ndarray]

    def __post_init__(self):
        if self.n_h + self.n_v != self.n:
            raise ValueError("outcome must satisfy n_h + n_v = n")
        for two_j, block in self.blocks.items():
            eigs = np.linalg.eigvalsh(block)
            if eigs.min() < -POVM_TOL or eigs.max() > 1 + POVM_TOL:
                raise ValueError(
                    f"block for two_j={two_j} violates 0 <= E <= 1: "
                    f"eigenvalues in [{eigs.min()}, {eigs.max()}]")
            block.setflags(write=False)


def povm_elements(setting: WaveplateSetting, n: int) -> list[PovmElement]:
    """The N+1 outcome operators of one setting, ordered (N,0), (N-1,1), ..., (0,N)."""
    if not 1 <= n <= N_MAX:
        raise ValueError(f"n must be between 1 and {N_MAX}")
    rows = _outcome_rows(setting, n)
    elements = []
    for k in range(n + 1):
        blocks = {}
        for two_j, m in rows.items():
            row = m[k]
            blocks[two_j] = np.outer(row.conj(), row)
        elements.append(PovmElement(n, n - k, k, blocks))
    return elements


def outcome_probabilities(rho: AccessibleDensityMatrix,
                          setting: WaveplateSetting) -> np.ndarray:
    """Probabilities of the N+1 outcomes, ordered (N,0) first.

    p_k = sum_j mult_j trace(B_j Pi_{k,j}); tiny negative round-off is
    clipped to zero.
    """
    n = rho.n
    rows = _outcome_rows(setting, n)
    p = np.zeros(n + 1)
    for two_j, m in rows.items():
        quad = np.einsum("ka,ab,kb->k", m, rho.blocks[two_j], m.conj()).real
        p += su2_multiplicity(n, two_j) * quad
    if p.min() < -1e-12:
        raise AssertionError(f"probability {p.min()} below tolerance")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > 1e-10:
        raise AssertionError(f"probabilities sum to {total}, expected 1")
    return p


# ---------------------------------------------------------------------------
# Deterministic Poisson sampling
# ---------------------------------------------------------------------------

def _poisson_inversion(rng: np.random.Generator, mean: float) -> int:
    u = rng.random()
    p = math.exp(-mean)
    cdf = p
    k = 0
    while u > cdf:
        k += 1
        p *= mean / k
        cdf += p
        if p == 0.0:  # float tail exhausted; u fell in the residual mass
            break
    return k


def _poisson_ptrs(rng: np.random.Generator, mean: float) -> int:
    """Hormann's transformed-rejection sampler, valid for mean >= 10."""
    log_mean = math.log(mean)
    b = 0.931 + 2.53 * math.sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
                <= k * log_mean - mean - math.lgamma(k + 1.0)):
            return int(k)


def poisson_draw(rng: np.random.Generator, mean: float) -> int:
    """One Poisson variate: sequential inversion below mean 30, PTRS above."""
    if mean < 0:
        raise ValueError("mean must be nonnegative")
    if mean == 0:
        return 0
    if mean < 30.0:
        return _poisson_inversion(rng, mean)
    return _poisson_ptrs(rng, mean)


def simulate_counts(rho: AccessibleDensityMatrix,
                    settings: list[WaveplateSetting],
                    mean_shots: float,
                    seed: int) -> list[CountRecord]:
    """Poisson count data for every (setting, outcome) pair.

    Each pair owns an independent substream seeded by (seed, setting index,
    outcome index), so results are reproducible and independent of
    evaluation order.
    """
    if mean_shots < 0:
        raise ValueError("mean_shots must be nonnegative")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    records = []
    for si, setting in enumerate(settings):
        p = outcome_probabilities(rho, setting)
        for k in range(rho.n + 1):
            rng = np.random.default_rng([seed, si, k])
            count = poisson_draw(rng, mean_shots * p[k])
            records.append(CountRecord(setting.qwp_deg, setting.hwp_deg,
                                       rho.n - k, k, count))
    return records


# ---------------------------------------------------------------------------
# Linear span of the measurement set
# ---------------------------------------------------------------------------

def _flatten_blocks(blocks: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Fixed real parameterization of a Hermitian block family."""
    parts = []
    for two_j in occurring_two_j(n):
        block = blocks[two_j]
        dim = two_j + 1
        for i in range(dim):
            parts.append(block[i, i].real)
            for j2 in range(i + 1, dim):
                parts.append(block[i, j2].real)
                parts.append(block[i, j2].imag)
    return np.array(parts)


def measurement_span_rank(settings: list[WaveplateSetting], n: int) -> int:
    """Dimension of the real-linear span of all outcome operators.

    Counts singular values above 1e-9 of the stacked block parameterization;
    at most accessible_param_count(n, 2) dimensions are reachable.
    """
    if not settings:
        raise ValueError("settings must be nonempty")
    rows = [_flatten_blocks(element.blocks, n)
            for setting in settings
            for element in povm_elements(setting, n)]
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return int((sv > 1e-9 * sv[0]).sum())
