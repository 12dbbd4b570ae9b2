"""Zadoff-Chu pilot pool with cyclic-shift grouping.

The pool holds K = J * L unit-modulus pilot sequences on Q = 12 * rb_count
subcarriers. Pilots are grouped per codebook: group g uses ZC root u = g and
its L cyclic shifts, so pilots within a group are (near-)orthogonal and the
pilot index alone identifies the codebook a grant-free UE selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["PilotPool", "zc_sequence", "build_pilot_pool", "pilot_matrix", "largest_prime_below"]


def largest_prime_below(n: int) -> int:
    """Largest prime strictly below n."""
    for p in range(n - 1, 1, -1):
        if all(p % d for d in range(2, int(p**0.5) + 1)):
            return p
    raise ValueError(f"no prime below {n}")


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, int(n**0.5) + 1))


def zc_sequence(root: int, n_zc: int) -> np.ndarray:
    """Zadoff-Chu root sequence s[n] = exp(-j*pi*root*n*(n+1)/n_zc).

    n_zc must be prime and 0 < root < n_zc, which guarantees unit modulus and
    ideal (zero) periodic autocorrelation at all nonzero lags.
    """
    if not _is_prime(n_zc):
        raise ValueError(f"ZC length must be prime, got {n_zc}")
    if not 0 < root < n_zc:
        raise ValueError(f"ZC root must be in (0, {n_zc}), got {root}")
    n = np.arange(n_zc)
    return np.exp(-1j * np.pi * root * n * (n + 1) / n_zc)


@dataclass(frozen=True)
class PilotPool:
    """K pilot sequences, L cyclic shifts per root, one root per codebook group.

    sequences  : (K, Q) complex, unit-modulus entries
    group_of   : (K,) int, 1-based codebook group per pilot
    shift_of   : (K,) int, cyclic-shift index within the group (0..L-1)
    """

    J: int
    L: int
    Q: int
    n_zc: int
    sequences: np.ndarray
    group_of: np.ndarray = field(repr=False)
    shift_of: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return self.J * self.L

    def pilots_of_group(self, group: int) -> np.ndarray:
        """Pilot indices (0-based) belonging to a 1-based group id."""
        return np.where(self.group_of == group)[0]


def build_pilot_pool(J: int, L: int, rb_count: int) -> PilotPool:
    """Build the pool: J roots x L cyclic shifts over Q = 12*rb_count tones.

    The root sequence has length n_zc = largest prime < Q and is cyclically
    extended to Q. Shifts use stride floor(n_zc / L) so same-root pilots stay
    orthogonal before extension. Pilot k (0-based) carries group k // L + 1.
    """
    if J < 1 or L < 1 or rb_count < 1:
        raise ValueError("J, L and rb_count must all be >= 1")
    Q = 12 * rb_count
    n_zc = largest_prime_below(Q)
    if L > n_zc:
        raise ValueError(f"L={L} exceeds ZC length {n_zc}")
    if J >= n_zc:
        raise ValueError(f"J={J} needs more roots than ZC length {n_zc} allows")

    stride = n_zc // L
    ext = np.arange(Q) % n_zc
    sequences = np.zeros((J * L, Q), dtype=complex)
    group_of = np.zeros(J * L, dtype=int)
    shift_of = np.zeros(J * L, dtype=int)
    for k in range(J * L):
        group, shift_idx = k // L + 1, k % L
        base = np.roll(zc_sequence(group, n_zc), -shift_idx * stride)
        sequences[k] = base[ext]
        group_of[k] = group
        shift_of[k] = shift_idx
    return PilotPool(J=J, L=L, Q=Q, n_zc=n_zc, sequences=sequences,
                     group_of=group_of, shift_of=shift_of)


def pilot_matrix(pool: PilotPool) -> np.ndarray:
    """Q x K sensing matrix with columns normalized to unit 2-norm.

    Activity detection runs on this normalized matrix (with the observation
    scaled by 1/sqrt(Q)) so the characteristic values |h_k|^2 sit on the scale
    the 0.01 / 0.007 thresholds were written for.
    """
    S = pool.sequences.T.astype(complex)
    return S / np.linalg.norm(S, axis=0, keepdims=True)


def pilot_matrix_csv(pool: PilotPool) -> str:
    """Render the normalized pilot matrix row-major with "re,im" cells."""
    S = pilot_matrix(pool)
    lines = []
    for row in S:
        lines.append(",".join(f"{c.real:.12g},{c.imag:.12g}" for c in row))
    return "\n".join(lines) + "\n"
