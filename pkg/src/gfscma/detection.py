"""First-step activity detection: FOCUSS sparse recovery plus thresholding.

The detector fits the flat-approximation model y = S h + n, where S holds the
K candidate pilots as unit-norm columns and h is sparse (one coefficient per
pilot). Candidates whose characteristic value |h_k|^2 reaches the threshold
survive into the potential list.

Scaling convention: the raw pilot entries are unit modulus, so normalizing
columns divides by sqrt(Q); the observation is divided by sqrt(Q) to match.
Under this convention an active UE's coefficient estimates its band-average
channel gain (unit power on average), which is what makes absolute
thresholds like 0.01 meaningful.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["FocussParams", "ActivityEstimate", "focuss", "threshold_aud", "detect_activity"]


@dataclass(frozen=True)
class FocussParams:
    """FOCUSS iteration controls.

    p is the diversity exponent (the reweighting uses |h|^(2-p)); lambda_reg
    is the Tikhonov term of the inner solve, with None meaning noise-matched
    (the caller substitutes the noise variance of the normalized system).
    """

    p: float = 1.0
    lambda_reg: float | None = None
    max_iter: int = 30
    tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.p <= 2:
            raise ValueError(f"diversity exponent must be in (0, 2], got {self.p}")
        if self.lambda_reg is not None and self.lambda_reg < 0:
            raise ValueError("lambda_reg must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class ActivityEstimate:
    """Sparse coefficient vector, its characteristic values and the survivors."""

    h: np.ndarray
    char_values: np.ndarray
    potential_list: np.ndarray


def focuss(S: np.ndarray, y: np.ndarray, params: FocussParams = FocussParams(),
           lambda_reg: float | None = None) -> np.ndarray:
    """Iteratively reweighted sparse solve of y = S h.

    h <- D S^H (S D S^H + lambda I)^-1 y with D = diag(|h|^(2-p)), starting
    from the matched filter h = S^H y. Stops on relative change < tol or
    max_iter. A singular inner system (possible only at lambda = 0 once D
    collapses) emits a RuntimeWarning and returns the last iterate.
    """
    S = np.asarray(S)
    y = np.asarray(y, dtype=complex)
    if S.ndim != 2 or y.shape != (S.shape[0],):
        raise ValueError(f"shape mismatch: S {S.shape}, y {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("observation contains non-finite entries")
    lam = params.lambda_reg if lambda_reg is None else lambda_reg
    if lam is None:
        raise ValueError("lambda_reg not set (pass it or put it in FocussParams)")

    Q = S.shape[0]
    h = S.conj().T @ y
    eye = np.eye(Q)
    for _ in range(params.max_iter):
        D = np.abs(h) ** (2.0 - params.p)
        A = (S * D) @ S.conj().T + lam * eye
        try:
            z = np.linalg.solve(A, y)
        except np.linalg.LinAlgError:
            warnings.warn("FOCUSS inner system singular; returning last iterate",
                          RuntimeWarning, stacklevel=2)
            return h
        h_next = D * (S.conj().T @ z)
        delta = np.linalg.norm(h_next - h)
        h = h_next
        if delta < params.tol * max(np.linalg.norm(h), 1e-30):
            break
    return h


def threshold_aud(h: np.ndarray, lambda_aud: float) -> np.ndarray:
    """Indices (ascending) whose characteristic value |h_k|^2 >= lambda_aud."""
    if lambda_aud <= 0:
        raise ValueError(f"activity threshold must be > 0, got {lambda_aud}")
    char = np.abs(np.asarray(h)) ** 2
    return np.where(char >= lambda_aud)[0]


def detect_activity(S_unit: np.ndarray, y_pilot: np.ndarray, sigma2: float,
                    lambda_aud: float, params: FocussParams = FocussParams()) -> ActivityEstimate:
    """Run FOCUSS on the normalized system and threshold the result.

    S_unit has unit-norm columns; y_pilot is the raw pilot observation, scaled
    here by 1/sqrt(Q). The noise-matched regularizer in the scaled system is
    sigma2 / Q.
    """
    Q = S_unit.shape[0]
    lam = params.lambda_reg
    if lam is None:
        lam = sigma2 / Q
    h = focuss(S_unit, y_pilot / np.sqrt(Q), params, lambda_reg=lam)
    char = np.abs(h) ** 2
    return ActivityEstimate(h=h, char_values=char,
                            potential_list=threshold_aud(h, lambda_aud))
