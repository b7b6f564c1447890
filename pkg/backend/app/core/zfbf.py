"""
Cooperative zero-forcing precoding and sum-rate evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from app.core.errors import (
    DimensionMismatchError,
    InvalidSinrError,
    RankDeficiencyError,
)
from app.core.logger import setup_logger

logger = setup_logger(__name__)

MAX_GRAM_CONDITION = 1e8


@dataclass(frozen=True)
class PrecodingSetup:
    W: np.ndarray
    powers: np.ndarray
    noise: float

    @classmethod
    def equal_power(
        cls, W: np.ndarray, total_power: float, noise: float
    ) -> "PrecodingSetup":
        users = W.shape[1]
        return cls(W, np.full(users, total_power / users), noise)


def zf_precoder(H_hat: np.ndarray, normalize: bool = True) -> np.ndarray:
    """
    Pseudo-inverse of H_hatᵀ, so that H_hatᵀ·W = I before normalization.

    With H = H_hat this is W = H*(HᵀH*)⁻¹. The conjugates are what make it the
    pseudo-inverse of Hᵀ for complex channels; the unconjugated H(HᵀH)⁻¹ also
    inverts Hᵀ but is not the minimum-norm solution.

    Args:
        H_hat: (Σ M_k) × U channel estimate, users as columns
        normalize: Scale each column to unit norm

    Returns:
        (Σ M_k) × U precoder
    """
    H = np.asarray(H_hat, dtype=complex)
    if H.ndim != 2:
        raise DimensionMismatchError(f"H_hat must be a matrix, got {H.shape}")
    gram = H.T @ H.conj()
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond >= MAX_GRAM_CONDITION:
        raise RankDeficiencyError(
            f"channel Gram matrix is singular (condition {cond:.3e}); "
            f"{H.shape[0]} antennas cannot separate {H.shape[1]} users"
        )
    W = H.conj() @ scipy.linalg.inv(gram)
    if normalize:
        W = W / np.linalg.norm(W, axis=0, keepdims=True)
    return W


def sinr_per_user(H_true: np.ndarray, setup: PrecodingSetup) -> np.ndarray:
    """
    SINR_u = P_u|h_uᵀw_u|² / (Σ_{v≠u} P_v|h_uᵀw_v|² + σ²).
    """
    H = np.asarray(H_true, dtype=complex)
    if H.shape != setup.W.shape:
        raise DimensionMismatchError(
            f"H_true is {H.shape}, precoder is {setup.W.shape}"
        )
    if setup.powers.shape != (H.shape[1],):
        raise DimensionMismatchError(
            f"{setup.powers.shape[0]} powers for {H.shape[1]} users"
        )
    gains = np.abs(H.T @ setup.W) ** 2 * setup.powers[None, :]
    signal = np.diag(gains).copy()
    off_diagonal = ~np.eye(gains.shape[0], dtype=bool)
    interference = np.where(off_diagonal, gains, 0.0).sum(axis=1)
    return signal / (interference + setup.noise)


def sum_rate(sinrs: np.ndarray) -> float:
    """Σ log₂(1 + SINR_u) in bits/s/Hz."""
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0):
        raise InvalidSinrError(f"SINR must be >= 0, got {sinrs.min()}")
    return float(np.sum(np.log2(1.0 + sinrs)))
