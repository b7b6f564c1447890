"""
Effective-channel estimation: UL from pilots, DL from UL plus calibration,
and the multi-AP stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.core.airlink import Direction, Link, gather_observations, group_receive_beams
from app.core.calibration import unmix_observation
from app.core.errors import (
    DegenerateRatioError,
    DimensionMismatchError,
    ZeroCoefficientError,
)
from app.core.logger import setup_logger
from app.core.model import BeamformerMatrix

logger = setup_logger(__name__)


@dataclass(frozen=True)
class EffectiveChannel:
    """Hardware-inclusive channel between analog beamformers, rx × tx."""

    matrix: np.ndarray
    direction: Direction
    known_up_to_scale: bool = True
    ap_id: int = 0
    pilots_used: int = 0


def estimate_ul_effective(
    link: Link,
    ap_beams: BeamformerMatrix,
    mu_beams: BeamformerMatrix,
    r1_ap_hat: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    ap_id: int = 0,
) -> EffectiveChannel:
    """
    Estimate R2·Hᵀ·T2′ (M_ap × M_mu) up to one complex scale.

    Args:
        link: AP → MU link; the MU transmits on its reverse
        ap_beams: Full-rank M_ap × M_ap AP codebook
        mu_beams: Full-rank M_mu × M_mu MU codebook
        r1_ap_hat: AP receive digital ratios from the digital step
        rng: Noise source
        ap_id: Index of the AP, carried on the result

    Returns:
        UL EffectiveChannel after M_mu·⌈M_ap/N_ap⌉ transmissions
    """
    reverse = link.reverse()
    obs = gather_observations(
        reverse,
        mu_beams,
        group_receive_beams(ap_beams, link.tx_profile.num_chains),
        rng,
    )
    matrix = unmix_observation(obs.data, ap_beams, mu_beams, r1_ap_hat)
    return EffectiveChannel(
        matrix=matrix,
        direction=Direction.UL,
        known_up_to_scale=True,
        ap_id=ap_id,
        pilots_used=obs.pilots_used,
    )


def dl_from_ul(
    ul: EffectiveChannel, alpha_ap: np.ndarray, alpha_mu: np.ndarray
) -> EffectiveChannel:
    """DL = diag(α_mu)·ULᵀ·diag(α_ap)⁻¹."""
    alpha_ap = np.asarray(alpha_ap, dtype=complex)
    alpha_mu = np.asarray(alpha_mu, dtype=complex)
    rows, cols = ul.matrix.shape
    if alpha_ap.shape != (rows,):
        raise DimensionMismatchError(
            f"alpha_ap has shape {alpha_ap.shape}, UL channel has {rows} AP antennas"
        )
    if alpha_mu.shape != (cols,):
        raise DimensionMismatchError(
            f"alpha_mu has shape {alpha_mu.shape}, UL channel has {cols} MU antennas"
        )
    if np.any(alpha_ap == 0) or np.any(alpha_mu == 0):
        raise ZeroCoefficientError("alpha has a zero entry")

    matrix = alpha_mu[:, None] * ul.matrix.T / alpha_ap[None, :]
    return EffectiveChannel(
        matrix=matrix,
        direction=Direction.DL,
        known_up_to_scale=ul.known_up_to_scale,
        ap_id=ul.ap_id,
        pilots_used=ul.pilots_used,
    )


def user_columns(
    dl_channels: Sequence[EffectiveChannel], combiners: Sequence[np.ndarray]
) -> np.ndarray:
    """
    Per-user DL rows of one AP, stacked as columns (M_ap × U).

    Column u is (b_uᵀ·DL_u)ᵀ where b_u is user u's combining beam.
    """
    if len(dl_channels) != len(combiners):
        raise DimensionMismatchError(
            f"{len(dl_channels)} channels for {len(combiners)} combiners"
        )
    columns = []
    for u, (dl, b) in enumerate(zip(dl_channels, combiners)):
        b = np.asarray(b, dtype=complex)
        if dl.matrix.shape[0] != b.shape[0]:
            raise DimensionMismatchError(
                f"user {u}: combiner has {b.shape[0]} entries, channel has "
                f"{dl.matrix.shape[0]} MU antennas"
            )
        columns.append(dl.matrix.T @ b)
    return np.stack(columns, axis=1)


def assemble_multi_ap(
    dl_blocks: Sequence[np.ndarray], ratios: Sequence[complex]
) -> np.ndarray:
    """
    Stack per-AP DL blocks (M_k × U) into one (Σ M_k) × U channel.

    Block k is divided by ratios[k] so every block shares the reference AP's
    scale; ratios[0] belongs to the reference and must be 1.
    """
    if len(dl_blocks) == 0:
        raise ValueError("need at least one AP block")
    if len(dl_blocks) != len(ratios):
        raise DimensionMismatchError(
            f"{len(dl_blocks)} blocks for {len(ratios)} ratios"
        )
    if abs(complex(ratios[0]) - 1.0) > 1e-12:
        raise ValueError(f"reference ratio must be 1, got {ratios[0]}")

    blocks = [np.asarray(b, dtype=complex) for b in dl_blocks]
    users = blocks[0].shape[1]
    scaled = []
    for k, (block, c) in enumerate(zip(blocks, ratios)):
        if block.ndim != 2 or block.shape[1] != users:
            raise DimensionMismatchError(
                f"AP {k} block is {block.shape}, expected {users} user columns"
            )
        if c == 0:
            raise DegenerateRatioError(f"AP {k} ratio is zero")
        scaled.append(block / complex(c))
    return np.vstack(scaled)
