"""
Beam selection from calibration sweeps.
"""

from __future__ import annotations

from typing import List, Set, Tuple, Union

import numpy as np

from app.core.airlink import ObservationMatrix
from app.core.errors import PerturbationError
from app.core.logger import setup_logger
from app.core.model import BeamformerMatrix

logger = setup_logger(__name__)

MAX_PERTURB_RETRIES = 32
PERTURB_MAX_CONDITION = 1e3


def _magnitudes(obs: Union[ObservationMatrix, np.ndarray]) -> np.ndarray:
    data = obs.data if isinstance(obs, ObservationMatrix) else np.asarray(obs)
    if data.size == 0:
        raise ValueError("observation matrix is empty")
    return np.abs(data)


def best_beam_pair(obs: Union[ObservationMatrix, np.ndarray]) -> Tuple[int, int]:
    """
    (tx, rx) indices of the strongest entry of Y′ (rows rx, columns tx).

    Ties go to the smallest tx index, then the smallest rx index.
    """
    mags = _magnitudes(obs)
    rx_idx, tx_idx = np.nonzero(mags == mags.max())
    return min(zip(tx_idx.tolist(), rx_idx.tolist()))


def ranked_beam_pairs(
    obs: Union[ObservationMatrix, np.ndarray],
) -> List[Tuple[int, int]]:
    """Every (tx, rx) pair, strongest first; ties as in best_beam_pair."""
    mags = _magnitudes(obs)
    rx_idx, tx_idx = np.indices(mags.shape)
    order = np.lexsort((rx_idx.ravel(), tx_idx.ravel(), -mags.ravel()))
    return [(int(tx_idx.flat[i]), int(rx_idx.flat[i])) for i in order]


def filter_pairs_by_snr(
    obs: Union[ObservationMatrix, np.ndarray],
    sigma_z2: float,
    threshold_db: float,
) -> Set[Tuple[int, int]]:
    """(tx, rx) pairs with |Y′[rx, tx]|²/σ_z² at or above the threshold."""
    if sigma_z2 <= 0:
        raise ValueError(f"sigma_z2 must be > 0, got {sigma_z2}")
    snr = _magnitudes(obs) ** 2 / sigma_z2
    limit = 10.0 ** (threshold_db / 10.0)
    rx_idx, tx_idx = np.nonzero(snr >= limit)
    return set(zip(tx_idx.tolist(), rx_idx.tolist()))


def perturb_full_rank(
    selected: BeamformerMatrix,
    epsilon: float,
    rng: np.random.Generator,
    max_retries: int = MAX_PERTURB_RETRIES,
    max_condition: float = PERTURB_MAX_CONDITION,
) -> BeamformerMatrix:
    """
    Grow C selected beams into a full-rank M × M beam set.

    Columns are replicated cyclically and every entry gets an independent
    phase jitter in (−ε, ε), redrawn until the condition number is acceptable.

    Args:
        selected: M × C phase-only beams, 1 ≤ C ≤ M
        epsilon: Phase jitter half-width in radians, 0 < ε ≤ π
        rng: Random source for the jitter
        max_retries: Draws before giving up
        max_condition: Largest accepted condition number

    Returns:
        Full-rank phase-only BeamformerMatrix
    """
    m, c = selected.columns.shape
    if not 1 <= c <= m:
        raise ValueError(f"need 1 <= columns <= antennas, got {c} columns for {m}")
    if not 0 < epsilon <= np.pi:
        raise ValueError(f"epsilon must be in (0, π], got {epsilon}")

    base = selected.columns[:, np.arange(m) % c]
    cond = float("inf")
    for attempt in range(max_retries):
        jitter = np.exp(1j * rng.uniform(-epsilon, epsilon, size=(m, m)))
        candidate = base * jitter
        cond = float(np.linalg.cond(candidate))
        if np.isfinite(cond) and cond <= max_condition:
            logger.debug(
                f"perturbed set accepted on draw {attempt + 1}, cond {cond:.3g}"
            )
            return BeamformerMatrix.from_columns(candidate)
        logger.warning(
            f"perturbation draw {attempt + 1} has condition number {cond:.3g}, retrying"
        )
    raise PerturbationError(
        f"no full-rank set after {max_retries} draws at epsilon={epsilon} "
        f"(last condition number {cond:.3g}); try a larger epsilon"
    )


def select_beams(
    obs: ObservationMatrix,
    codebook: BeamformerMatrix,
    sigma_z2: float,
    threshold_db: float,
    epsilon: float,
    rng: np.random.Generator,
) -> BeamformerMatrix:
    """
    Transmit beams of all SNR-qualified pairs, perturbed to a full-rank set.

    Falls back to the best pair when no pair clears the threshold. rng drives
    the jitter and must come from the caller's seed stream.
    """
    if rng is None:
        raise ValueError("select_beams needs a seeded generator")
    pairs = filter_pairs_by_snr(obs, sigma_z2, threshold_db)
    if not pairs:
        logger.warning("no beam pair above threshold, using the best pair only")
        pairs = {best_beam_pair(obs)}
    tx_indices = sorted({tx for tx, _ in pairs})
    chosen = BeamformerMatrix(codebook.columns[:, tx_indices])
    return perturb_full_rank(chosen, epsilon, rng)
