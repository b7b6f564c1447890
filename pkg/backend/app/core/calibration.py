"""
Two-step reciprocity calibration between node pairs.

Digital step: one pilot per tx digital chain through a fixed beam pair gives a
rank-1 matrix r·h·tᵀ, factored by truncated SVD.

Analog step: full-rank beam sweeps in both directions, unmixed with the
digitally corrected beamformers, give X = c·R2ᴮHT2ᴬ and Z = c′·T2ᴮHR2ᴬ.
Then x_ij·α_j = β·z_ij·α′_i, solved as a homogeneous least-squares problem
with β folded into α′.

Also hosts the reciprocal tandem transform and the two-pilot inter-AP ratio
exchange. Every estimate is normalized to first element 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from app.core.airlink import (
    PILOT,
    Link,
    ObservationMatrix,
    gather_broadcast,
    gather_observations,
    group_receive_beams,
    single_beam,
    transmit,
)
from app.core.errors import (
    ConditioningError,
    DegenerateChannelError,
    DegenerateRatioError,
    DimensionMismatchError,
    NormalizationError,
    ZeroCoefficientError,
)
from app.core.logger import format_vector, setup_logger
from app.core.model import BeamformerMatrix

logger = setup_logger(__name__)

NORMALIZATION_RTOL = 1e-12
DEGENERATE_H_ATOL = 1e-10
MAX_CONDITION = 1e6
# second-smallest singular value below this (relative) means a wider nullspace
AMBIGUITY_RTOL = 1e-9
RATIO_RTOL = 1e-12


class DigitalEstimate(NamedTuple):
    """Digital step output for one direction: tx transmit and rx receive chains."""

    t1_tx: np.ndarray
    r1_rx: np.ndarray


@dataclass(frozen=True)
class DigitalPair:
    """Digital estimates from both directions of one link (forward tx = node A)."""

    forward: DigitalEstimate
    reverse: DigitalEstimate

    @property
    def t1_tx(self) -> np.ndarray:
        return self.forward.t1_tx

    @property
    def r1_rx(self) -> np.ndarray:
        return self.forward.r1_rx

    @property
    def t1_rx(self) -> np.ndarray:
        return self.reverse.t1_tx

    @property
    def r1_tx(self) -> np.ndarray:
        return self.reverse.r1_rx


@dataclass(frozen=True)
class CalibrationEstimate:
    """
    Calibration of one link, every vector normalized to first element 1.

    t1_hat/r1_hat belong to the forward tx node, the *_peer fields to the rx
    node. alpha_hat_peer also absorbs the unknown β.
    """

    t1_hat: np.ndarray
    r1_hat_peer: np.ndarray
    alpha_hat: np.ndarray
    alpha_hat_peer: np.ndarray
    residual: float
    r1_hat: Optional[np.ndarray] = None
    t1_hat_peer: Optional[np.ndarray] = None
    ambiguous: bool = False
    dl_observation: Optional[ObservationMatrix] = field(default=None, repr=False)
    ul_observation: Optional[ObservationMatrix] = field(default=None, repr=False)


class AnalogSolution(NamedTuple):
    alpha: np.ndarray
    alpha_peer: np.ndarray
    residual: float


class JointAnalogEstimate(NamedTuple):
    alpha: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray


@dataclass(frozen=True)
class StarSolution:
    """Homogeneous LS solution for one hub node and any number of peers."""

    alpha: np.ndarray
    peers: Tuple[np.ndarray, ...]
    residual: float
    ambiguous: bool


class BeamRole(str, Enum):
    RECEIVE = "receive"
    TRANSMIT = "transmit"


def _normalize_first(vec: np.ndarray, scale: float, name: str) -> np.ndarray:
    if abs(vec[0]) < NORMALIZATION_RTOL * scale:
        raise NormalizationError(
            f"{name}[0] is numerically zero (|{name}[0]| = {abs(vec[0]):.3e}); "
            "cannot normalize to first element"
        )
    return vec / vec[0]


def solve_rank1_ls(Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Best rank-1 factorization Y ≈ r·tᵀ (any scalar absorbed).

    Args:
        Y: Nonzero N_rx × N_tx complex matrix

    Returns:
        (r, t), each normalized to first element 1
    """
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim != 2:
        raise DimensionMismatchError(f"Y must be a matrix, got shape {Y.shape}")
    norm = float(np.linalg.norm(Y))
    if norm == 0:
        raise NormalizationError("Y is all zeros; rank-1 factors are undefined")

    u, s, vh = scipy.linalg.svd(Y)
    root = np.sqrt(s[0])
    r = u[:, 0] * root
    t = vh[0, :] * root
    return _normalize_first(r, norm, "r"), _normalize_first(t, norm, "t")


def rank1_residual(Y: np.ndarray) -> float:
    """Frobenius residual of the best rank-1 approximation."""
    s = scipy.linalg.svdvals(np.asarray(Y, dtype=complex))
    return float(np.sum(s[1:] ** 2))


def digital_calibration(
    link: Link,
    f1: np.ndarray,
    b1: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    pilot: complex = PILOT,
) -> DigitalEstimate:
    """
    Estimate tx transmit and rx receive digital coefficients of one direction.

    Sends one pilot per tx digital chain through the fixed beams f1/b1 and
    factors the N_rx × N_tx result.
    """
    tx, rx = link.tx_profile, link.rx_profile
    tx_beam = single_beam(f1, tx.num_chains)
    rx_beam = single_beam(b1, rx.num_chains)

    Y = np.zeros((rx.num_chains, tx.num_chains), dtype=complex)
    for i in range(tx.num_chains):
        x = np.zeros(tx.num_chains, dtype=complex)
        x[i] = pilot
        Y[:, i] = transmit(link, tx_beam, x, rx_beam, rng)

    if np.linalg.norm(Y) < DEGENERATE_H_ATOL:
        raise DegenerateChannelError(
            f"digital observations vanish (‖Y‖ = {np.linalg.norm(Y):.3e}); "
            "beam pair is orthogonal to the channel"
        )
    r, t = solve_rank1_ls(Y)
    logger.debug(
        f"digital {link.direction.value}: {tx.num_chains} pilots, "
        f"residual {rank1_residual(Y):.3e}, t1 {format_vector(t)}"
    )
    return DigitalEstimate(t1_tx=t, r1_rx=r)


def _digital_with_fallback(
    link: Link,
    tx_book: BeamformerMatrix,
    rx_book: BeamformerMatrix,
    rng: Optional[np.random.Generator],
) -> DigitalEstimate:
    attempts = max(tx_book.num_columns, rx_book.num_columns)
    last_error: Optional[DegenerateChannelError] = None
    for q in range(attempts):
        try:
            return digital_calibration(
                link,
                tx_book.column(q % tx_book.num_columns),
                rx_book.column(q % rx_book.num_columns),
                rng,
            )
        except DegenerateChannelError as exc:
            logger.warning(f"beam pair {q} degenerate, trying the next codebook column")
            last_error = exc
    raise DegenerateChannelError(
        f"no usable beam pair in {attempts} codebook columns"
    ) from last_error


def calibrate_digital_pair(
    link: Link,
    tx_book: BeamformerMatrix,
    rx_book: BeamformerMatrix,
    rng: Optional[np.random.Generator] = None,
) -> DigitalPair:
    """Digital step in both directions, falling back through codebook columns."""
    forward = _digital_with_fallback(link, tx_book, rx_book, rng)
    reverse = _digital_with_fallback(link.reverse(), rx_book, tx_book, rng)
    return DigitalPair(forward=forward, reverse=reverse)


def _check_conditioning(matrix: np.ndarray, name: str) -> None:
    cond = float(np.linalg.cond(matrix))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(
            f"{name} condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}"
        )


def unmix_observation(
    Y: np.ndarray,
    rx_beams: BeamformerMatrix,
    tx_beams: BeamformerMatrix,
    r1_rx_hat: np.ndarray,
) -> np.ndarray:
    """
    Remove the beamformers from a stacked observation.

    Receive beam m sat on digital chain m mod N, so its column is scaled by the
    estimated r1 ratio of that chain before inversion:
    result = (B̃ᵀ)⁻¹ · Y · F⁻¹ with B̃ = B·diag(r̂).
    """
    Y = np.asarray(Y, dtype=complex)
    r1 = np.asarray(r1_rx_hat, dtype=complex)
    if Y.shape != (rx_beams.num_columns, tx_beams.num_columns):
        raise DimensionMismatchError(
            f"observation is {Y.shape}, beams are "
            f"{rx_beams.num_columns} rx × {tx_beams.num_columns} tx"
        )
    if rx_beams.num_antennas != rx_beams.num_columns:
        raise DimensionMismatchError("rx_beams must be square")
    if tx_beams.num_antennas != tx_beams.num_columns:
        raise DimensionMismatchError("tx_beams must be square")

    chain = np.arange(rx_beams.num_columns) % r1.shape[0]
    rx_mod = rx_beams.columns * r1[chain][None, :]
    _check_conditioning(rx_mod, "receive beamformer")
    _check_conditioning(tx_beams.columns, "transmit beamformer")

    left = scipy.linalg.solve(rx_mod.T, Y)
    return scipy.linalg.solve(tx_beams.columns.T, left.T).T


def build_xz(
    dl_obs: ObservationMatrix,
    ul_obs: ObservationMatrix,
    tx_beams: BeamformerMatrix,
    rx_beams: BeamformerMatrix,
    digital: DigitalPair,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    X = B̃⁻ᵀ·Y′·F⁻¹ from the forward sweep, Z = B⁻ᵀ·Ỹᵀ·F̃⁻¹ from the reverse one.

    Both are M_rx × M_tx.
    """
    X = unmix_observation(dl_obs.data, rx_beams, tx_beams, digital.r1_rx)
    Z = unmix_observation(ul_obs.data, tx_beams, rx_beams, digital.r1_tx).T
    return X, Z


def _homogeneous_rows(
    X: np.ndarray, Z: np.ndarray, offset: int, width: int
) -> np.ndarray:
    rows_count, cols = X.shape
    idx = np.arange(rows_count * cols)
    i, j = np.divmod(idx, cols)
    rows = np.zeros((idx.shape[0], width), dtype=complex)
    rows[idx, j] = X[i, j]
    rows[idx, offset + i] = -Z[i, j]
    return rows


def solve_star_analog_ls(
    pairs: Sequence[Tuple[np.ndarray, np.ndarray]],
) -> StarSolution:
    """
    Joint homogeneous LS over a hub node and its peers.

    Unknowns are [α; α′₁; α′₂; ...]; pair p contributes rows
    x_ij·α_j − z_ij·α′ₚ,i. Solution is the smallest right singular vector,
    each block then normalized to its first element.
    """
    if not pairs:
        raise ValueError("need at least one (X, Z) pair")
    mats = [
        (np.asarray(X, dtype=complex), np.asarray(Z, dtype=complex))
        for X, Z in pairs
    ]
    hub = mats[0][0].shape[1]
    for p, (X, Z) in enumerate(mats):
        if X.shape != Z.shape:
            raise DimensionMismatchError(f"pair {p}: X is {X.shape}, Z is {Z.shape}")
        if X.shape[1] != hub:
            raise DimensionMismatchError(
                f"pair {p}: X has {X.shape[1]} columns, expected {hub}"
            )

    offsets = []
    width = hub
    for X, _ in mats:
        offsets.append(width)
        width += X.shape[0]

    A = np.vstack(
        [_homogeneous_rows(X, Z, o, width) for (X, Z), o in zip(mats, offsets)]
    )
    if not np.any(A):
        raise NormalizationError("X and Z are both zero; no calibration information")

    _, s, vh = scipy.linalg.svd(A, full_matrices=True)
    sing = np.zeros(width)
    sing[: s.shape[0]] = s
    v = vh[-1].conj()
    residual = float(sing[-1] ** 2)
    ambiguous = width >= 2 and sing[-2] <= AMBIGUITY_RTOL * sing[0]
    if ambiguous:
        logger.warning(
            "analog system has a nullspace wider than the scale ambiguity; "
            "estimates are not unique"
        )

    alpha = _normalize_first(v[:hub], 1.0, "alpha")
    peers = tuple(
        _normalize_first(v[o : o + X.shape[0]], 1.0, f"alpha_peer{p}")
        for p, ((X, _), o) in enumerate(zip(mats, offsets))
    )
    logger.debug(
        f"analog LS: {A.shape[0]}x{A.shape[1]}, residual {residual:.3e}, "
        f"gap {sing[-2] if width >= 2 else 0.0:.3e}"
    )
    return StarSolution(
        alpha=alpha, peers=peers, residual=residual, ambiguous=ambiguous
    )


def solve_analog_ls(X: np.ndarray, Z: np.ndarray) -> AnalogSolution:
    """
    Minimize Σ|x_ij·α_j − z_ij·α′_i|² over ‖[α; α′]‖ = 1.

    Returns:
        (alpha, alpha_peer, residual) with both vectors normalized to first
        element 1 and residual the smallest squared singular value
    """
    solution = solve_star_analog_ls([(X, Z)])
    return AnalogSolution(solution.alpha, solution.peers[0], solution.residual)


def analog_calibration(
    link: Link,
    tx_beams: BeamformerMatrix,
    rx_beams: BeamformerMatrix,
    digital: DigitalPair,
    rng: Optional[np.random.Generator] = None,
) -> CalibrationEstimate:
    """
    Analog step for one link.

    Sweeps tx_beams against grouped rx_beams in the forward direction and the
    reverse, builds X/Z and solves for α (tx node) and α′ (rx node).
    Costs M_tx·⌈M_rx/N_rx⌉ + M_rx·⌈M_tx/N_tx⌉ pilots.
    """
    tx, rx = link.tx_profile, link.rx_profile
    dl_obs = gather_observations(
        link, tx_beams, group_receive_beams(rx_beams, rx.num_chains), rng
    )
    ul_obs = gather_observations(
        link.reverse(), rx_beams, group_receive_beams(tx_beams, tx.num_chains), rng
    )
    X, Z = build_xz(dl_obs, ul_obs, tx_beams, rx_beams, digital)
    solution = solve_star_analog_ls([(X, Z)])

    return CalibrationEstimate(
        t1_hat=digital.t1_tx,
        r1_hat_peer=digital.r1_rx,
        alpha_hat=solution.alpha,
        alpha_hat_peer=solution.peers[0],
        residual=solution.residual,
        r1_hat=digital.r1_tx,
        t1_hat_peer=digital.t1_rx,
        ambiguous=solution.ambiguous,
        dl_observation=dl_obs,
        ul_observation=ul_obs,
    )


def calibrate_link(
    link: Link,
    tx_beams: BeamformerMatrix,
    rx_beams: BeamformerMatrix,
    rng: Optional[np.random.Generator] = None,
) -> CalibrationEstimate:
    """Digital then analog calibration of one link."""
    digital = calibrate_digital_pair(link, tx_beams, rx_beams, rng)
    return analog_calibration(link, tx_beams, rx_beams, digital, rng)


def reciprocal_tandem(
    beam: np.ndarray, alpha: np.ndarray, direction: BeamRole | str
) -> np.ndarray:
    """
    Reciprocal tandem of a beam: α⊙f for a receive beam, f/α for a transmit beam.
    """
    role = BeamRole(direction)
    beam = np.asarray(beam, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    if beam.shape != alpha.shape:
        raise DimensionMismatchError(
            f"beam has shape {beam.shape}, alpha has shape {alpha.shape}"
        )
    if np.any(alpha == 0):
        raise ZeroCoefficientError("alpha has a zero entry; tandem is undefined")
    return alpha * beam if role is BeamRole.RECEIVE else beam / alpha


def inter_ap_ratio(
    alpha_ref: np.ndarray,
    alpha_peer: np.ndarray,
    link: Link,
    f11: np.ndarray,
    b21: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    pilot: complex = PILOT,
) -> complex:
    """
    Two-pilot exchange estimating the inter-AP scale ratio c.

    Args:
        alpha_ref: Normalized analog estimate of the reference AP (link tx)
        alpha_peer: Normalized analog estimate of the other AP (link rx)
        link: Reference → peer link
        f11: Reference AP transmit beam
        b21: Peer AP receive beam

    Returns:
        ỹ₁₂/ỹ₂₁, the factor by which the peer's DL estimate is scaled relative
        to the reference's
    """
    ref, peer = link.tx_profile, link.rx_profile
    x_ref = np.zeros(ref.num_chains, dtype=complex)
    x_ref[0] = pilot
    y12 = transmit(
        link,
        single_beam(f11, ref.num_chains),
        x_ref,
        single_beam(b21, peer.num_chains),
        rng,
    )[0]

    peer_tx = reciprocal_tandem(b21, alpha_peer, BeamRole.RECEIVE)
    ref_rx = reciprocal_tandem(f11, alpha_ref, BeamRole.TRANSMIT)
    x_peer = np.zeros(peer.num_chains, dtype=complex)
    x_peer[0] = pilot
    y21 = transmit(
        link.reverse(),
        single_beam(peer_tx, peer.num_chains),
        x_peer,
        single_beam(ref_rx, ref.num_chains),
        rng,
    )[0]

    if y21 == 0 or abs(y21) < RATIO_RTOL * abs(y12):
        raise DegenerateRatioError(
            f"reverse observation |ỹ21| = {abs(y21):.3e} too small against "
            f"|ỹ12| = {abs(y12):.3e}"
        )
    c_hat = complex(y12 / y21)
    logger.debug(f"inter-AP ratio {c_hat:.6g}")
    return c_hat


def joint_analog_calibration(
    link12: Link,
    link13: Link,
    tx_beams: BeamformerMatrix,
    rx_beams: BeamformerMatrix,
    digital12: DigitalPair,
    digital13: DigitalPair,
    rng: Optional[np.random.Generator] = None,
) -> JointAnalogEstimate:
    """
    Analog calibration of node 1 against nodes 2 and 3 at once.

    Node 1's forward sweep is a broadcast heard by both peers; each peer then
    sweeps back separately. The stacked system shares α, which is why node 1's
    estimate uses twice the equations of a pairwise run.
    """
    hub = link12.tx_profile
    if link13.tx_profile is not hub:
        raise ValueError("both links must start at node 1")

    dl12, dl13 = gather_broadcast(
        [link12, link13],
        tx_beams,
        [
            group_receive_beams(rx_beams, link12.rx_profile.num_chains),
            group_receive_beams(rx_beams, link13.rx_profile.num_chains),
        ],
        rng,
    )
    hub_groups = group_receive_beams(tx_beams, hub.num_chains)
    ul12 = gather_observations(link12.reverse(), rx_beams, hub_groups, rng)
    ul13 = gather_observations(link13.reverse(), rx_beams, hub_groups, rng)

    X, Z = build_xz(dl12, ul12, tx_beams, rx_beams, digital12)
    U, V = build_xz(dl13, ul13, tx_beams, rx_beams, digital13)
    solution = solve_star_analog_ls([(X, Z), (U, V)])
    return JointAnalogEstimate(solution.alpha, solution.peers[0], solution.peers[1])
