"""
Pilot transmissions through the full hybrid chain.

A transmission from node A to node B is
    y = R1ᴮ · Bᵀ · R2ᴮ · H · T2ᴬ · F · T1ᴬ · x + z
with z ~ CN(0, σ_z² I) on B's digital chains. Every transmit event is
recorded on the link's PilotCounter, which is the single source of truth
for overhead accounting.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from app.core.errors import DimensionMismatchError
from app.core.logger import setup_logger
from app.core.model import BeamformerMatrix, MultipathChannel, NodeProfile

logger = setup_logger(__name__)

PILOT = 1.0 + 0.0j


class Direction(str, Enum):
    DL = "dl"
    UL = "ul"

    @property
    def flipped(self) -> "Direction":
        return Direction.UL if self is Direction.DL else Direction.DL


class PilotCounter:
    """Transmission counts per direction, shared by a link and its reverse."""

    def __init__(self) -> None:
        self._counts: Counter = Counter()

    def record(self, direction: Direction, count: int = 1) -> None:
        self._counts[Direction(direction)] += count

    def count(self, direction: Direction) -> int:
        return self._counts[Direction(direction)]

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def snapshot(self) -> dict:
        return {d.value: self._counts[d] for d in Direction}

    def __repr__(self) -> str:
        dl, ul = self.count(Direction.DL), self.count(Direction.UL)
        return f"PilotCounter(dl={dl}, ul={ul})"


@dataclass
class Link:
    """
    One node pair with the channel oriented tx → rx.

    The forward orientation is DL. reverse() swaps the profiles, transposes
    the channel and keeps the same counter.
    """

    tx_profile: NodeProfile
    rx_profile: NodeProfile
    channel: MultipathChannel
    noise_variance: float = 0.0
    counter: PilotCounter = field(default_factory=PilotCounter)
    direction: Direction = Direction.DL

    def __post_init__(self) -> None:
        expected = (self.rx_profile.num_antennas, self.tx_profile.num_antennas)
        if self.channel.matrix.shape != expected:
            raise DimensionMismatchError(
                f"channel is {self.channel.matrix.shape}, expected {expected} "
                "(rx antennas × tx antennas)"
            )
        if self.noise_variance < 0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")

    @property
    def tx_counter(self) -> int:
        return self.counter.total

    def pilots(self, direction: Direction) -> int:
        return self.counter.count(direction)

    def reverse(self) -> "Link":
        return Link(
            tx_profile=self.rx_profile,
            rx_profile=self.tx_profile,
            channel=self.channel.transposed(),
            noise_variance=self.noise_variance,
            counter=self.counter,
            direction=self.direction.flipped,
        )


@dataclass(frozen=True)
class ObservationMatrix:
    """Stacked observations: row = receive beam, column = transmit beam."""

    data: np.ndarray
    pilots_used: int
    direction: Direction

    @property
    def shape(self) -> tuple:
        return self.data.shape


def single_beam(beam: np.ndarray, num_chains: int) -> BeamformerMatrix:
    """Beamformer that drives every digital chain through the same analog beam."""
    beam = np.asarray(beam, dtype=complex).reshape(-1)
    return BeamformerMatrix(np.tile(beam[:, None], (1, num_chains)))


def group_receive_beams(
    beams: BeamformerMatrix, num_chains: int
) -> List[BeamformerMatrix]:
    """
    Split M receive beams into ⌈M/N⌉ groups of width N.

    The last group is padded with the first beam.
    """
    if num_chains < 1:
        raise ValueError(f"num_chains must be >= 1, got {num_chains}")
    total = beams.num_columns
    groups = []
    for k in range(math.ceil(total / num_chains)):
        idx = [
            c if c < total else 0
            for c in range(k * num_chains, (k + 1) * num_chains)
        ]
        groups.append(BeamformerMatrix(beams.columns[:, idx]))
    return groups


def _noise(
    size: int, variance: float, rng: Optional[np.random.Generator]
) -> np.ndarray:
    if variance == 0:
        return np.zeros(size, dtype=complex)
    if rng is None:
        raise ValueError("a random generator is required when noise_variance > 0")
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def transmit(
    link: Link,
    tx_beam: BeamformerMatrix,
    tx_digital: np.ndarray,
    rx_beam: BeamformerMatrix,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Send one digital vector over the link and return the rx chain outputs.

    Args:
        link: Link in the orientation of this transmission
        tx_beam: M_tx × N_tx transmit analog beamformer
        tx_digital: Length-N_tx digital symbol vector
        rx_beam: M_rx × N_rx receive analog beamformer
        rng: Noise source (may be None when the link is noiseless)

    Returns:
        Length-N_rx complex observation
    """
    tx, rx = link.tx_profile, link.rx_profile
    x = np.asarray(tx_digital, dtype=complex).reshape(-1)

    if tx_beam.num_antennas != tx.num_antennas:
        raise DimensionMismatchError(
            f"tx_beam has {tx_beam.num_antennas} rows, "
            f"tx node has {tx.num_antennas} antennas"
        )
    if tx_beam.num_columns != tx.num_chains:
        raise DimensionMismatchError(
            f"tx_beam has {tx_beam.num_columns} columns, "
            f"tx node has {tx.num_chains} chains"
        )
    if x.shape[0] != tx.num_chains:
        raise DimensionMismatchError(
            f"tx_digital has length {x.shape[0]}, tx node has {tx.num_chains} chains"
        )
    if rx_beam.num_antennas != rx.num_antennas:
        raise DimensionMismatchError(
            f"rx_beam has {rx_beam.num_antennas} rows, "
            f"rx node has {rx.num_antennas} antennas"
        )
    if rx_beam.num_columns != rx.num_chains:
        raise DimensionMismatchError(
            f"rx_beam has {rx_beam.num_columns} columns, "
            f"rx node has {rx.num_chains} chains"
        )

    radiated = tx.t2 * (tx_beam.columns @ (tx.t1 * x))
    impinging = rx.r2 * (link.channel.matrix @ radiated)
    y = rx.r1 * (rx_beam.columns.T @ impinging)
    y = y + _noise(rx.num_chains, link.noise_variance, rng)

    link.counter.record(link.direction)
    return y


def _check_groups(link: Link, rx_groups: Sequence[BeamformerMatrix]) -> None:
    rx = link.rx_profile
    for k, group in enumerate(rx_groups):
        if group.num_columns != rx.num_chains:
            raise DimensionMismatchError(
                f"receive group {k} has width {group.num_columns}, "
                f"rx node has {rx.num_chains} chains"
            )
    if len(rx_groups) * rx.num_chains < rx.num_antennas:
        raise DimensionMismatchError(
            f"{len(rx_groups)} receive groups cover fewer than {rx.num_antennas} beams"
        )


def gather_observations(
    link: Link,
    tx_beams: BeamformerMatrix,
    rx_groups: Sequence[BeamformerMatrix],
    rng: Optional[np.random.Generator] = None,
    pilot: complex = PILOT,
) -> ObservationMatrix:
    """
    Sweep every transmit beam against every receive group.

    Each transmission carries the pilot on the first tx digital chain. Entry
    (m, i) of the result came from receive beam m and transmit beam i; rows
    produced by padding beams are dropped.

    Returns:
        ObservationMatrix of shape M_rx × C_tx with pilots_used = C_tx·⌈M_rx/N_rx⌉
    """
    _check_groups(link, rx_groups)
    tx, rx = link.tx_profile, link.rx_profile
    x = np.zeros(tx.num_chains, dtype=complex)
    x[0] = pilot

    data = np.zeros((rx.num_antennas, tx_beams.num_columns), dtype=complex)
    pilots = 0
    for k, group in enumerate(rx_groups):
        lo = k * rx.num_chains
        hi = max(min(lo + rx.num_chains, rx.num_antennas), lo)
        for i in range(tx_beams.num_columns):
            beam = single_beam(tx_beams.column(i), tx.num_chains)
            y = transmit(link, beam, x, group, rng)
            data[lo:hi, i] = y[: hi - lo]
            pilots += 1

    logger.debug(
        f"gathered {data.shape[0]}x{data.shape[1]} {link.direction.value} "
        f"observations with {pilots} pilots"
    )
    return ObservationMatrix(data, pilots, link.direction)


def gather_broadcast(
    links: Sequence[Link],
    tx_beams: BeamformerMatrix,
    rx_groups: Sequence[Sequence[BeamformerMatrix]],
    rng: Optional[np.random.Generator] = None,
    pilot: complex = PILOT,
) -> List[ObservationMatrix]:
    """
    Like gather_observations, but every transmission from the shared tx node is
    heard by all receivers at once (independent noise per receiver).

    Each transmission is recorded on every link's counter; pilots_used of each
    returned matrix is the number of physical transmissions.
    """
    if not links:
        raise ValueError("broadcast needs at least one link")
    tx = links[0].tx_profile
    if any(link.tx_profile is not tx for link in links[1:]):
        raise ValueError("broadcast links must share the transmitting node")
    if len(rx_groups) != len(links):
        raise DimensionMismatchError(
            f"{len(rx_groups)} receive group sets for {len(links)} links"
        )
    group_counts = {len(groups) for groups in rx_groups}
    if len(group_counts) != 1:
        raise DimensionMismatchError(
            f"receivers need the same number of groups, got {sorted(group_counts)}"
        )
    for link, groups in zip(links, rx_groups):
        _check_groups(link, groups)

    x = np.zeros(tx.num_chains, dtype=complex)
    x[0] = pilot
    datas = [
        np.zeros((link.rx_profile.num_antennas, tx_beams.num_columns), dtype=complex)
        for link in links
    ]
    pilots = 0
    for k in range(group_counts.pop()):
        for i in range(tx_beams.num_columns):
            beam = single_beam(tx_beams.column(i), tx.num_chains)
            for link, groups, data in zip(links, rx_groups, datas):
                n_rx = link.rx_profile.num_chains
                lo = k * n_rx
                hi = max(min(lo + n_rx, link.rx_profile.num_antennas), lo)
                y = transmit(link, beam, x, groups[k], rng)
                data[lo:hi, i] = y[: hi - lo]
            pilots += 1

    logger.debug(f"broadcast to {len(links)} receivers with {pilots} pilots")
    return [
        ObservationMatrix(data, pilots, link.direction)
        for link, data in zip(links, datas)
    ]
