"""
Domain types and random generators: system config, hardware mismatch profiles,
multipath channels and phase-only beamformer codebooks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Tuple

import numpy as np

from app.core.errors import ConfigError, DimensionMismatchError, ZeroCoefficientError
from app.core.logger import setup_logger

logger = setup_logger(__name__)

FULL_RANK_RTOL = 1e-9
MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class SystemConfig:
    """
    Scenario parameters for one experiment.

    Field names double as the keys of the experiment config file.
    """

    num_aps: int = 2
    num_users: int = 2
    antennas_ap: int = 16
    digital_chains_ap: int = 4
    antennas_mu: int = 1
    digital_chains_mu: int = 1
    num_paths: int = 4
    mismatch_sigma_mag: float = 0.5
    mismatch_sigma_phase: float = 0.5
    noise_variance: float = 1e-2
    tx_power: float = 1.0
    master_seed: int = 0
    num_trials: int = 200
    rate_noise_floor: float = 1e-10

    def __post_init__(self) -> None:
        for name in (
            "num_aps",
            "num_users",
            "antennas_ap",
            "digital_chains_ap",
            "antennas_mu",
            "digital_chains_mu",
            "num_paths",
            "num_trials",
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.digital_chains_ap > self.antennas_ap:
            raise ConfigError(
                f"digital_chains_ap ({self.digital_chains_ap}) exceeds "
                f"antennas_ap ({self.antennas_ap})"
            )
        if self.digital_chains_mu > self.antennas_mu:
            raise ConfigError(
                f"digital_chains_mu ({self.digital_chains_mu}) exceeds "
                f"antennas_mu ({self.antennas_mu})"
            )
        for name in (
            "mismatch_sigma_mag",
            "mismatch_sigma_phase",
            "noise_variance",
            "rate_noise_floor",
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not np.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite value >= 0, got {value!r}")
        if isinstance(self.tx_power, bool) or not (
            np.isfinite(self.tx_power) and self.tx_power > 0
        ):
            raise ConfigError(f"tx_power must be > 0, got {self.tx_power!r}")
        seed = self.master_seed
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise ConfigError(f"master_seed must be an integer, got {seed!r}")
        if not 0 <= seed <= MAX_SEED:
            raise ConfigError(
                f"master_seed must be a 64-bit unsigned integer, got {seed}"
            )

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def replace(self, **changes: Any) -> "SystemConfig":
        """Validated copy with some fields changed."""
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.field_names()}


@dataclass(frozen=True)
class NodeProfile:
    """
    Diagonal reciprocity coefficients of one node.

    t1/r1 are the transmit/receive digital chain responses (length N),
    t2/r2 the transmit/receive analog chain responses (length M).
    """

    t1: np.ndarray
    r1: np.ndarray
    t2: np.ndarray
    r2: np.ndarray

    def __post_init__(self) -> None:
        for name in ("t1", "r1", "t2", "r2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.ndim != 1:
                raise DimensionMismatchError(
                    f"{name} must be a vector, got {arr.shape}"
                )
            if np.any(arr == 0):
                raise ZeroCoefficientError(
                    f"{name} has a zero entry; every chain needs gain"
                )
            object.__setattr__(self, name, arr)
        if self.t1.shape != self.r1.shape:
            raise DimensionMismatchError("t1 and r1 must have the same length")
        if self.t2.shape != self.r2.shape:
            raise DimensionMismatchError("t2 and r2 must have the same length")

    @classmethod
    def identity(cls, num_chains: int, num_antennas: int) -> "NodeProfile":
        ones_n = np.ones(num_chains, dtype=complex)
        ones_m = np.ones(num_antennas, dtype=complex)
        return cls(ones_n, ones_n.copy(), ones_m, ones_m.copy())

    @property
    def num_chains(self) -> int:
        return self.t1.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.t2.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        """Per-antenna ratio r2/t2 (diagonal of R2·T2⁻¹)."""
        return self.r2 / self.t2


@dataclass(frozen=True)
class PathParams:
    gain: complex
    aod: float
    aoa: float


@dataclass(frozen=True)
class MultipathChannel:
    """Narrowband M_rx×M_tx channel and the paths that built it."""

    matrix: np.ndarray
    paths: Tuple[PathParams, ...] = field(default_factory=tuple)

    @property
    def num_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_tx(self) -> int:
        return self.matrix.shape[1]

    def transposed(self) -> "MultipathChannel":
        """Reverse-direction channel (TDD reciprocity of the medium)."""
        flipped = tuple(PathParams(p.gain, p.aoa, p.aod) for p in self.paths)
        return MultipathChannel(self.matrix.T.copy(), flipped)


@dataclass(frozen=True)
class BeamformerMatrix:
    """
    Columns of phase-only analog beams, each entry of modulus 1/√M.
    """

    columns: np.ndarray
    is_full_rank: bool = False

    @classmethod
    def from_columns(cls, columns: np.ndarray) -> "BeamformerMatrix":
        """Wrap a matrix and compute the full-rank flag (square matrices only)."""
        cols = np.atleast_2d(np.asarray(columns, dtype=complex))
        full_rank = False
        if cols.shape[0] == cols.shape[1]:
            s = np.linalg.svd(cols, compute_uv=False)
            full_rank = bool(s[-1] > FULL_RANK_RTOL * s[0])
        return cls(cols, full_rank)

    @property
    def num_antennas(self) -> int:
        return self.columns.shape[0]

    @property
    def num_columns(self) -> int:
        return self.columns.shape[1]

    def column(self, index: int) -> np.ndarray:
        return self.columns[:, index]

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.columns))

    def is_phase_only(self, atol: float = 1e-9) -> bool:
        scaled = np.abs(self.columns) * np.sqrt(self.num_antennas)
        return bool(np.allclose(scaled, 1.0, atol=atol))


def array_response(theta: float, num_antennas: int) -> np.ndarray:
    """
    Half-wavelength ULA steering vector with unit Euclidean norm.

    Element m is exp(j·π·m·sin θ)/√M.
    """
    m = np.arange(num_antennas)
    return np.exp(1j * np.pi * m * np.sin(theta)) / np.sqrt(num_antennas)


def gen_multipath_channel(
    num_paths: int, num_rx: int, num_tx: int, rng: np.random.Generator
) -> MultipathChannel:
    """
    Draw a geometric L-path channel.

    H = sqrt(M_rx·M_tx/L) Σ α_ℓ a(φ_ℓ, M_rx) a(θ_ℓ, M_tx)ᴴ with α_ℓ ~ CN(0, 1)
    and θ_ℓ, φ_ℓ ~ U(−π/2, π/2).
    """
    if num_paths < 1:
        raise ValueError(f"num_paths must be >= 1, got {num_paths}")
    gains = rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths)
    gains = gains / np.sqrt(2)
    aods = rng.uniform(-np.pi / 2, np.pi / 2, num_paths)
    aoas = rng.uniform(-np.pi / 2, np.pi / 2, num_paths)

    scale = np.sqrt(num_rx * num_tx / num_paths)
    matrix = np.zeros((num_rx, num_tx), dtype=complex)
    for gain, aod, aoa in zip(gains, aods, aoas):
        steer_rx = array_response(aoa, num_rx)
        steer_tx = array_response(aod, num_tx)
        matrix += gain * np.outer(steer_rx, steer_tx.conj())
    matrix *= scale

    paths = tuple(
        PathParams(complex(g), float(d), float(a)) for g, d, a in zip(gains, aods, aoas)
    )
    return MultipathChannel(matrix, paths)


def gen_mismatch_profile(
    num_chains: int,
    num_antennas: int,
    sigma_mag: float,
    sigma_phase: float,
    rng: np.random.Generator,
) -> NodeProfile:
    """
    Draw log-normal magnitude / uniform phase reciprocity coefficients.

    Each coefficient is exp(g)·exp(jφ), g ~ N(0, σ_mag²), φ ~ U(−σ_ph, σ_ph),
    drawn in the order t1, r1, t2, r2.
    """
    if sigma_mag < 0 or sigma_phase < 0:
        raise ValueError("mismatch sigmas must be >= 0")

    def draw(n: int) -> np.ndarray:
        g = rng.normal(0.0, sigma_mag, n)
        phi = rng.uniform(-sigma_phase, sigma_phase, n)
        return np.exp(g + 1j * phi)

    return NodeProfile(
        t1=draw(num_chains),
        r1=draw(num_chains),
        t2=draw(num_antennas),
        r2=draw(num_antennas),
    )


def dft_codebook(num_antennas: int) -> BeamformerMatrix:
    """Unitary DFT codebook: column c, entry m = exp(j·2π·m·c/M)/√M."""
    if num_antennas < 1:
        raise ValueError(f"num_antennas must be >= 1, got {num_antennas}")
    m = np.arange(num_antennas)
    columns = np.exp(2j * np.pi * np.outer(m, m) / num_antennas) / np.sqrt(num_antennas)
    return BeamformerMatrix(columns, True)
