"""
Monte Carlo experiment orchestration: one trial end to end, parameter sweeps,
and the CSV result format.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.airlink import Direction, Link, gather_observations, group_receive_beams
from app.core.beamsearch import (
    best_beam_pair,
    filter_pairs_by_snr,
    ranked_beam_pairs,
    select_beams,
)
from app.core.calibration import (
    CalibrationEstimate,
    analog_calibration,
    calibrate_digital_pair,
    calibrate_link,
    inter_ap_ratio,
)
from app.core.errors import (
    ConfigError,
    DegenerateRatioError,
    DimensionMismatchError,
    NormalizationError,
    SweepAxisError,
    TrialError,
)
from app.core.estimation import (
    assemble_multi_ap,
    dl_from_ul,
    estimate_ul_effective,
    user_columns,
)
from app.core.logger import setup_logger
from app.core.model import (
    BeamformerMatrix,
    MultipathChannel,
    NodeProfile,
    SystemConfig,
    dft_codebook,
    gen_mismatch_profile,
    gen_multipath_channel,
)
from app.core.zfbf import PrecodingSetup, sinr_per_user, sum_rate, zf_precoder
from app.utils.file_utils import ensure_parent
from app.utils.seeding import derive_seed, trial_rng

logger = setup_logger(__name__)

CSV_HEADER: Tuple[str, ...] = (
    "axis_value",
    "trials",
    "mse_t1",
    "mse_r1",
    "mse_alpha",
    "mse_alpha_peer",
    "sum_rate_perfect",
    "sum_rate_calibrated",
    "sum_rate_uncalibrated",
    "pilots_total",
)

# sweep axis -> SystemConfig fields it drives
AXES: Dict[str, Tuple[str, ...]] = {
    "noise": ("noise_variance",),
    "aps": ("num_aps",),
    "users": ("num_users",),
    "mismatch_mag": ("mismatch_sigma_mag",),
    "mismatch_phase": ("mismatch_sigma_phase",),
    "mismatch_both": ("mismatch_sigma_mag", "mismatch_sigma_phase"),
}
INTEGER_AXES = frozenset({"aps", "users"})


@dataclass(frozen=True)
class TrialMetrics:
    """
    Per-trial results.

    MSEs average over every AP↔MU link: mse_t1/mse_r1 are the AP digital
    transmit/receive estimates, mse_alpha the AP analog ratios and
    mse_alpha_peer the MU analog ratios.
    """

    seed: int
    mse_t1: float
    mse_r1: float
    mse_alpha: float
    mse_alpha_peer: float
    sum_rate_perfect: float
    sum_rate_calibrated: float
    sum_rate_uncalibrated: float
    pilots_total: int


@dataclass(frozen=True)
class TrialOutcome:
    """
    Metrics plus the stacked (Σ M_ap) × U DL channels each arm precoded on.

    Columns of the estimates carry one arbitrary scale per user.
    """

    metrics: TrialMetrics
    dl_true: np.ndarray = field(repr=False)
    dl_calibrated: np.ndarray = field(repr=False)
    dl_uncalibrated: np.ndarray = field(repr=False)
    ratios: Tuple[complex, ...] = ()


@dataclass(frozen=True)
class LinkBudget:
    digital_dl: int
    digital_ul: int
    analog_dl: int
    analog_ul: int
    ul_estimation: int

    @property
    def total(self) -> int:
        return (
            self.digital_dl
            + self.digital_ul
            + self.analog_dl
            + self.analog_ul
            + self.ul_estimation
        )


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    trials: int
    mse_t1: float
    mse_r1: float
    mse_alpha: float
    mse_alpha_peer: float
    sum_rate_perfect: float
    sum_rate_calibrated: float
    sum_rate_uncalibrated: float
    pilots_total: int
    metrics: Tuple[TrialMetrics, ...] = field(default=(), repr=False, compare=False)

    def as_csv_fields(self) -> List[str]:
        return [
            _fmt(self.axis_value),
            str(self.trials),
            _fmt(self.mse_t1),
            _fmt(self.mse_r1),
            _fmt(self.mse_alpha),
            _fmt(self.mse_alpha_peer),
            _fmt(self.sum_rate_perfect),
            _fmt(self.sum_rate_calibrated),
            _fmt(self.sum_rate_uncalibrated),
            str(self.pilots_total),
        ]


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def normalized_mse(est: np.ndarray, truth: np.ndarray) -> float:
    """
    ‖est/est[0] − truth/truth[0]‖² / ‖truth/truth[0]‖².
    """
    est = np.asarray(est, dtype=complex).reshape(-1)
    truth = np.asarray(truth, dtype=complex).reshape(-1)
    if est.shape != truth.shape or est.shape[0] == 0:
        raise DimensionMismatchError(
            f"est has shape {est.shape}, truth has shape {truth.shape}"
        )
    if est[0] == 0 or truth[0] == 0:
        raise NormalizationError("first element is zero; cannot normalize")
    e = est / est[0]
    t = truth / truth[0]
    return float(np.linalg.norm(e - t) ** 2 / np.linalg.norm(t) ** 2)


def link_pilot_budget(m_tx: int, n_tx: int, m_rx: int, n_rx: int) -> LinkBudget:
    """Pilots spent calibrating one link and estimating its UL channel."""
    return LinkBudget(
        digital_dl=n_tx,
        digital_ul=n_rx,
        analog_dl=m_tx * math.ceil(m_rx / n_rx),
        analog_ul=m_rx * math.ceil(m_tx / n_tx),
        ul_estimation=m_rx * math.ceil(m_tx / n_tx),
    )


def pilot_budget(config: SystemConfig) -> int:
    """
    Analytic pilot count of one trial for this scenario.

    Every AP↔MU link pays its calibration and UL estimation; every non-reference
    AP adds a forward beam sweep from AP 0 plus the two-pilot exchange.
    """
    per_link = link_pilot_budget(
        config.antennas_ap,
        config.digital_chains_ap,
        config.antennas_mu,
        config.digital_chains_mu,
    ).total
    inter_ap = config.antennas_ap * math.ceil(
        config.antennas_ap / config.digital_chains_ap
    ) + 2
    return (
        config.num_aps * config.num_users * per_link
        + (config.num_aps - 1) * inter_ap
    )


def true_dl_column(link: Link, combiner: np.ndarray) -> np.ndarray:
    """
    Channel a user sees from one AP when data rides the first digital chain
    on both ends: t1ᵗˣ₀·r1ʳˣ₀·(bᵀ·R2ʳˣ·H·T2ᵗˣ)ᵀ.
    """
    tx, rx = link.tx_profile, link.rx_profile
    b = np.asarray(combiner, dtype=complex)
    row = tx.t2 * (link.channel.matrix.T @ (rx.r2 * b))
    return tx.t1[0] * rx.r1[0] * row


def inter_ap_exchange(
    alpha_ref: np.ndarray,
    alpha_peer: np.ndarray,
    link: Link,
    codebook: BeamformerMatrix,
    rng: np.random.Generator,
) -> complex:
    """
    Estimate the inter-AP ratio on the strongest beam pair of the link.

    The reference AP sweeps its codebook toward the peer (M·⌈M/N⌉ DL pilots),
    then the two-pilot exchange runs on the best pair. A degenerate exchange
    falls through to the next pair in ranked order.
    """
    groups = group_receive_beams(codebook, link.rx_profile.num_chains)
    obs = gather_observations(link, codebook, groups, rng)
    last_error: Optional[DegenerateRatioError] = None
    for tx, rx in ranked_beam_pairs(obs):
        try:
            return inter_ap_ratio(
                alpha_ref,
                alpha_peer,
                link,
                codebook.column(tx),
                codebook.column(rx),
                rng,
            )
        except DegenerateRatioError as exc:
            logger.warning(f"inter-AP exchange degenerate on ({tx}, {rx}), next pair")
            last_error = exc
    raise DegenerateRatioError(
        "no usable beam pair for the inter-AP exchange"
    ) from last_error


def _arm_rate(
    H_true: np.ndarray, H_est: np.ndarray, power: float, noise: float
) -> float:
    W = zf_precoder(H_est)
    setup = PrecodingSetup.equal_power(W, power, noise)
    return sum_rate(sinr_per_user(H_true, setup))


@dataclass(frozen=True)
class Scenario:
    """Hardware and propagation drawn for one trial."""

    aps: Tuple[NodeProfile, ...]
    mus: Tuple[NodeProfile, ...]
    access: Tuple[Tuple[MultipathChannel, ...], ...] = field(repr=False)
    inter: Tuple[MultipathChannel, ...] = field(repr=False)

    def access_link(self, k: int, u: int, noise_variance: float) -> Link:
        """AP k → MU u link."""
        return Link(self.aps[k], self.mus[u], self.access[k][u], noise_variance)

    def inter_ap_link(self, k: int, noise_variance: float) -> Link:
        """Reference AP → AP k link, k ≥ 1."""
        return Link(self.aps[0], self.aps[k], self.inter[k - 1], noise_variance)


def draw_scenario(config: SystemConfig, trial_index: int) -> Scenario:
    """
    Profiles and channels of one trial from their own seed streams.

    Draw order is fixed: AP profiles, MU profiles, then AP→MU channels by AP
    and user, then reference→AP channels.
    """
    seed = config.master_seed
    profile_rng = trial_rng(seed, trial_index, "profiles")

    def profile(chains: int, antennas: int) -> NodeProfile:
        return gen_mismatch_profile(
            chains,
            antennas,
            config.mismatch_sigma_mag,
            config.mismatch_sigma_phase,
            profile_rng,
        )

    aps = tuple(
        profile(config.digital_chains_ap, config.antennas_ap)
        for _ in range(config.num_aps)
    )
    mus = tuple(
        profile(config.digital_chains_mu, config.antennas_mu)
        for _ in range(config.num_users)
    )

    channel_rng = trial_rng(seed, trial_index, "channels")
    L = config.num_paths
    access = tuple(
        tuple(
            gen_multipath_channel(
                L, config.antennas_mu, config.antennas_ap, channel_rng
            )
            for _ in range(config.num_users)
        )
        for _ in range(config.num_aps)
    )
    inter = tuple(
        gen_multipath_channel(L, config.antennas_ap, config.antennas_ap, channel_rng)
        for _ in range(config.num_aps - 1)
    )
    return Scenario(aps, mus, access, inter)


def _simulate(config: SystemConfig, trial_index: int) -> TrialOutcome:
    seed = config.master_seed
    K, U = config.num_aps, config.num_users
    scenario = draw_scenario(config, trial_index)
    aps, mus = scenario.aps, scenario.mus

    noise_rng = trial_rng(seed, trial_index, "noise")
    ap_book = dft_codebook(config.antennas_ap)
    mu_book = dft_codebook(config.antennas_mu)
    combiners = [mu_book.column(0)] * U
    ones_ap = np.ones(config.antennas_ap, dtype=complex)
    ones_mu = np.ones(config.antennas_mu, dtype=complex)

    errors: Dict[str, List[float]] = {"t1": [], "r1": [], "alpha": [], "alpha_peer": []}
    calibrated_blocks, raw_blocks, true_blocks = [], [], []
    ap_alphas = []
    pilots = 0

    for k, ap in enumerate(aps):
        calibrated, raw, truth = [], [], []
        for u, mu in enumerate(mus):
            link = scenario.access_link(k, u, config.noise_variance)
            est = calibrate_link(link, ap_book, mu_book, noise_rng)
            ul = estimate_ul_effective(
                link, ap_book, mu_book, est.r1_hat, noise_rng, ap_id=k
            )
            calibrated.append(dl_from_ul(ul, est.alpha_hat, est.alpha_hat_peer))
            raw.append(dl_from_ul(ul, ones_ap, ones_mu))
            truth.append(true_dl_column(link, combiners[u]))

            errors["t1"].append(normalized_mse(est.t1_hat, ap.t1))
            errors["r1"].append(normalized_mse(est.r1_hat, ap.r1))
            errors["alpha"].append(normalized_mse(est.alpha_hat, ap.alpha))
            errors["alpha_peer"].append(normalized_mse(est.alpha_hat_peer, mu.alpha))
            pilots += link.tx_counter
            if u == 0:
                ap_alphas.append(est.alpha_hat)

        calibrated_blocks.append(user_columns(calibrated, combiners))
        raw_blocks.append(user_columns(raw, combiners))
        true_blocks.append(np.stack(truth, axis=1))

    ratios: List[complex] = [1.0 + 0.0j]
    for k in range(1, K):
        ap_link = scenario.inter_ap_link(k, config.noise_variance)
        ratios.append(
            inter_ap_exchange(
                ap_alphas[0], ap_alphas[k], ap_link, ap_book, noise_rng
            )
        )
        pilots += ap_link.tx_counter

    expected = pilot_budget(config)
    if pilots != expected:
        logger.warning(
            f"trial {trial_index}: counted {pilots} pilots, "
            f"analytic budget is {expected}"
        )

    H_true = np.vstack(true_blocks)
    H_calibrated = assemble_multi_ap(calibrated_blocks, ratios)
    H_raw = assemble_multi_ap(raw_blocks, [1.0] * K)
    noise = max(config.noise_variance, config.rate_noise_floor * config.tx_power)
    power = config.tx_power

    metrics = TrialMetrics(
        seed=derive_seed(seed, trial_index),
        mse_t1=float(np.mean(errors["t1"])),
        mse_r1=float(np.mean(errors["r1"])),
        mse_alpha=float(np.mean(errors["alpha"])),
        mse_alpha_peer=float(np.mean(errors["alpha_peer"])),
        sum_rate_perfect=_arm_rate(H_true, H_true, power, noise),
        sum_rate_calibrated=_arm_rate(H_true, H_calibrated, power, noise),
        sum_rate_uncalibrated=_arm_rate(H_true, H_raw, power, noise),
        pilots_total=pilots,
    )
    return TrialOutcome(metrics, H_true, H_calibrated, H_raw, tuple(ratios))


def simulate_trial(config: SystemConfig, trial_index: int) -> TrialOutcome:
    """
    One Monte Carlo trial: draw hardware and channels, calibrate every AP↔MU
    link, run the inter-AP exchange against AP 0 and score three precoders
    (perfect CSI, calibrated, uncalibrated) on the true DL channel.

    Raises:
        TrialError: Any failure, annotated with trial_index
    """
    try:
        return _simulate(config, trial_index)
    except TrialError:
        raise
    except Exception as exc:
        raise TrialError(trial_index, exc) from exc


def run_trial(config: SystemConfig, trial_index: int) -> TrialMetrics:
    """Metrics of simulate_trial."""
    return simulate_trial(config, trial_index).metrics


@dataclass(frozen=True)
class LinkReport:
    """Single-link (AP 0 → MU 0) calibration of trial 0, with beam search."""

    config: SystemConfig
    estimate: CalibrationEstimate = field(repr=False)
    pilots: LinkBudget
    mse: Dict[str, float]
    best_pair: Tuple[int, int]
    pairs_above_threshold: int
    snr_threshold_db: float
    beam_set_columns: int
    beam_set_condition: float


def calibrate_single_link(
    config: SystemConfig,
    snr_threshold_db: float = 10.0,
    epsilon: float = 0.3,
) -> LinkReport:
    """
    Calibrate AP 0 against MU 0 with the hardware and channel of trial 0.

    Beam search runs on the forward analog sweep: best pair, number of pairs
    above the SNR threshold and the perturbed full-rank beam set built
    from them. SNR uses the rate noise floor when noise_variance is 0.
    """
    scenario = draw_scenario(config, 0)
    link = scenario.access_link(0, 0, config.noise_variance)
    ap, mu = scenario.aps[0], scenario.mus[0]
    noise_rng = trial_rng(config.master_seed, 0, "noise")
    ap_book = dft_codebook(config.antennas_ap)
    mu_book = dft_codebook(config.antennas_mu)

    digital = calibrate_digital_pair(link, ap_book, mu_book, noise_rng)
    after_digital = link.counter.snapshot()
    estimate = analog_calibration(link, ap_book, mu_book, digital, noise_rng)
    after_analog = link.counter.snapshot()
    dl, ul = Direction.DL.value, Direction.UL.value

    sigma = max(config.noise_variance, config.rate_noise_floor * config.tx_power)
    obs = estimate.dl_observation
    beam_set = select_beams(
        obs,
        ap_book,
        sigma,
        snr_threshold_db,
        epsilon,
        trial_rng(config.master_seed, 0, "beams"),
    )
    logger.debug(f"single-link calibration pilots {link.counter!r}")
    return LinkReport(
        config=config,
        estimate=estimate,
        pilots=LinkBudget(
            digital_dl=after_digital[dl],
            digital_ul=after_digital[ul],
            analog_dl=after_analog[dl] - after_digital[dl],
            analog_ul=after_analog[ul] - after_digital[ul],
            ul_estimation=0,
        ),
        mse={
            "t1": normalized_mse(estimate.t1_hat, ap.t1),
            "r1": normalized_mse(estimate.r1_hat, ap.r1),
            "alpha": normalized_mse(estimate.alpha_hat, ap.alpha),
            "alpha_peer": normalized_mse(estimate.alpha_hat_peer, mu.alpha),
        },
        best_pair=best_beam_pair(obs),
        pairs_above_threshold=len(filter_pairs_by_snr(obs, sigma, snr_threshold_db)),
        snr_threshold_db=snr_threshold_db,
        beam_set_columns=beam_set.num_columns,
        beam_set_condition=beam_set.condition_number(),
    )


def axis_config(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Config with the sweep axis set to value."""
    if axis not in AXES:
        raise SweepAxisError(
            f"unknown axis {axis!r}; expected one of {', '.join(sorted(AXES))}"
        )
    if axis in INTEGER_AXES:
        if float(value) != int(value):
            raise SweepAxisError(f"axis {axis} needs integer values, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    try:
        return config.replace(**{name: value for name in AXES[axis]})
    except ConfigError as exc:
        raise SweepAxisError(
            f"invalid value {value!r} for axis {axis}: {exc}"
        ) from exc


def _reduce(value: float, metrics: Sequence[TrialMetrics]) -> SweepRow:
    pilots = {m.pilots_total for m in metrics}
    if len(pilots) > 1:
        logger.warning(f"pilot totals differ across trials: {sorted(pilots)}")

    def mean(name: str) -> float:
        return float(np.mean([getattr(m, name) for m in metrics]))

    return SweepRow(
        axis_value=value,
        trials=len(metrics),
        mse_t1=mean("mse_t1"),
        mse_r1=mean("mse_r1"),
        mse_alpha=mean("mse_alpha"),
        mse_alpha_peer=mean("mse_alpha_peer"),
        sum_rate_perfect=mean("sum_rate_perfect"),
        sum_rate_calibrated=mean("sum_rate_calibrated"),
        sum_rate_uncalibrated=mean("sum_rate_uncalibrated"),
        pilots_total=metrics[0].pilots_total,
        metrics=tuple(metrics),
    )


def _run_trials(
    config: SystemConfig,
    executor: Optional[Executor],
    on_trial: Optional[Callable[[int], None]],
) -> List[TrialMetrics]:
    n = config.num_trials
    if executor is None:
        results: Iterable[TrialMetrics] = (run_trial(config, i) for i in range(n))
    else:
        # map() yields in submission order, so reduction order is trial order
        results = executor.map(run_trial, repeat(config, n), range(n))
    collected = []
    for metrics in results:
        collected.append(metrics)
        if on_trial is not None:
            on_trial(1)
    return collected


def sweep(
    config: SystemConfig,
    axis: str,
    values: Sequence[float],
    workers: int = 1,
    on_trial: Optional[Callable[[int], None]] = None,
) -> List[SweepRow]:
    """
    Run num_trials trials per axis value and average them.

    Args:
        config: Base scenario
        axis: One of AXES
        values: Axis values, in output order
        workers: Worker processes; 1 runs inline
        on_trial: Called with 1 after each finished trial (progress bars)

    Returns:
        One SweepRow per value
    """
    if len(values) == 0:
        raise SweepAxisError("values must not be empty")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    configs = [axis_config(config, axis, v) for v in values]

    rows: List[SweepRow] = []
    executor: Optional[Executor] = None
    try:
        if workers > 1:
            executor = ProcessPoolExecutor(max_workers=workers)
        for value, cfg in zip(values, configs):
            metrics = _run_trials(cfg, executor, on_trial)
            row = _reduce(float(value), metrics)
            logger.info(
                f"{axis}={_fmt(value)}: calibrated {row.sum_rate_calibrated:.4g}, "
                f"uncalibrated {row.sum_rate_uncalibrated:.4g}, "
                f"mse_alpha {row.mse_alpha:.3e}"
            )
            rows.append(row)
    finally:
        if executor is not None:
            executor.shutdown()
    return rows


def write_csv(rows: Sequence[SweepRow], path: Path) -> Path:
    """Write sweep rows with the fixed header, '\\n' line endings."""
    path = ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv_fields())
    logger.info(f"wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    """
    Read a sweep CSV back.

    Raises:
        ValueError: Header differs from CSV_HEADER or a row has the wrong width
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"{path} is not a sweep CSV (header {header!r})")
        rows = []
        for line, fields in enumerate(reader, start=2):
            if len(fields) != len(CSV_HEADER):
                raise ValueError(
                    f"{path}:{line}: expected {len(CSV_HEADER)} fields, "
                    f"got {len(fields)}"
                )
            rows.append(dict(zip(CSV_HEADER, fields)))
        return rows
