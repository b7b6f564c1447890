"""
Built-in self checks run by `tandemcal selftest`.

Three suites: noiseless planted-solution exactness, exact pilot budgets on an
AP↔AP link, and agreement of the two least-squares solvers with independent
oracles.
"""

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
import scipy.linalg

from app.core.airlink import Direction, Link
from app.core.calibration import (
    analog_calibration,
    calibrate_digital_pair,
    inter_ap_ratio,
    rank1_residual,
    solve_analog_ls,
    solve_rank1_ls,
)
from app.core.harness import normalized_mse, simulate_trial
from app.core.logger import setup_logger
from app.core.model import (
    SystemConfig,
    dft_codebook,
    gen_mismatch_profile,
    gen_multipath_channel,
)

logger = setup_logger(__name__)

PLANTED_MSE_TOL = 1e-10
PLANTED_SCALE_TOL = 1e-9
RANK1_OBJECTIVE_TOL = 1e-8
ANALOG_ALIGNMENT_TOL = 1e-8

PLANTED_CONFIG = SystemConfig(
    num_aps=2,
    num_users=2,
    antennas_ap=16,
    digital_chains_ap=4,
    antennas_mu=1,
    digital_chains_mu=1,
    mismatch_sigma_mag=0.5,
    mismatch_sigma_phase=0.5,
    noise_variance=0.0,
    master_seed=20240611,
    num_trials=1,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def column_scale_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """
    Largest relative deviation of any estimate column from a scaled truth column.

    Zero when every column of estimate is a complex multiple of the matching
    column of truth.
    """
    worst = 0.0
    for u in range(truth.shape[1]):
        t, e = truth[:, u], estimate[:, u]
        g = np.vdot(t, e) / np.vdot(t, t)
        worst = max(worst, float(np.linalg.norm(e - g * t) / np.linalg.norm(e)))
    return worst


def check_planted(trials: int = 3) -> List[CheckResult]:
    """Noiseless calibration recovers every planted profile and the DL channel."""
    results = []
    for trial in range(trials):
        outcome = simulate_trial(PLANTED_CONFIG, trial)
        m = outcome.metrics
        worst_mse = max(m.mse_t1, m.mse_r1, m.mse_alpha, m.mse_alpha_peer)
        results.append(
            CheckResult(
                f"planted profiles (trial {trial})",
                worst_mse < PLANTED_MSE_TOL,
                f"worst normalized MSE {worst_mse:.2e}",
            )
        )
        scale_error = column_scale_error(outcome.dl_calibrated, outcome.dl_true)
        results.append(
            CheckResult(
                f"planted DL channel (trial {trial})",
                scale_error < PLANTED_SCALE_TOL,
                f"per-user scale deviation {scale_error:.2e}",
            )
        )

    first = simulate_trial(PLANTED_CONFIG, 0).metrics
    second = simulate_trial(PLANTED_CONFIG, 0).metrics
    results.append(
        CheckResult("repeatable trial", first == second, "same seed, same metrics")
    )
    return results


def check_pilot_budget() -> List[CheckResult]:
    """Counted pilots of each calibration stage on a 16-antenna 4-chain AP pair."""
    m, n = 16, 4
    rng = np.random.default_rng(7)
    ap1 = gen_mismatch_profile(n, m, 0.5, 0.5, rng)
    ap2 = gen_mismatch_profile(n, m, 0.5, 0.5, rng)
    book = dft_codebook(m)

    link = Link(ap1, ap2, gen_multipath_channel(4, m, m, rng))
    digital = calibrate_digital_pair(link, book, book)
    after_digital = link.counter.snapshot()
    estimate = analog_calibration(link, book, book, digital)
    after_analog = link.counter.snapshot()

    exchange = Link(ap1, ap2, gen_multipath_channel(4, m, m, rng))
    inter_ap_ratio(
        estimate.alpha_hat,
        estimate.alpha_hat_peer,
        exchange,
        book.column(0),
        book.column(0),
    )

    dl, ul = Direction.DL.value, Direction.UL.value
    stages: List[Tuple[str, int, int]] = [
        ("digital step DL", after_digital[dl], n),
        ("digital step UL", after_digital[ul], n),
        ("analog step DL", after_analog[dl] - after_digital[dl], m * m // n),
        ("analog step UL", after_analog[ul] - after_digital[ul], m * m // n),
        ("inter-AP step", exchange.tx_counter, 2),
    ]
    return [
        CheckResult(f"pilots: {name}", got == want, f"{got} counted, {want} expected")
        for name, got, want in stages
    ]


def _rank1_objective(Y: np.ndarray, r: np.ndarray, t: np.ndarray) -> float:
    basis = np.outer(r, t)
    g = np.vdot(basis, Y) / np.vdot(basis, basis)
    return float(np.linalg.norm(Y - g * basis) ** 2)


def alternating_rank1(
    Y: np.ndarray, rng: np.random.Generator, iterations: int = 5000
) -> float:
    """Objective reached by alternating least squares over r and t."""
    r = rng.standard_normal(Y.shape[0]) + 1j * rng.standard_normal(Y.shape[0])
    t = np.zeros(Y.shape[1], dtype=complex)
    for _ in range(iterations):
        t = Y.T @ r.conj() / np.vdot(r, r)
        r = Y @ t.conj() / np.vdot(t, t)
    return _rank1_objective(Y, r, t)


def check_rank1_oracle(instances: int = 20) -> List[CheckResult]:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(instances):
        Y = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        r, t = solve_rank1_ls(Y)
        ours = _rank1_objective(Y, r, t)
        oracle = alternating_rank1(Y, rng)
        worst = max(worst, abs(ours - oracle), abs(ours - rank1_residual(Y)))
    return [
        CheckResult(
            "rank-1 solver vs alternating minimization",
            worst < RANK1_OBJECTIVE_TOL,
            f"largest objective gap {worst:.2e} over {instances} instances",
        )
    ]


def _blockwise_unit(alpha: np.ndarray, peer: np.ndarray) -> np.ndarray:
    v = np.concatenate([alpha / alpha[0], peer / peer[0]])
    return v / np.linalg.norm(v)


def eigen_analog_oracle(
    X: np.ndarray, Z: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest eigenvector of AᴴA for rows x_ij·α_j − z_ij·α′_i."""
    rows, cols = X.shape
    A = np.zeros((rows * cols, cols + rows), dtype=complex)
    for i in range(rows):
        for j in range(cols):
            A[i * cols + j, j] = X[i, j]
            A[i * cols + j, cols + i] = -Z[i, j]
    _, vecs = scipy.linalg.eigh(A.conj().T @ A)
    v = vecs[:, 0]
    return v[:cols], v[cols:]


def check_analog_oracle(instances: int = 20) -> List[CheckResult]:
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(instances):
        X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        Z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        ours = solve_analog_ls(X, Z)
        oracle = eigen_analog_oracle(X, Z)
        alignment = abs(
            np.vdot(
                _blockwise_unit(ours.alpha, ours.alpha_peer),
                _blockwise_unit(*oracle),
            )
        )
        worst = max(worst, 1.0 - alignment)
    return [
        CheckResult(
            "analog solver vs eigenvector oracle",
            worst < ANALOG_ALIGNMENT_TOL,
            f"largest misalignment {worst:.2e} over {instances} instances",
        )
    ]


def check_normalized_mse() -> List[CheckResult]:
    truth = np.array([1.0, 2.0 - 1.0j, 0.5j])
    gap = normalized_mse((3.0 - 2.0j) * truth, truth)
    return [CheckResult("normalized MSE is scale free", gap < 1e-20, f"{gap:.2e}")]


def run_selftest(quick: bool = False) -> List[CheckResult]:
    """
    Run every suite.

    Args:
        quick: One planted trial and fewer oracle instances

    Returns:
        One CheckResult per check, in suite order
    """
    instances = 5 if quick else 20
    suites: List[Callable[[], List[CheckResult]]] = [
        lambda: check_planted(1 if quick else 3),
        check_pilot_budget,
        lambda: check_rank1_oracle(instances),
        lambda: check_analog_oracle(instances),
        check_normalized_mse,
    ]
    results: List[CheckResult] = []
    for suite in suites:
        results.extend(suite())
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} self checks failed: {', '.join(failed)}")
    else:
        logger.info(f"all {len(results)} self checks passed")
    return results
