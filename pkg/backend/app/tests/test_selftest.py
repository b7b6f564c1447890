"""
Tests for the built-in self checks.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from app.core.selftest import (  # noqa: E402
    alternating_rank1,
    check_analog_oracle,
    check_normalized_mse,
    check_pilot_budget,
    check_planted,
    check_rank1_oracle,
    column_scale_error,
    eigen_analog_oracle,
    run_selftest,
)


def _all_pass(results) -> None:
    failed = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert not failed, failed


def test_column_scale_error_ignores_per_column_scale() -> None:
    truth = np.array([[1.0, 2j], [3.0, -1.0], [0.5j, 4.0]])
    scaled = truth * np.array([2 - 1j, 0.1j])[None, :]
    assert column_scale_error(scaled, truth) < 1e-12
    bent = scaled.copy()
    bent[0, 0] += 1.0
    assert column_scale_error(bent, truth) > 1e-3


def test_planted_suite() -> None:
    results = check_planted(trials=1)
    assert len(results) == 3
    _all_pass(results)


def test_pilot_budget_suite() -> None:
    results = check_pilot_budget()
    assert [r.name for r in results][-1] == "pilots: inter-AP step"
    _all_pass(results)


def test_rank1_oracle_suite() -> None:
    _all_pass(check_rank1_oracle(instances=3))


def test_alternating_rank1_on_exact_outer_product() -> None:
    Y = np.outer([1, 2j, -1], [0.5, 1j])
    assert alternating_rank1(Y, np.random.default_rng(0), iterations=50) < 1e-20


def test_analog_oracle_suite() -> None:
    _all_pass(check_analog_oracle(instances=3))


def test_eigen_oracle_recovers_planted_ratios() -> None:
    rng = np.random.default_rng(1)
    alpha, peer = np.array([1, 2, -1j]), np.array([1, 0.5j, 3])
    Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    X = Z * peer[:, None] / alpha[None, :]
    got_alpha, got_peer = eigen_analog_oracle(X, Z)
    np.testing.assert_allclose(got_alpha / got_alpha[0], alpha, atol=1e-10)
    np.testing.assert_allclose(got_peer / got_peer[0], peer, atol=1e-10)


def test_normalized_mse_suite() -> None:
    _all_pass(check_normalized_mse())


def test_quick_run_covers_every_suite() -> None:
    results = run_selftest(quick=True)
    names = " ".join(r.name for r in results)
    for fragment in ("planted", "pilots", "rank-1", "analog solver", "normalized"):
        assert fragment in names
    _all_pass(results)
