"""
Tests for zero-forcing precoding and rate evaluation.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from app.core.errors import InvalidSinrError, RankDeficiencyError  # noqa: E402
from app.core.zfbf import (  # noqa: E402
    PrecodingSetup,
    sinr_per_user,
    sum_rate,
    zf_precoder,
)


def _random_channel(seed: int, rows: int = 8, users: int = 2) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, users)) + 1j * rng.standard_normal(
        (rows, users)
    )


class TestPrecoder:
    def test_identity(self) -> None:
        np.testing.assert_allclose(zf_precoder(np.eye(2)), np.eye(2))

    def test_scaled_identity(self) -> None:
        H = 2 * np.eye(2)
        np.testing.assert_allclose(zf_precoder(H, normalize=False), 0.5 * np.eye(2))
        np.testing.assert_allclose(zf_precoder(H), np.eye(2))

    def test_zero_forcing_property(self) -> None:
        H = _random_channel(0)
        W = zf_precoder(H, normalize=False)
        np.testing.assert_allclose(H.T @ W, np.eye(2), atol=1e-10)
        np.testing.assert_allclose(
            np.linalg.norm(zf_precoder(H), axis=0), np.ones(2), atol=1e-12
        )

    def test_is_pseudo_inverse_of_transpose(self) -> None:
        H = _random_channel(2)
        W = zf_precoder(H, normalize=False)
        np.testing.assert_allclose(W, np.linalg.pinv(H.T), atol=1e-10)
        np.testing.assert_allclose(W, H.conj() @ np.linalg.inv(H.T @ H.conj()))

    def test_more_users_than_antennas(self) -> None:
        with pytest.raises(RankDeficiencyError):
            zf_precoder(_random_channel(1, rows=2, users=3))

    def test_global_scale_is_invisible(self) -> None:
        H = _random_channel(2)
        W, W_scaled = zf_precoder(H), zf_precoder((0.3 - 2j) * H)
        setup = PrecodingSetup.equal_power(W, 1.0, 1e-2)
        setup_scaled = PrecodingSetup.equal_power(W_scaled, 1.0, 1e-2)
        np.testing.assert_allclose(
            sinr_per_user(H, setup), sinr_per_user(H, setup_scaled), rtol=1e-10
        )


class TestSinr:
    def test_no_interference(self) -> None:
        setup = PrecodingSetup(np.eye(2), np.array([1.0, 1.0]), 1.0)
        np.testing.assert_allclose(sinr_per_user(np.eye(2), setup), [1.0, 1.0])

    def test_orthogonal_precoder_kills_signal(self) -> None:
        H = np.eye(2)
        setup = PrecodingSetup(np.array([[0, 1], [1, 0]]), np.ones(2), 1.0)
        np.testing.assert_allclose(sinr_per_user(H, setup), [0.0, 0.0])

    def test_perfect_csi_suppresses_interference(self) -> None:
        H = _random_channel(3)
        setup = PrecodingSetup.equal_power(zf_precoder(H), 2.0, 1e-3)
        gains = np.abs(H.T @ setup.W) ** 2
        assert gains[0, 1] <= 1e-20 * gains[0, 0]
        assert gains[1, 0] <= 1e-20 * gains[1, 1]

    def test_matches_received_signal_model(self) -> None:
        H = _random_channel(4, rows=6, users=3)
        W = zf_precoder(_random_channel(5, rows=6, users=3))
        powers = np.array([0.5, 1.0, 1.5])
        setup = PrecodingSetup(W, powers, 0.1)
        expected = []
        for u in range(3):
            terms = [powers[v] * abs(H[:, u] @ W[:, v]) ** 2 for v in range(3)]
            interference = sum(terms) - terms[u]
            expected.append(terms[u] / (interference + 0.1))
        np.testing.assert_allclose(sinr_per_user(H, setup), expected, rtol=1e-10)

    def test_equal_power_split(self) -> None:
        setup = PrecodingSetup.equal_power(np.eye(4)[:, :2], 3.0, 1.0)
        np.testing.assert_allclose(setup.powers, [1.5, 1.5])


class TestSumRate:
    @pytest.mark.parametrize(
        "sinrs,expected", [([1.0], 1.0), ([3.0, 3.0], 4.0), ([0.0, 0.0], 0.0)]
    )
    def test_values(self, sinrs: list, expected: float) -> None:
        assert sum_rate(np.array(sinrs)) == pytest.approx(expected)

    def test_negative_sinr(self) -> None:
        with pytest.raises(InvalidSinrError):
            sum_rate(np.array([1.0, -0.5]))
