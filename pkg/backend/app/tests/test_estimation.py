"""
Tests for UL/DL effective-channel estimation and the multi-AP stack.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from app.core.airlink import Direction, Link  # noqa: E402
from app.core.errors import (  # noqa: E402
    DegenerateRatioError,
    DimensionMismatchError,
    TandemcalError,
    ZeroCoefficientError,
)
from app.core.estimation import (  # noqa: E402
    EffectiveChannel,
    assemble_multi_ap,
    dl_from_ul,
    estimate_ul_effective,
    user_columns,
)
from app.core.model import (  # noqa: E402
    NodeProfile,
    dft_codebook,
    gen_mismatch_profile,
    gen_multipath_channel,
)


def _ul(matrix: np.ndarray) -> EffectiveChannel:
    return EffectiveChannel(np.asarray(matrix, dtype=complex), Direction.UL)


class TestUplinkEstimate:
    def test_identity_profiles(self) -> None:
        rng = np.random.default_rng(0)
        link = Link(
            NodeProfile.identity(4, 8),
            NodeProfile.identity(1, 2),
            gen_multipath_channel(3, 2, 8, rng),
        )
        ul = estimate_ul_effective(
            link, dft_codebook(8), dft_codebook(2), np.ones(4), ap_id=3
        )
        np.testing.assert_allclose(ul.matrix, link.channel.matrix.T, atol=1e-10)
        assert ul.direction is Direction.UL
        assert ul.ap_id == 3

    def test_planted_profiles_up_to_one_scale(self) -> None:
        rng = np.random.default_rng(1)
        ap = gen_mismatch_profile(4, 16, 0.5, 0.5, rng)
        mu = gen_mismatch_profile(2, 4, 0.5, 0.5, rng)
        link = Link(ap, mu, gen_multipath_channel(4, 4, 16, rng))
        ul = estimate_ul_effective(
            link, dft_codebook(16), dft_codebook(4), ap.r1 / ap.r1[0]
        )
        truth = ap.r2[:, None] * link.channel.matrix.T * mu.t2[None, :]
        ratio = ul.matrix / truth
        assert np.max(np.abs(ratio / ratio[0, 0] - 1)) < 1e-9

    def test_pilot_count(self) -> None:
        rng = np.random.default_rng(2)
        link = Link(
            gen_mismatch_profile(2, 8, 0.3, 0.3, rng),
            gen_mismatch_profile(1, 1, 0.3, 0.3, rng),
            gen_multipath_channel(2, 1, 8, rng),
        )
        ul = estimate_ul_effective(link, dft_codebook(8), dft_codebook(1), np.ones(2))
        assert ul.pilots_used == 4
        assert link.pilots(Direction.UL) == 4


class TestDownlink:
    def test_unit_alphas_transpose(self) -> None:
        ul = _ul([[1, 2j], [3, 4], [5, -1j]])
        dl = dl_from_ul(ul, np.ones(3), np.ones(2))
        np.testing.assert_allclose(dl.matrix, ul.matrix.T)
        assert dl.direction is Direction.DL

    def test_scalar_ap_alpha(self) -> None:
        ul = _ul([[1, 2j], [3, 4]])
        dl = dl_from_ul(ul, 2 * np.ones(2), np.ones(2))
        np.testing.assert_allclose(dl.matrix, ul.matrix.T / 2)

    def test_shape_checked(self) -> None:
        with pytest.raises(DimensionMismatchError):
            dl_from_ul(_ul(np.ones((3, 1))), np.ones(2), np.ones(1))

    @pytest.mark.parametrize("side", ["ap", "mu"])
    def test_zero_alpha_is_domain_error(self, side: str) -> None:
        alpha_ap, alpha_mu = np.ones(2), np.ones(2)
        (alpha_ap if side == "ap" else alpha_mu)[1] = 0.0
        with pytest.raises(ZeroCoefficientError) as excinfo:
            dl_from_ul(_ul(np.ones((2, 2))), alpha_ap, alpha_mu)
        assert isinstance(excinfo.value, TandemcalError)

    def test_user_columns_stack(self) -> None:
        dls = [
            EffectiveChannel(np.array([[1, 2, 3]], dtype=complex), Direction.DL),
            EffectiveChannel(np.array([[4, 5, 6]], dtype=complex), Direction.DL),
        ]
        H = user_columns(dls, [np.ones(1), 2 * np.ones(1)])
        np.testing.assert_allclose(H, [[1, 8], [2, 10], [3, 12]])


class TestAssemble:
    def test_single_ap_unchanged(self) -> None:
        block = np.arange(6, dtype=complex).reshape(3, 2)
        np.testing.assert_array_equal(assemble_multi_ap([block], [1.0]), block)

    def test_blocks_divided_by_ratio(self) -> None:
        a = np.ones((2, 2), dtype=complex)
        b = 2j * np.ones((3, 2), dtype=complex)
        H = assemble_multi_ap([a, b], [1.0, 2j])
        assert H.shape == (5, 2)
        np.testing.assert_allclose(H, np.ones((5, 2)))

    def test_reference_ratio_must_be_one(self) -> None:
        with pytest.raises(ValueError):
            assemble_multi_ap([np.ones((1, 1))], [2.0])

    def test_zero_ratio(self) -> None:
        with pytest.raises(DegenerateRatioError):
            assemble_multi_ap([np.ones((1, 1)), np.ones((1, 1))], [1.0, 0.0])

    def test_user_count_must_agree(self) -> None:
        with pytest.raises(DimensionMismatchError):
            assemble_multi_ap([np.ones((2, 2)), np.ones((2, 3))], [1.0, 1.0])
