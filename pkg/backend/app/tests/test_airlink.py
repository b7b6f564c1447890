"""
Tests for the transmission model and the sweep helpers.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from app.core.airlink import (  # noqa: E402
    Direction,
    Link,
    gather_broadcast,
    gather_observations,
    group_receive_beams,
    single_beam,
    transmit,
)
from app.core.errors import DimensionMismatchError  # noqa: E402
from app.core.model import (  # noqa: E402
    BeamformerMatrix,
    MultipathChannel,
    NodeProfile,
    dft_codebook,
    gen_mismatch_profile,
    gen_multipath_channel,
)


def _identity_link(m: int = 2, n: int = 2) -> Link:
    return Link(
        NodeProfile.identity(n, m),
        NodeProfile.identity(n, m),
        MultipathChannel(np.eye(m, dtype=complex)),
    )


class TestTransmit:
    def test_identity_chain(self) -> None:
        link = _identity_link()
        eye = BeamformerMatrix(np.eye(2, dtype=complex))
        y = transmit(link, eye, np.array([1, 0]), eye)
        np.testing.assert_allclose(y, [1, 0])
        assert link.tx_counter == 1

    def test_receive_beam_is_transposed(self) -> None:
        link = _identity_link()
        eye = BeamformerMatrix(np.eye(2, dtype=complex))
        hadamard = BeamformerMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
        y = transmit(link, eye, np.array([1, 0]), hadamard)
        np.testing.assert_allclose(y, np.array([1, 1]) / np.sqrt(2))

    def test_matches_matrix_model(self) -> None:
        rng = np.random.default_rng(0)
        tx = gen_mismatch_profile(2, 4, 0.5, 0.5, rng)
        rx = gen_mismatch_profile(1, 3, 0.5, 0.5, rng)
        link = Link(tx, rx, gen_multipath_channel(2, 3, 4, rng))
        F = dft_codebook(4).columns[:, :2]
        B = dft_codebook(3).columns[:, :1]
        x = np.array([1.0, 0.5j])
        expected = (
            np.diag(rx.r1)
            @ B.T
            @ np.diag(rx.r2)
            @ link.channel.matrix
            @ np.diag(tx.t2)
            @ F
            @ np.diag(tx.t1)
            @ x
        )
        y = transmit(link, BeamformerMatrix(F), x, BeamformerMatrix(B))
        np.testing.assert_allclose(y, expected, atol=1e-12)

    def test_noise_needs_rng(self) -> None:
        link = _identity_link()
        link.noise_variance = 0.1
        eye = BeamformerMatrix(np.eye(2, dtype=complex))
        with pytest.raises(ValueError):
            transmit(link, eye, np.array([1, 0]), eye)

    def test_wrong_digital_length(self) -> None:
        link = _identity_link()
        eye = BeamformerMatrix(np.eye(2, dtype=complex))
        with pytest.raises(DimensionMismatchError):
            transmit(link, eye, np.array([1, 0, 0]), eye)

    def test_channel_shape_checked(self) -> None:
        with pytest.raises(DimensionMismatchError):
            Link(
                NodeProfile.identity(1, 4),
                NodeProfile.identity(1, 2),
                MultipathChannel(np.ones((4, 2), dtype=complex)),
            )


class TestReverse:
    def test_reverse_swaps_and_shares_counter(self) -> None:
        rng = np.random.default_rng(1)
        a = gen_mismatch_profile(2, 4, 0.5, 0.5, rng)
        b = gen_mismatch_profile(1, 1, 0.5, 0.5, rng)
        link = Link(a, b, gen_multipath_channel(2, 1, 4, rng))
        back = link.reverse()
        assert back.tx_profile is b and back.rx_profile is a
        assert back.direction is Direction.UL
        np.testing.assert_array_equal(back.channel.matrix, link.channel.matrix.T)

        one = BeamformerMatrix(np.ones((1, 1), dtype=complex))
        fwd = single_beam(dft_codebook(4).column(0), 2)
        transmit(back, one, np.array([1.0]), fwd)
        transmit(link, fwd, np.array([1.0, 0.0]), one)
        assert link.pilots(Direction.UL) == 1
        assert link.pilots(Direction.DL) == 1
        assert link.tx_counter == 2


class TestGather:
    def test_group_padding(self) -> None:
        groups = group_receive_beams(dft_codebook(6), 4)
        assert len(groups) == 2
        np.testing.assert_array_equal(
            groups[1].columns[:, 2:], dft_codebook(6).columns[:, [0, 0]]
        )

    @pytest.mark.parametrize("m,n,expected", [(4, 4, 4), (8, 4, 16)])
    def test_pilot_count(self, m: int, n: int, expected: int) -> None:
        rng = np.random.default_rng(2)
        link = Link(
            gen_mismatch_profile(1, m, 0.3, 0.3, rng),
            gen_mismatch_profile(n, m, 0.3, 0.3, rng),
            gen_multipath_channel(3, m, m, rng),
        )
        book = dft_codebook(m)
        obs = gather_observations(link, book, group_receive_beams(book, n))
        assert obs.shape == (m, m)
        assert obs.pilots_used == expected
        assert link.tx_counter == expected

    def test_entries_follow_model(self) -> None:
        rng = np.random.default_rng(3)
        tx = gen_mismatch_profile(2, 4, 0.5, 0.5, rng)
        rx = gen_mismatch_profile(2, 4, 0.5, 0.5, rng)
        link = Link(tx, rx, gen_multipath_channel(3, 4, 4, rng))
        book = dft_codebook(4)
        obs = gather_observations(link, book, group_receive_beams(book, 2))

        H = link.channel.matrix
        for m in range(4):
            for i in range(4):
                chain = m % 2
                expected = (
                    rx.r1[chain]
                    * (book.column(m) * rx.r2)
                    @ H
                    @ (tx.t2 * book.column(i))
                    * tx.t1[0]
                )
                assert abs(obs.data[m, i] - expected) < 1e-12

    def test_broadcast_counts_physical_transmissions(self) -> None:
        rng = np.random.default_rng(4)
        hub = gen_mismatch_profile(2, 4, 0.3, 0.3, rng)
        peers = [gen_mismatch_profile(2, 4, 0.3, 0.3, rng) for _ in range(2)]
        links = [Link(hub, p, gen_multipath_channel(2, 4, 4, rng)) for p in peers]
        book = dft_codebook(4)
        groups = [group_receive_beams(book, 2)] * 2
        obs = gather_broadcast(links, book, groups)
        assert [o.pilots_used for o in obs] == [8, 8]

        for link, o in zip(links, obs):
            solo = Link(hub, link.rx_profile, link.channel)
            ref = gather_observations(solo, book, group_receive_beams(book, 2))
            np.testing.assert_allclose(o.data, ref.data, atol=1e-12)
