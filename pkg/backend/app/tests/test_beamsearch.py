"""
Tests for beam-pair selection and full-rank perturbation.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from app.core.airlink import (  # noqa: E402
    Direction,
    Link,
    ObservationMatrix,
    gather_observations,
    group_receive_beams,
)
from app.core.beamsearch import (  # noqa: E402
    best_beam_pair,
    filter_pairs_by_snr,
    perturb_full_rank,
    ranked_beam_pairs,
    select_beams,
)
from app.core.errors import PerturbationError  # noqa: E402
from app.core.model import (  # noqa: E402
    BeamformerMatrix,
    MultipathChannel,
    NodeProfile,
    array_response,
    dft_codebook,
)

DIAGONAL = np.array([[1.0, 0.0], [0.0, 3.0]])


class TestBestPair:
    def test_unique_max(self) -> None:
        assert best_beam_pair(DIAGONAL) == (1, 1)

    def test_tie_goes_to_lowest_indices(self) -> None:
        assert best_beam_pair(np.ones((3, 3))) == (0, 0)

    def test_rows_are_receive_beams(self) -> None:
        obs = ObservationMatrix(np.array([[0, 0], [5j, 0]]), 4, Direction.DL)
        assert best_beam_pair(obs) == (0, 1)

    def test_empty(self) -> None:
        with pytest.raises(ValueError):
            best_beam_pair(np.zeros((0, 0)))

    def test_ranked_pairs_strongest_first(self) -> None:
        assert ranked_beam_pairs(DIAGONAL) == [(1, 1), (0, 0), (0, 1), (1, 0)]

    def test_ranked_head_is_best_pair(self) -> None:
        rng = np.random.default_rng(6)
        for _ in range(10):
            data = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
            ranked = ranked_beam_pairs(data)
            assert ranked[0] == best_beam_pair(data)
            assert len(ranked) == 15 == len(set(ranked))

    def test_ranked_ties_follow_best_pair_order(self) -> None:
        assert ranked_beam_pairs(np.ones((2, 2))) == [(0, 0), (0, 1), (1, 0), (1, 1)]


class TestSnrFilter:
    def test_threshold(self) -> None:
        assert filter_pairs_by_snr(DIAGONAL, 1.0, 3.0) == {(1, 1)}

    def test_infinite_thresholds(self) -> None:
        obs = np.ones((3, 3))
        assert len(filter_pairs_by_snr(obs, 1.0, -np.inf)) == 9
        assert filter_pairs_by_snr(obs, 1.0, np.inf) == set()

    def test_noise_must_be_positive(self) -> None:
        with pytest.raises(ValueError):
            filter_pairs_by_snr(DIAGONAL, 0.0, 3.0)


class TestPerturb:
    def test_unitary_set_accepted_first_try(self) -> None:
        out = perturb_full_rank(dft_codebook(8), 0.3, np.random.default_rng(0))
        assert out.is_full_rank
        assert out.condition_number() <= 1e3
        assert out.is_phase_only()

    def test_single_column_grows_to_full_rank(self) -> None:
        one = BeamformerMatrix(dft_codebook(4).columns[:, :1])
        out = perturb_full_rank(one, 0.3, np.random.default_rng(1))
        assert out.columns.shape == (4, 4)
        assert np.linalg.matrix_rank(out.columns) == 4
        unit = out.columns / np.linalg.norm(out.columns, axis=0)
        gram = np.abs(unit.conj().T @ unit)
        assert np.all(gram[~np.eye(4, dtype=bool)] < 1)

    def test_tiny_epsilon_fails(self) -> None:
        one = BeamformerMatrix(dft_codebook(4).columns[:, :1])
        with pytest.raises(PerturbationError, match="larger epsilon"):
            perturb_full_rank(one, 1e-9, np.random.default_rng(2))

    def test_jittered_columns_stay_close_to_source(self) -> None:
        # |<out_j, src_j>| >= cos(eps) >= 1 - eps^2/2 for unit-norm phase-only beams
        epsilon = 0.3
        source = BeamformerMatrix(dft_codebook(8).columns[:, [1, 4, 6]])
        for seed in range(20):
            out = perturb_full_rank(source, epsilon, np.random.default_rng(seed))
            for j in range(8):
                inner = np.vdot(source.column(j % 3), out.column(j))
                assert abs(inner) >= 1 - epsilon**2 / 2 - 1e-12

    @pytest.mark.parametrize("epsilon", [0.0, -0.1, 4.0])
    def test_epsilon_range(self, epsilon: float) -> None:
        with pytest.raises(ValueError):
            perturb_full_rank(dft_codebook(2), epsilon, np.random.default_rng(3))


class TestSelect:
    def test_uses_qualified_transmit_beams(self) -> None:
        data = np.zeros((4, 4), dtype=complex)
        data[0, 1] = data[2, 3] = 10.0
        obs = ObservationMatrix(data, 16, Direction.DL)
        out = select_beams(
            obs, dft_codebook(4), 1.0, 10.0, 0.3, np.random.default_rng(4)
        )
        assert out.columns.shape == (4, 4)
        assert out.is_full_rank

    def test_falls_back_to_best_pair(self) -> None:
        obs = ObservationMatrix(0.01 * np.ones((4, 4)), 16, Direction.DL)
        out = select_beams(
            obs, dft_codebook(4), 1.0, 10.0, 0.3, np.random.default_rng(5)
        )
        base = dft_codebook(4).column(0)
        # every column is a jittered copy of the best transmit beam
        phase = np.angle(out.columns / base[:, None])
        assert np.all(np.abs(phase) < 0.3 + 1e-12)

    def test_generator_is_required(self) -> None:
        obs = ObservationMatrix(np.ones((2, 2)), 4, Direction.DL)
        with pytest.raises(TypeError):
            select_beams(obs, dft_codebook(2), 1.0, 0.0, 0.3)
        with pytest.raises(ValueError, match="seeded generator"):
            select_beams(obs, dft_codebook(2), 1.0, 0.0, 0.3, None)

    def test_same_seed_same_beams(self) -> None:
        obs = ObservationMatrix(np.ones((4, 4)), 16, Direction.DL)
        book = dft_codebook(4)
        first = select_beams(obs, book, 1.0, 0.0, 0.3, np.random.default_rng(9))
        second = select_beams(obs, book, 1.0, 0.0, 0.3, np.random.default_rng(9))
        np.testing.assert_array_equal(first.columns, second.columns)


def _on_grid_link(q: int, num_antennas: int, rng: np.random.Generator) -> Link:
    # DFT column q steers to sin(theta) = 2q/M; three weak off-grid paths
    scale = np.sqrt(num_antennas)
    steer = array_response(np.arcsin(2 * q / num_antennas), num_antennas)
    row = scale * steer.conj()
    for _ in range(3):
        gain = 0.1 * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
        aod = rng.uniform(-np.pi / 2, np.pi / 2)
        row = row + scale * gain * array_response(aod, num_antennas).conj()
    return Link(
        NodeProfile.identity(2, num_antennas),
        NodeProfile.identity(1, 1),
        MultipathChannel(row[None, :]),
        noise_variance=1e-4,
    )


@pytest.mark.slow
class TestDominantPath:
    def test_best_pair_finds_on_grid_path(self) -> None:
        rng = np.random.default_rng(2024)
        book = dft_codebook(8)
        groups = group_receive_beams(dft_codebook(1), 1)
        hits = 0
        for _ in range(200):
            q = int(rng.integers(0, 4))
            link = _on_grid_link(q, 8, rng)
            obs = gather_observations(link, book, groups, rng)
            hits += best_beam_pair(obs)[0] == q
        assert hits >= 0.95 * 200
