import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mola.errors import ConfigurationError, ValidationError
from mola.model import (
    AllocationMap,
    LandUse,
    ModelParams,
    SuitabilityField,
    delta_phi_single_flip,
    evaluate,
    neighbor_match_count,
)

from .oracles import matching_pair_count, objective_by_hand


def uniform_field(rows, cols, values=(1.0, 1.0, 1.0)):
    scores = np.zeros((rows, cols, 3))
    scores[:, :] = values
    return SuitabilityField(scores)


class TestNeighborMatchCount:
    def test_all_same_center(self):
        m = AllocationMap.filled(3, 3, LandUse.AGRICULTURE)
        assert neighbor_match_count(m, 1, 1) == 8

    def test_all_same_corner(self):
        m = AllocationMap.filled(3, 3, LandUse.AGRICULTURE)
        assert neighbor_match_count(m, 0, 0) == 3

    def test_checkerboard_center(self):
        cells = np.indices((3, 3)).sum(axis=0) % 2
        m = AllocationMap(cells.astype(np.uint8))
        # Only the four diagonal neighbors share the center's use.
        assert neighbor_match_count(m, 1, 1) == 4

    def test_out_of_bounds(self):
        m = AllocationMap.filled(3, 3)
        with pytest.raises(IndexError):
            neighbor_match_count(m, 3, 0)
        with pytest.raises(IndexError):
            neighbor_match_count(m, 0, -1)


class TestEvaluate:
    def test_all_agriculture_closed_form(self):
        m = AllocationMap.filled(3, 3, LandUse.AGRICULTURE)
        f = uniform_field(3, 3, (1.0, 0.0, 0.0))
        v = evaluate(m, f, ModelParams(p_suit=2.0))
        # 4 corners x 3 + 4 edges x 5 + center x 8
        assert v.phi_c == 40
        assert v.phi_s == 9.0
        assert v.phi == -58.0

    def test_single_cell(self):
        m = AllocationMap.filled(1, 1, LandUse.CONSERVATION)
        scores = np.zeros((1, 1, 3))
        scores[0, 0, 2] = 0.7
        v = evaluate(m, SuitabilityField(scores), ModelParams(p_suit=1.0))
        assert v.phi_c == 0
        assert v.phi_s == 0.7
        assert v.phi == -0.7

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            evaluate(AllocationMap.filled(2, 2), uniform_field(3, 3), ModelParams(p_suit=1.0))

    def test_double_count_against_pair_oracle(self, rng):
        for _ in range(200):
            cells = rng.integers(0, 3, size=(4, 4), dtype=np.uint8)
            v = evaluate(AllocationMap(cells), uniform_field(4, 4), ModelParams(p_suit=1.0))
            assert v.phi_c == 2 * matching_pair_count(cells)

    def test_decomposition_identity(self, rng):
        pc, ps = 1.7, 3.3
        for _ in range(50):
            cells = rng.integers(0, 3, size=(5, 4), dtype=np.uint8)
            scores = rng.random((5, 4, 3))
            v = evaluate(AllocationMap(cells), SuitabilityField(scores),
                         ModelParams(p_suit=ps, p_compact=pc))
            assert v.phi == -pc * v.phi_c - ps * v.phi_s

    def test_matches_hand_oracle(self, rng):
        for _ in range(50):
            cells = rng.integers(0, 3, size=(4, 5), dtype=np.uint8)
            scores = rng.random((4, 5, 3))
            v = evaluate(AllocationMap(cells), SuitabilityField(scores), ModelParams(p_suit=2.5))
            assert v.phi == pytest.approx(objective_by_hand(cells, scores, 1.0, 2.5), abs=1e-9)

    def test_label_permutation_equivariance(self, rng):
        for perm in ([1, 2, 0], [2, 1, 0], [0, 2, 1]):
            cells = rng.integers(0, 3, size=(5, 5), dtype=np.uint8)
            scores = rng.random((5, 5, 3))
            params = ModelParams(p_suit=2.0)
            v1 = evaluate(AllocationMap(cells), SuitabilityField(scores), params)
            perm_arr = np.array(perm, dtype=np.uint8)
            permuted_cells = perm_arr[cells]
            # Permute the planes the same way: new plane perm[k] holds old plane k.
            permuted_scores = np.empty_like(scores)
            for k in range(3):
                permuted_scores[:, :, perm[k]] = scores[:, :, k]
            v2 = evaluate(AllocationMap(permuted_cells), SuitabilityField(permuted_scores), params)
            assert v2.phi_c == v1.phi_c
            assert v2.phi_s == v1.phi_s
            assert v2.phi == v1.phi


class TestDeltaPhiSingleFlip:
    def test_identity_flip(self, rng):
        cells = rng.integers(0, 3, size=(3, 3), dtype=np.uint8)
        f = SuitabilityField(rng.random((3, 3, 3)))
        assert delta_phi_single_flip(AllocationMap(cells), f, ModelParams(p_suit=2.0),
                                     1, 1, cells[1, 1]) == 0.0

    def test_single_cell_flip(self):
        scores = np.zeros((1, 1, 3))
        scores[0, 0, 0] = 0.4
        scores[0, 0, 1] = 0.9
        m = AllocationMap.filled(1, 1, LandUse.AGRICULTURE)
        d = delta_phi_single_flip(m, SuitabilityField(scores), ModelParams(p_suit=1.0),
                                  0, 0, LandUse.CONSTRUCTION)
        assert d == pytest.approx(-0.5)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 24), st.integers(0, 2), st.integers(0, 2**31 - 1))
    def test_matches_full_reevaluation(self, cell, new_use, seed):
        rng = np.random.default_rng(seed)
        cells = rng.integers(0, 3, size=(5, 5), dtype=np.uint8)
        scores = rng.random((5, 5, 3))
        field = SuitabilityField(scores)
        params = ModelParams(p_suit=rng.random() * 5, p_compact=1.0)
        i, j = divmod(cell, 5)
        before = evaluate(AllocationMap(cells), field, params)
        flipped = cells.copy()
        flipped[i, j] = new_use
        after = evaluate(AllocationMap(flipped), field, params)
        d = delta_phi_single_flip(AllocationMap(cells), field, params, i, j, new_use)
        assert d == pytest.approx(after.phi - before.phi, abs=1e-9)


class TestValidation:
    def test_bad_label(self):
        with pytest.raises(ValidationError):
            AllocationMap(np.full((2, 2), 3, dtype=np.uint8))

    def test_empty_grid(self):
        with pytest.raises(ValidationError):
            AllocationMap(np.empty((0, 2), dtype=np.uint8))

    def test_negative_score_names_cell(self):
        scores = np.ones((2, 2, 3))
        scores[1, 0, 2] = -0.5
        with pytest.raises(ValidationError, match=r"row 1, col 0, use 2"):
            SuitabilityField(scores)

    def test_nan_score(self):
        scores = np.ones((2, 2, 3))
        scores[0, 1, 1] = np.nan
        with pytest.raises(ValidationError, match=r"row 0, col 1, use 1"):
            SuitabilityField(scores)

    def test_params_ranges(self):
        with pytest.raises(ValidationError):
            ModelParams(p_suit=-1.0)
        with pytest.raises(ValidationError):
            ModelParams(p_suit=1.0, temperature=0.0)
        with pytest.raises(ValidationError):
            ModelParams(p_suit=1.0, p_compact=0.0)

    def test_land_use_codes_dense(self):
        assert [int(u) for u in LandUse] == [0, 1, 2]

    def test_map_value_semantics(self, rng):
        m = AllocationMap.random(4, 4, rng)
        c = m.copy()
        c.cells[0, 0] = (c.cells[0, 0] + 1) % 3
        assert m != c

    def test_checksum_identifies_field(self, rng):
        f1 = SuitabilityField(rng.random((3, 3, 3)))
        f2 = f1.copy()
        assert f1.checksum() == f2.checksum()
        f2.scores[0, 0, 0] += 1e-12
        assert f1.checksum() != SuitabilityField(f2.scores).checksum()
