import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import brute_glcm_counts
from glcm_sampler.curation import CurationManifest, ManifestEntry
from glcm_sampler.glcm import (
    EntropyProfile,
    GlcmConfig,
    cooccurrence,
    cooccurrence_counts,
    entropy_profile,
    glcm_entropy,
    profile_to_csv,
    quantize,
    read_profile_csv,
    write_profile_csv,
)
from glcm_sampler.volume_io import Checker, Constant, PhantomSpec, Volume, generate_phantom

GRID = [[0, 0], [1, 1]]
UNIT_OFFSETS = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]


class TestQuantize:
    def test_endpoints(self):
        q = quantize(np.array([[3, 900]]), 3, 900, 16)
        assert q.tolist() == [[0, 15]]

    def test_two_levels_split_at_128(self):
        assert quantize(np.array([[127, 128]]), 0, 255, 2).tolist() == [[0, 1]]

    def test_constant_range(self):
        q = quantize(np.full((3, 3), 42), 42, 42, 8)
        assert np.all(q == 0)

    def test_clamps_outside_range(self):
        assert quantize(np.array([[0, 500]]), 10, 20, 4).tolist() == [[0, 3]]

    def test_matches_formula(self, rng):
        lo, hi, L = 100, 4100, 32
        v = rng.integers(lo, hi, size=(50, 50), endpoint=True)
        expected = np.minimum(L - 1, np.floor((v - lo) * L / (hi - lo + 1))).astype(int)
        assert np.array_equal(quantize(v, lo, hi, L), expected)


class TestCooccurrence:
    def test_horizontal_pairs(self):
        g = cooccurrence(GRID, (1, 0), symmetric=False)
        assert g.p.tolist() == [[0.5, 0.0], [0.0, 0.5]]

    def test_vertical_pairs(self):
        g = cooccurrence(GRID, (0, 1), symmetric=False)
        assert g.p.tolist() == [[0.0, 1.0], [0.0, 0.0]]

    def test_vertical_symmetric(self):
        g = cooccurrence(GRID, (0, 1), symmetric=True)
        assert g.p.tolist() == [[0.0, 0.5], [0.5, 0.0]]

    def test_offset_too_large(self):
        with pytest.raises(ValueError, match="no valid pairs"):
            cooccurrence(GRID, (2, 0))

    @settings(max_examples=200, deadline=None)
    @given(
        grid=hnp.arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
                        elements=st.integers(0, 5)),
        offset=st.sampled_from(UNIT_OFFSETS + [(2, 0), (0, 3), (-2, 1)]),
        symmetric=st.booleans(),
    )
    def test_matches_brute_force(self, grid, offset, symmetric):
        h, w = grid.shape
        if abs(offset[0]) >= w or abs(offset[1]) >= h:
            return
        counts = cooccurrence_counts(grid, offset, 6, symmetric)
        assert np.array_equal(counts, brute_glcm_counts(grid.tolist(), *offset, 6, symmetric))
        g = cooccurrence(grid, offset, symmetric, levels=6)
        assert abs(g.p.sum() - 1.0) <= 1e-12
        if symmetric:
            assert np.array_equal(g.p, g.p.T)

    @settings(max_examples=50, deadline=None)
    @given(grid=hnp.arrays(np.int64, (6, 7), elements=st.integers(0, 3)),
           perm=st.permutations(range(4)))
    def test_relabeling_permutes_matrix(self, grid, perm):
        perm = np.array(perm)
        a = cooccurrence(grid, (1, 1), True, levels=4)
        b = cooccurrence(perm[grid], (1, 1), True, levels=4)
        assert np.array_equal(b.p[np.ix_(perm, perm)], a.p)
        assert glcm_entropy(a) == pytest.approx(glcm_entropy(b), abs=1e-12)


class TestEntropy:
    def test_one_hot(self):
        p = np.zeros((4, 4))
        p[2, 1] = 1.0
        assert glcm_entropy(p) == 0.0

    def test_two_cells(self):
        assert glcm_entropy(np.array([[0.5, 0], [0, 0.5]])) == pytest.approx(math.log(2), abs=1e-12)

    def test_three_cells(self):
        p = np.array([[0.5, 0.25], [0.25, 0.0]])
        assert glcm_entropy(p) == pytest.approx(1.5 * math.log(2), abs=1e-12)
        assert glcm_entropy(p) == pytest.approx(1.039721, abs=1e-6)

    def test_uniform_hits_upper_bound(self):
        L = 8
        assert glcm_entropy(np.full((L, L), 1 / L**2)) == pytest.approx(2 * math.log(L), abs=1e-12)


def _manifest(vol_id, kept):
    return CurationManifest(vol_id, 0.5, tuple(
        ManifestEntry(i, 1.0 if k else 0.0, k, "external") for i, k in enumerate(kept)))


class TestEntropyProfile:
    def test_identical_slices(self, rng):
        sl = rng.integers(0, 4000, size=(16, 16))
        vol = Volume("v", np.stack([sl] * 5))
        prof = entropy_profile(vol)
        assert np.all(prof.values == prof.values[0])

    def test_constant_then_checker(self):
        vol = generate_phantom(PhantomSpec(8, 8, [3, 3], [Constant(), Checker(1, 500)]))
        cfg = GlcmConfig(levels=2, offset=(1, 0), symmetric=False)
        prof = entropy_profile(vol, None, cfg)
        assert prof.values[:3].tolist() == [0.0, 0.0, 0.0]
        assert prof.values[3:] == pytest.approx([math.log(2)] * 3, abs=1e-12)

    def test_manifest_filters(self, rng):
        vol = Volume("v", rng.integers(0, 100, size=(4, 8, 8)))
        prof = entropy_profile(vol, _manifest("v", [False, True, False, True]))
        assert len(prof) == 2
        assert prof.slice_indices.tolist() == [1, 3]

    def test_no_kept_slices(self, rng):
        vol = Volume("v", rng.integers(0, 100, size=(2, 8, 8)))
        with pytest.raises(ValueError, match="no kept slices"):
            entropy_profile(vol, _manifest("v", [False, False]))

    def test_manifest_mismatch(self, rng):
        vol = Volume("v", rng.integers(0, 100, size=(2, 8, 8)))
        with pytest.raises(ValueError, match="does not match"):
            entropy_profile(vol, _manifest("v", [True]))

    def test_per_slice_range(self):
        # global range would put both slices in level 0 at L=2
        a = np.zeros((4, 5), dtype=int)
        a[:, 1::2] = 1
        b = a * 1000
        vol = Volume("v", np.stack([a, b]))
        glob = entropy_profile(vol, None, GlcmConfig(levels=2, symmetric=False))
        per = entropy_profile(vol, None, GlcmConfig(levels=2, symmetric=False, range_mode="per_slice"))
        assert glob.values[0] == 0.0
        assert per.values.tolist() == pytest.approx([math.log(2)] * 2, abs=1e-12)

    def test_bounds_and_parallel_identity(self, rng):
        vol = Volume("v", rng.integers(0, 3000, size=(12, 20, 20)))
        cfg = GlcmConfig(levels=8)
        seq = entropy_profile(vol, None, cfg)
        par = entropy_profile(vol, None, cfg, workers=4)
        assert seq.values.tobytes() == par.values.tobytes()
        assert np.all(seq.values >= 0) and np.all(seq.values <= 2 * math.log(8))

    def test_offset_validated_against_volume(self, rng):
        vol = Volume("v", rng.integers(0, 10, size=(1, 4, 4)))
        with pytest.raises(ValueError):
            entropy_profile(vol, None, GlcmConfig(offset=(4, 0)))


class TestProfileCsv:
    def test_round_trip(self, tmp_path):
        prof = EntropyProfile("v", [0.1, 1 / 3, math.pi], [2, 5, 9])
        write_profile_csv(prof, tmp_path / "p.csv")
        text = (tmp_path / "p.csv").read_text()
        assert text.splitlines()[0] == "slice_index,entropy_nats"
        assert text.splitlines()[2] == "5,0.33333333333333331"
        back = read_profile_csv(tmp_path / "p.csv")
        assert back.values.tobytes() == prof.values.tobytes()
        assert back.slice_indices.tolist() == [2, 5, 9]

    def test_smoothed_column(self):
        prof = EntropyProfile("v", [1.0, 2.0], [0, 1]).with_smoothed([1.5, 1.5])
        assert profile_to_csv(prof).splitlines()[0] == "slice_index,entropy_nats,smoothed_nats"

    @pytest.mark.parametrize("text", ["", "slice_index,entropy_nats\n",
                                      "a,b\n0,1\n", "slice_index,entropy_nats\n0,x\n",
                                      "slice_index,entropy_nats\n1,0.5\n0,0.5\n"])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "p.csv").write_text(text)
        with pytest.raises(ValueError):
            read_profile_csv(tmp_path / "p.csv")
