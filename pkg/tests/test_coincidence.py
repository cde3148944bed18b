import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mixed_oracle
from postchsh.coincidence import (
    CoincidenceTable,
    CountsFormatError,
    ch_probabilities,
    counts_to_string,
    load_counts,
    per_setting_p_zx,
    reconstruct_p_xx,
    reconstruct_p_zz,
    save_counts,
    six_term_bound,
)
from postchsh.measurement import EXPERIMENT_SETTINGS, joint_distribution, sample
from postchsh.pipeline import exact_table, sampled_table
from postchsh.statevector import make_ghz, make_weighted_ghz

GHZ = make_ghz(3)


def counts_table(theta=math.pi / 4, v=1.0, total=8000):
    """Exact probabilities scaled to integer counts (exact for multiples of 8/4 weights)."""
    state = make_weighted_ghz(theta)
    rows = {}
    for s in EXPERIMENT_SETTINGS:
        p = joint_distribution(state, s, v).probs * total
        assert np.allclose(p, np.round(p), atol=1e-9)
        rows[s] = np.round(p).astype(int)
    return CoincidenceTable(rows)


def uniform_table(total=800):
    return CoincidenceTable({s: [total // 8] * 8 for s in EXPERIMENT_SETTINGS})


class TestReconstruction:
    def test_p_zz_exact(self):
        assert reconstruct_p_zz(counts_table()) == pytest.approx(0.75, abs=1e-12)
        assert reconstruct_p_zz(exact_table()) == pytest.approx(0.75, abs=1e-12)

    def test_p_zz_uniform(self):
        assert reconstruct_p_zz(uniform_table()) == pytest.approx(0.5, abs=1e-12)

    def test_p_zz_all_plus(self):
        t = CoincidenceTable({"ZZZ": [10, 0, 0, 0, 0, 0, 0, 0]})
        assert reconstruct_p_zz(t) == 0.0

    def test_six_term(self):
        assert six_term_bound(counts_table()) == pytest.approx(0.0, abs=1e-12)
        assert six_term_bound(uniform_table()) == pytest.approx(6 / 8, abs=1e-12)

    @given(st.floats(0, 1))
    def test_six_term_visibility(self, v):
        assert six_term_bound(exact_table(visibility=v)) == pytest.approx((1 - v) * 6 / 8, abs=1e-12)

    @pytest.mark.parametrize("label", ["ZXX", "XZX", "XXZ"])
    def test_per_setting(self, label):
        assert per_setting_p_zx(counts_table(), label) == pytest.approx(0.0, abs=1e-12)
        assert per_setting_p_zx(uniform_table(), label) == pytest.approx(0.25, abs=1e-12)

    @given(st.floats(0, 1))
    def test_per_setting_visibility(self, v):
        assert per_setting_p_zx(exact_table(visibility=v), "ZXX") == pytest.approx((1 - v) / 4, abs=1e-12)

    def test_per_setting_shape(self):
        with pytest.raises(ValueError):
            per_setting_p_zx(counts_table(), "XXX")

    def test_p_xx(self):
        assert reconstruct_p_xx(counts_table()) == pytest.approx(0.25, abs=1e-12)
        assert reconstruct_p_xx(uniform_table()) == pytest.approx(0.25, abs=1e-12)

    def test_p_xx_product_state(self):
        d = mixed_oracle(make_weighted_ghz(0.0).amplitudes, "XXX", 1.0)
        expected = d[(1, 1, 1)] + d[(-1, -1, -1)]
        assert reconstruct_p_xx(exact_table(theta=0.0)) == pytest.approx(expected, abs=1e-12)

    def test_missing_setting(self):
        t = CoincidenceTable({"ZZZ": [1] * 8})
        with pytest.raises(KeyError):
            six_term_bound(t)
        with pytest.raises(KeyError):
            reconstruct_p_xx(t)

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            reconstruct_p_zz(CoincidenceTable({"ZZZ": [0] * 8}))

    @settings(max_examples=50)
    @given(st.floats(0, 1), st.floats(-3, 3))
    def test_per_setting_below_bound(self, v, theta):
        t = exact_table(theta, v)
        assert per_setting_p_zx(t, "ZXX") + per_setting_p_zx(t, "XZX") <= six_term_bound(t) + 1e-12

    def test_ch_probabilities_modes(self):
        t = exact_table(visibility=0.5)
        per = ch_probabilities(t)
        bnd = ch_probabilities(t, use_bound=True)
        assert per.zx_source == "per_setting" and bnd.zx_source == "six_term_bound"
        assert bnd.p_zx == bnd.p_xz == pytest.approx(per.six_term_bound)
        assert per.p_zx == pytest.approx(0.125)


class TestSampledTable:
    def test_within_5_sigma(self):
        shots = 100_000
        t = sampled_table(shots=shots, seed=77)
        for value, p in [(reconstruct_p_zz(t), 0.75), (reconstruct_p_xx(t), 0.25)]:
            assert abs(value - p) <= 5 * math.sqrt(p * (1 - p) / shots)
        assert six_term_bound(t) == 0.0
        assert per_setting_p_zx(t, "ZXX") == 0.0

    def test_counts_sum_to_shots(self):
        t = sampled_table(shots=1234, seed=1)
        for s in t.settings:
            assert t.total_shots(s) == 1234


class TestCountsFile:
    def test_parse_line(self):
        t = load_counts(io.StringIO("ZXX -1 1 -1 532\n"))
        assert t.count("ZXX", (-1, 1, -1)) == 532
        assert t.total_shots("ZXX") == 532

    def test_comments_and_blanks(self):
        t = load_counts(io.StringIO("# header\n\nZZZ 1 1 1 5  # trailing\nZZZ +1 -1 -1 7\n"))
        assert t.total_shots("ZZZ") == 12

    def test_roundtrip(self, tmp_path):
        t = sampled_table(visibility=0.7, shots=500, seed=3)
        path = tmp_path / "counts.txt"
        save_counts(t, path)
        assert load_counts(path) == t
        assert counts_to_string(load_counts(path)) == path.read_text()

    def test_roundtrip_stream(self):
        t = uniform_table()
        buf = io.StringIO()
        save_counts(t, buf)
        buf.seek(0)
        assert load_counts(buf) == t

    @pytest.mark.parametrize("line, needle", [
        ("ZXX -1 0 1 5", "field 'b'"),
        ("ZQX -1 1 1 5", "unknown setting"),
        ("ZXX -1 1 1 -5", "negative"),
        ("ZXX -1 1 1", "expected 5 fields"),
        ("ZXX -1 1 1 2.5", "not an integer"),
        ("ZZ -1 1 1 3", "unknown setting"),
    ])
    def test_errors(self, line, needle):
        with pytest.raises(CountsFormatError, match=needle) as info:
            load_counts(io.StringIO("# ok\nZZZ 1 1 1 3\n" + line + "\n"))
        assert info.value.lineno == 3
        assert "line 3" in str(info.value)

    def test_duplicate(self):
        with pytest.raises(CountsFormatError, match="duplicate"):
            load_counts(io.StringIO("ZZZ 1 1 1 3\nZZZ 1 1 1 4\n"))

    def test_exact_table_not_writable(self):
        with pytest.raises(ValueError):
            counts_to_string(exact_table())

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            CoincidenceTable({"ZZZ": [1, 2, 3]})
        with pytest.raises(ValueError):
            CoincidenceTable({"ZZZ": [-1] + [0] * 7})
        with pytest.raises(ValueError):
            CoincidenceTable({"ZZ": [0] * 8})
