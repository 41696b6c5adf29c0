"""Tests for seeding, confidence intervals and export helpers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from svdfbmc.core.utils import Utils


class TestTrialGenerators:
    def test_same_key_same_streams(self):
        a = Utils.trial_generators(2017, 1, 5)
        b = Utils.trial_generators(2017, 1, 5)
        for name in Utils.TRIAL_STREAMS:
            assert_array_equal(a[name].random(8), b[name].random(8))

    def test_streams_are_independent(self):
        gens = Utils.trial_generators(2017, 0, 0)
        draws = [gens[name].random(8) for name in Utils.TRIAL_STREAMS]
        assert not np.allclose(draws[0], draws[1])
        assert not np.allclose(draws[1], draws[2])
        assert not np.allclose(draws[2], draws[3])

    def test_phase_stream_leaves_other_streams_unchanged(self):
        gens = Utils.trial_generators(2017, 2, 3)
        children = np.random.SeedSequence([2017, 2, 3]).spawn(3)
        for name, child in zip(("bits", "channel", "noise"), children):
            assert_array_equal(gens[name].random(8), np.random.default_rng(child).random(8))

    def test_different_frames_differ(self):
        a = Utils.trial_generators(2017, 0, 0)["channel"].random(8)
        b = Utils.trial_generators(2017, 0, 1)["channel"].random(8)
        c = Utils.trial_generators(2017, 1, 0)["channel"].random(8)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)


class TestWilsonInterval:
    def test_known_value(self):
        centre, half = Utils.wilson_interval(50, 100)
        assert centre == pytest.approx(0.5)
        assert half == pytest.approx(0.09617, abs=1e-4)

    def test_zero_errors_has_positive_width(self):
        centre, half = Utils.wilson_interval(0, 1000)
        assert centre > 0 and half > 0
        assert centre - half == pytest.approx(0.0, abs=1e-12)

    def test_no_trials(self):
        assert Utils.wilson_interval(0, 0) == (0.0, 0.0)


class TestExports:
    def test_csv_uses_crlf_and_repr_floats(self, tmp_path):
        path = tmp_path / "out" / "table.csv"
        Utils.write_csv(str(path), ["name", "value"], [["a,b", 0.1], ["c", 3]])
        assert path.read_bytes() == b'name,value\r\n"a,b",0.1\r\nc,3\r\n'

    def test_complex64_dump(self, tmp_path, rng):
        data = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        path = tmp_path / "dump.c64"
        shape = Utils.export_complex64(str(path), data)
        assert shape == (3, 4)
        back = np.fromfile(str(path), dtype="<c8").reshape(shape)
        assert_allclose(back, data, rtol=1e-6)

    def test_columns(self, tmp_path):
        path = tmp_path / "cols.txt"
        Utils.export_columns(str(path), {"i": np.arange(4), "x": np.linspace(0, 1, 4)})
        assert path.read_text().startswith("# i x\n")
        back = np.loadtxt(str(path))
        assert_allclose(back[:, 1], np.linspace(0, 1, 4))
