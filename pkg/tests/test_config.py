"""Tests for configuration loading, validation and digests."""

import pytest

from svdfbmc.core.config import (
    SimConfig,
    create_default_config_file,
    default_active_subchannels,
    load_config,
    load_module_values,
    write_config_module,
)
from svdfbmc.core.errors import ConfigurationError


class TestDefaults:
    def test_active_layout_has_48_data_subchannels(self):
        active = default_active_subchannels(64)
        assert len(active) == 48
        assert 0 not in active
        for pilot in (7, 21, 64 - 7, 64 - 21):
            assert pilot not in active
        assert active[0] == 1 and active[-1] == 63
        assert 26 in active and 27 not in active and 38 in active and 37 not in active

    def test_numerology(self):
        config = SimConfig()
        assert config.fft_size == 256
        assert config.bits_per_symbol == 6
        assert sum(config.active_mask()) == 48
        assert SimConfig(FFT_FACTOR=8).fft_size == 512
        assert SimConfig(MODULATION=16).bits_per_symbol == 4

    def test_defaults_validate(self):
        assert SimConfig().validate().SYSTEM == "proposed"


class TestValidation:
    @pytest.mark.parametrize(
        "changes",
        [
            {"SYSTEM": "bogus"},
            {"MODULATION": 32},
            {"CHANNEL_MODEL": "G"},
            {"CHANNEL_MODEL": "custom"},
            {"SMOOTHING_METHOD": "none"},
            {"FFT_FACTOR": 3},
            {"SYSTEM": "ofdm", "FFT_FACTOR": 8},
            {"NUM_STREAMS": 3},
            {"N_ITER": 0},
            {"FRAMES_PER_POINT": 0},
            {"SNR_GRID_DB": [10.0, 10.0]},
            {"SNR_GRID_DB": [20.0, 10.0]},
            {"SNR_GRID_DB": []},
            {"ACTIVE_SUBCHANNELS": [64]},
            {"WORKERS": 0},
            {"SVD_PHASE": "free"},
        ],
    )
    def test_invalid_values_raise(self, changes):
        with pytest.raises(ConfigurationError):
            SimConfig(**changes).validate()

    def test_configuration_error_is_a_value_error(self):
        with pytest.raises(ValueError):
            SimConfig(SYSTEM="bogus").validate()


class TestDigest:
    def test_digest_is_stable(self):
        assert SimConfig().digest() == SimConfig().digest()
        assert len(SimConfig().digest()) == 12

    def test_digest_tracks_result_fields(self):
        base = SimConfig().digest()
        assert SimConfig(MASTER_SEED=1).digest() != base
        assert SimConfig(SNR_GRID_DB=[10.0]).digest() != base

    def test_digest_ignores_execution_settings(self):
        base = SimConfig().digest()
        assert SimConfig(WORKERS=4).digest() == base
        assert SimConfig(OUTPUT_DIR="elsewhere").digest() == base


class TestConfigFiles:
    def test_load_explicit_file(self, tmp_path):
        path = tmp_path / "run.py"
        path.write_text('SYSTEM = "ofdm"\nMASTER_SEED = 5\nUNRELATED = 1\n')
        config = load_config(str(path))
        assert config.SYSTEM == "ofdm"
        assert config.MASTER_SEED == 5
        assert not hasattr(config, "UNRELATED")

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_module_values(str(tmp_path / "missing.py"))

    def test_broken_file_raises(self, tmp_path):
        path = tmp_path / "broken.py"
        path.write_text("SYSTEM = \n")
        with pytest.raises(ConfigurationError):
            load_module_values(str(path))

    def test_search_finds_config_in_working_directory(self, tmp_path, monkeypatch):
        (tmp_path / "config.py").write_text("N_ITER = 10\n")
        monkeypatch.chdir(tmp_path)
        assert load_config().N_ITER == 10

    def test_written_module_loads_back(self, tmp_path):
        original = SimConfig(SYSTEM="finer", SNR_GRID_DB=[5.0, 7.5], FFT_FACTOR=8)
        path = tmp_path / "manifest.py"
        write_config_module(original, str(path), header="manifest")
        assert path.read_text().startswith("# manifest\n")
        loaded = load_config(str(path))
        assert loaded.to_dict() == original.to_dict()
        assert loaded.digest() == original.digest()

    def test_default_file_is_valid(self, tmp_path):
        path = tmp_path / "config.py"
        assert create_default_config_file(str(path))
        load_config(str(path)).validate()
