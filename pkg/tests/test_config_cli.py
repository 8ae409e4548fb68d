import copy
import math

import numpy as np
import pytest

from cvepr import cli, config
from cvepr.detection import SpectrumTrace
from cvepr.errors import ConfigValidationError
from cvepr.runs import run_epr_spectrum, run_phasematch, run_squeeze_spectrum, run_validate

R_068 = -0.5 * math.log(0.68)


def preset_dict(name):
    return config.to_dict(config.load_preset(name))


# ---------------------------------------------------------------- config


@pytest.mark.parametrize("name", config.PRESETS)
def test_preset_round_trip(name):
    cfg = config.load_preset(name)
    assert config.loads(config.dumps(cfg)) == cfg


def test_unknown_preset():
    with pytest.raises(ConfigValidationError):
        config.load_preset("nope")


def test_validation_lists_every_problem():
    data = preset_dict("paper-fig3")
    data["hbs"]["transmittance"] = 1.5
    data["paths"]["efficiency"] = [0.9, 1.2]
    data["analyzer"]["vbw_hz"] = -1.0
    data["mc"]["n_samples"] = 3
    data["bogus"] = 1
    with pytest.raises(ConfigValidationError) as info:
        config.from_dict(data)
    msg = str(info.value)
    for field in ("hbs.transmittance", "paths.efficiency", "analyzer.vbw_hz", "mc.n_samples", "bogus"):
        assert field in msg
    assert len(info.value.problems) == 5


def test_empty_frequency_list():
    data = preset_dict("paper-fig3")
    data["mc"]["frequencies_hz"] = []
    with pytest.raises(ConfigValidationError, match="frequency list is empty"):
        config.from_dict(data)


def test_source_needs_one_squeezing_spec():
    data = preset_dict("paper-fig3")
    data["source"][0]["r"] = 0.2
    with pytest.raises(ConfigValidationError, match="source\\[0\\]"):
        config.from_dict(data)


def test_squeezing_from_pump_power():
    data = preset_dict("paper-fig3")
    for s in data["source"]:
        s.pop("squeezing_ratio")
        s["pump_power_mw"] = 30.0
        s["gain_per_sqrt_mw"] = 0.035206
    cfg = config.from_dict(data)
    assert cfg.sources[0].squeezer().r == pytest.approx(R_068, rel=1e-4)


def test_toml_syntax_error():
    with pytest.raises(ConfigValidationError, match="TOML"):
        config.loads("name = ")


def test_seed_bounds():
    data = preset_dict("paper-fig3")
    data["seed"] = 2**64
    with pytest.raises(ConfigValidationError, match="seed"):
        config.from_dict(data)


def test_missing_waveguide_block():
    with pytest.raises(ConfigValidationError, match="waveguide"):
        run_phasematch(config.load_preset("paper-fig3"))


# ---------------------------------------------------------------- runners


def fig2_with(**source):
    data = preset_dict("paper-fig2")
    src = data["source"][0]
    src.pop("squeezing_ratio", None)
    src.update(source)
    return config.from_dict(data)


def test_unsqueezed_source_gives_vacuum_traces():
    res = run_squeeze_spectrum(fig2_with(r=0.0))
    for name in ("squeezed", "antisqueezed"):
        tr = SpectrumTrace.from_csv(res.files[f"fig2b_{name}.csv"])
        # vacuum/vacuum ratio with ~1% jitter on each trace
        assert abs(np.mean(tr.power_db)) < 0.01
        assert np.max(np.abs(tr.power_db)) < 0.3


def test_squeeze_spectrum_closed_forms():
    res = run_squeeze_spectrum(config.load_preset("paper-fig2"))
    s = res.summary
    eta = 0.994
    # one squeezed input on the HBS, vacuum on the other: (e^{-2r} + 1) / 2
    v_sq = (0.68 + 1) / 2
    v_anti = (1 / 0.68 + 1) / 2
    assert s["model_squeezed_db"] == pytest.approx(10 * math.log10(eta * v_sq + 1 - eta), abs=1e-12)
    assert s["model_antisqueezed_db"] == pytest.approx(
        10 * math.log10(eta * v_anti + 1 - eta), abs=1e-12
    )
    assert s["squeezed_db_mean"] == pytest.approx(s["model_squeezed_db"], abs=0.02)
    assert s["antisqueezed_db_mean"] == pytest.approx(s["model_antisqueezed_db"], abs=0.02)
    assert set(res.files) == {
        f"fig2{p}_{n}.csv" for p in "ab" for n in ("vacuum", "squeezed", "antisqueezed", "dark")
    } - {"fig2b_dark.csv"}


def test_squeeze_spectrum_requires_one_source():
    with pytest.raises(ConfigValidationError, match="exactly one"):
        run_squeeze_spectrum(config.load_preset("paper-fig3"))


def test_wrong_phase_never_entangled():
    data = preset_dict("paper-fig3")
    data["hbs"]["relative_phase"] = 0.0
    res = run_epr_spectrum(config.from_dict(data))
    assert res.summary["model_delta_epr"] >= 1
    assert res.summary["verdict"] == "not-certified"


def test_epr_spectrum_outputs():
    res = run_epr_spectrum(config.load_preset("paper-fig3"))
    assert res.summary["verdict"] == "entangled"
    for label in ("rbw100kHz", "rbw5MHz"):
        text = res.files[f"{label}_epr_subtracted.csv"]
        assert text.splitlines()[0] == "frequency_hz,var_x_minus,var_p_plus,delta_epr,entangled"
        assert f"{label}_epr_raw.csv" in res.files
    assert res.summary["rbw5MHz_subtracted_delta_epr_mean"] == pytest.approx(0.7431, abs=0.01)


def test_phasematch_longer_guide():
    data = preset_dict("phasematch-12mm")
    data["waveguide"]["length_m"] = 24e-3
    s = run_phasematch(config.from_dict(data)).summary
    s12 = run_phasematch(config.load_preset("phasematch-12mm")).summary
    assert s["fwhm_frequency_exact_thz"] == pytest.approx(
        s12["fwhm_frequency_exact_thz"] / math.sqrt(2), rel=0.03
    )


def test_validate_passes():
    res = run_validate(config.load_preset("paper-fig3"))
    assert res.passed
    assert res.summary["result"] == "PASS"
    assert res.summary["failed_quantities"] == "none"


def test_validate_catches_corrupted_mc_side():
    data = preset_dict("paper-fig3")
    data["mc"]["path_efficiency"] = [0.5, 0.5]
    res = run_validate(config.from_dict(data))
    assert not res.passed
    assert res.summary["result"] == "FAIL"
    assert "delta_epr" in res.summary["failed_quantities"]


def test_validate_requires_mc_flag():
    data = preset_dict("paper-fig3")
    data["flags"]["run_mc"] = False
    with pytest.raises(ConfigValidationError, match="run_mc"):
        run_validate(config.from_dict(data))


# ---------------------------------------------------------------- CLI


def run_cli(*argv):
    return cli.main(list(argv))


def test_cli_runs_each_subcommand(tmp_path, capsys):
    for cmd in ("squeeze-spectrum", "epr-spectrum", "phasematch", "validate"):
        out = tmp_path / cmd
        assert run_cli(cmd, "--out", str(out)) == 0
        assert (out / "summary.txt").exists()
    assert "result = PASS" in capsys.readouterr().out


def test_cli_same_seed_is_byte_identical(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run_cli("epr-spectrum", "--out", str(a), "--seed", "7") == 0
    assert run_cli("epr-spectrum", "--out", str(b), "--seed", "7") == 0
    assert run_cli("epr-spectrum", "--out", str(c), "--seed", "8") == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    assert (a / "rbw100kHz_trace_vacuum.csv").read_bytes() != (
        c / "rbw100kHz_trace_vacuum.csv"
    ).read_bytes()


def test_cli_validation_error_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('name = "bad"\n[mc]\nfrequencies_hz = []\n')
    out = tmp_path / "out"
    assert run_cli("validate", "--config", str(cfg), "--out", str(out)) == 2
    assert not out.exists()
    assert "frequency list is empty" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path):
    assert run_cli("epr-spectrum", "--config", str(tmp_path / "none.toml")) == 2


def test_cli_oracle_failure_exit_code(tmp_path):
    data = preset_dict("paper-fig3")
    data["mc"]["path_efficiency"] = [0.5, 0.5]
    path = tmp_path / "c.toml"
    path.write_text(config.dumps(config.from_dict(data)))
    assert run_cli("validate", "--config", str(path), "--out", str(tmp_path / "o")) == 3
    assert "FAIL" in (tmp_path / "o" / "summary.txt").read_text()


def test_cli_infer(capsys):
    assert run_cli("infer", "--measured-db", "-0.76", "--eta", "0.5") == 0
    assert "direct_squeezing_db = -1.6818" in capsys.readouterr().out
    assert run_cli("infer", "--measured-db", "-3.5", "--eta", "0.5") == 2


def test_cli_bad_seed():
    with pytest.raises(SystemExit) as info:
        run_cli("validate", "--seed", str(2**64))
    assert info.value.code == 2


def test_config_file_equals_preset(tmp_path):
    path = tmp_path / "fig3.toml"
    path.write_text(config.dumps(config.load_preset("paper-fig3")))
    assert config.load(path) == config.load_preset("paper-fig3")
    assert copy.deepcopy(config.load(path)) == config.load(path)
