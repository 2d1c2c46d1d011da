import json
import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fluxshape import (
    HarmonicPulse,
    capacitor_voltage,
    line_current,
    mischaracterized_transient_coefficient,
    solve_biharmonic,
)
from fluxshape import formats
from fluxshape.cli import main

from conftest import reference_device

TAU_PULSE_US = 8.0
OMEGA = 2.0 * math.pi / (TAU_PULSE_US * 1e-6)
TAU_ASSUMED_US = 8.79 * TAU_PULSE_US / (2.0 * math.pi)


@pytest.fixture(autouse=True)
def _isolated_seed_env(monkeypatch):
    monkeypatch.delenv("FLUXSHAPE_SEED", raising=False)


def write_device(tmp_path):
    path = tmp_path / "device.json"
    formats.dump_json(formats.device_to_dict(reference_device()), path)
    return str(path)


def write_single_sine(tmp_path):
    path = tmp_path / "single.json"
    formats.dump_json({"tau_pulse_s": TAU_PULSE_US * 1e-6, "a": [0.0], "b": [1.0]}, path)
    return str(path)


def write_line(tmp_path, tau_s, resistance=50.0):
    path = tmp_path / "line.json"
    formats.dump_json({"r_ohms": resistance, "c_farads": tau_s / resistance}, path)
    return str(path)


def test_design_biharmonic(tmp_path):
    out = tmp_path / "design"
    rc = main([
        "design", "--family", "biharmonic", "--b1", "1",
        "--tau-pulse-us", "8", "--tau-assumed-us", "11.2",
        "--out-dir", str(out),
    ])
    assert rc == 0
    pulse = formats.pulse_from_dict(formats.load_json(out / "pulse.json"))
    x = OMEGA * 11.2e-6
    assert_allclose(pulse.b[1], -0.5 * (1.0 + 4.0 * x * x) / (1.0 + x * x), rtol=1e-12)
    assert_allclose(pulse.b[1], -1.98083, rtol=1e-4)
    diag = formats.load_json(out / "diagnostics.json")
    assert set(diag) == {"k_exp_at_assumed", "cond1", "cond3"}
    assert abs(diag["k_exp_at_assumed"]) < 1e-14
    assert abs(diag["cond1"]) < 1e-14
    manifest = formats.load_json(out / "manifest.json")
    assert manifest["command"] == "design"
    assert manifest["outputs"] == ["pulse.json", "diagnostics.json"]


def test_design_from_request_file(tmp_path):
    request = tmp_path / "request.json"
    formats.dump_json(
        {"family": "biharmonic", "b1": 1.0, "tau_pulse_s": 8e-6, "tau_assumed_s": 0.1},
        request,
    )
    out = tmp_path / "design"
    assert main(["design", "--request", str(request), "--out-dir", str(out)]) == 0
    pulse = formats.pulse_from_dict(formats.load_json(out / "pulse.json"))
    # far above the crossover the second harmonic saturates at -2*b1
    assert_allclose(pulse.b[1], -2.0, rtol=1e-5)


def test_design_top_harmonic(tmp_path):
    out = tmp_path / "design"
    rc = main([
        "design", "--family", "top-harmonic", "--a0", "0", "--a", "0.3", "--b", "1.0",
        "--tau-pulse-us", "8", "--tau-assumed-us", f"{TAU_ASSUMED_US!r}",
        "--out-dir", str(out),
    ])
    assert rc == 0
    pulse = formats.pulse_from_dict(formats.load_json(out / "pulse.json"))
    assert pulse.a[-1] == -0.3
    assert abs(formats.load_json(out / "diagnostics.json")["k_exp_at_assumed"]) < 1e-14


def test_design_missing_b1_writes_nothing(tmp_path, capsys):
    out = tmp_path / "never"
    rc = main([
        "design", "--family", "biharmonic",
        "--tau-pulse-us", "8", "--tau-assumed-us", "11.2",
        "--out-dir", str(out),
    ])
    assert rc == 2
    assert "--b1" in capsys.readouterr().err
    assert not out.exists()


def test_kexp_designed_and_single_sine(tmp_path, capsys):
    out = tmp_path / "design"
    main([
        "design", "--family", "biharmonic", "--b1", "1",
        "--tau-pulse-us", "8", "--tau-assumed-us", f"{TAU_ASSUMED_US!r}",
        "--out-dir", str(out),
    ])
    capsys.readouterr()
    rc = main(["kexp", "--pulse", str(out / "pulse.json"), "--tau-us", f"{TAU_ASSUMED_US!r}"])
    assert rc == 0
    assert abs(float(capsys.readouterr().out.strip())) < 1e-14

    single = write_single_sine(tmp_path)
    kexp_out = tmp_path / "kexp"
    rc = main(["kexp", "--pulse", single, "--tau-us", f"{TAU_ASSUMED_US!r}", "--out-dir", str(kexp_out)])
    assert rc == 0
    printed = float(capsys.readouterr().out.strip())
    assert_allclose(printed, -0.11231203067562268, rtol=1e-12)
    report = formats.load_json(kexp_out / "kexp.json")
    assert report["k_exp"] == printed
    assert formats.load_json(kexp_out / "manifest.json")["command"] == "kexp"


def test_respond_matches_library(tmp_path):
    out = tmp_path / "design"
    main([
        "design", "--family", "biharmonic", "--b1", "1",
        "--tau-pulse-us", "8", "--tau-assumed-us", f"{TAU_ASSUMED_US!r}",
        "--out-dir", str(out),
    ])
    tau_s = TAU_ASSUMED_US * 1e-6
    line_path = write_line(tmp_path, tau_s)
    resp = tmp_path / "resp"
    rc = main([
        "respond", "--pulse", str(out / "pulse.json"), "--line", line_path,
        "--dt-us", "0.1", "--n-periods", "2", "--out-dir", str(resp),
    ])
    assert rc == 0
    t, v_in, v_c, i = formats.read_csv_columns(
        resp / "response.csv", ["t_s", "v_in_volts", "v_c_volts", "i_amps"]
    )
    pulse = formats.pulse_from_dict(formats.load_json(out / "pulse.json"))
    line = formats.rcline_from_dict(formats.load_json(line_path))
    t_ref, v_ref = pulse.sample(0.1e-6, 2)
    assert np.array_equal(t, t_ref)
    assert np.array_equal(v_in, v_ref)
    assert np.array_equal(v_c, capacitor_voltage(pulse, line, t_ref))
    assert np.array_equal(i, line_current(pulse, line, t_ref))


def test_sweep_default_grid(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--b1", "1", "--grid", "default", "--out-dir", str(out)]) == 0
    omega_tau, m, k = formats.read_csv_columns(out / "sweep.csv", ["omega_tau", "m", "k_exp"])
    assert omega_tau.size == 2500
    assert omega_tau[0] == 1.0 and m[0] == 0.01
    assert omega_tau[-1] == 30.0 and m[-1] == 100.0
    assert np.all(np.isfinite(k))


def test_sweep_explicit_axes(tmp_path):
    out = tmp_path / "sweep"
    rc = main([
        "sweep", "--b1", "1", "--omega-tau", "8.79", "--m", "0.01,1,100",
        "--out-dir", str(out),
    ])
    assert rc == 0
    omega_tau, m, k = formats.read_csv_columns(out / "sweep.csv", ["omega_tau", "m", "k_exp"])
    assert omega_tau.size == 3
    for mm, kk in zip(m, k):
        assert kk == mischaracterized_transient_coefficient(1.0, 1.0, 8.79, mm)
    assert abs(k[1]) < 1e-14
    assert abs(k[0]) > 10.0 * abs(k[2])


def test_sweep_flag_conflicts(tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--grid", "default", "--m", "1", "--out-dir", str(out)]) == 2
    assert "--grid" in capsys.readouterr().err
    assert main(["sweep", "--omega-tau", "8.79", "--out-dir", str(out)]) == 2
    assert "together" in capsys.readouterr().err


def test_ramsey_then_extract_recovers_tau(tmp_path, capsys):
    device = write_device(tmp_path)
    sim = tmp_path / "sim"
    rc = main([
        "ramsey-sim", "--device", device, "--waveform", "square",
        "--square-amp-phi0", "5e-4", "--line-tau-us", "13",
        "--tau-pulse-us", "8", "--delay-max-us", "60", "--delay-step-us", "0.25",
        "--out-dir", str(sim),
    ])
    assert rc == 0
    delays, x, y = formats.read_csv_columns(
        sim / "trace.csv", ["tau_delay_s", "x_expect", "y_expect"]
    )
    assert delays.size == 241 and delays[0] == 0.0

    ext = tmp_path / "ext"
    rc = main([
        "extract", "--trace", str(sim / "trace.csv"), "--device", device,
        "--tau-pulse-us", "8", "--fit-window-us", "60", "--out-dir", str(ext),
    ])
    assert rc == 0
    report = formats.load_json(ext / "report.json")
    assert report["converged"] is True
    assert_allclose(report["tau_s"], 13e-6, rtol=1e-4)
    out_lines = capsys.readouterr().out.strip().splitlines()
    assert out_lines[-1].startswith("tau_us=")
    assert_allclose(float(out_lines[-1].removeprefix("tau_us=")), 13.0, rtol=1e-4)
    assert (ext / "manifest.json").exists()


def test_extract_nonconvergence_exit_code(tmp_path, capsys):
    # an amplitude-zero pulse leaves a perfectly flat trace: the template
    # fit cannot converge, diagnostics are written, the manifest is not
    device = write_device(tmp_path)
    sim = tmp_path / "sim"
    main([
        "ramsey-sim", "--device", device, "--waveform", "square",
        "--square-amp-phi0", "0", "--line-tau-us", "13",
        "--tau-pulse-us", "8", "--delay-max-us", "30", "--delay-step-us", "0.5",
        "--out-dir", str(sim),
    ])
    ext = tmp_path / "ext"
    rc = main([
        "extract", "--trace", str(sim / "trace.csv"), "--device", device,
        "--tau-pulse-us", "8", "--fit-window-us", "30", "--out-dir", str(ext),
    ])
    assert rc == 3
    assert "converge" in capsys.readouterr().err
    report = formats.load_json(ext / "report.json")
    assert report["converged"] is False
    assert report["tau_s"] is None
    assert not (ext / "manifest.json").exists()


def test_extract_window_validation(tmp_path, capsys):
    device = write_device(tmp_path)
    sim = tmp_path / "sim"
    main([
        "ramsey-sim", "--device", device, "--waveform", "square",
        "--square-amp-phi0", "5e-4", "--line-tau-us", "13",
        "--tau-pulse-us", "8", "--delay-max-us", "60", "--delay-step-us", "0.25",
        "--out-dir", str(sim),
    ])
    rc = main([
        "extract", "--trace", str(sim / "trace.csv"), "--device", device,
        "--tau-pulse-us", "8", "--fit-window-us", "1", "--out-dir", str(tmp_path / "e"),
    ])
    assert rc == 2
    assert "--fit-window-us" in capsys.readouterr().err


def test_ramsey_pulse_waveform_and_period_check(tmp_path, capsys):
    device = write_device(tmp_path)
    design = tmp_path / "design"
    main([
        "design", "--family", "biharmonic", "--b1", "1",
        "--tau-pulse-us", "8", "--tau-assumed-us", f"{TAU_ASSUMED_US!r}",
        "--out-dir", str(design),
    ])
    line_path = write_line(tmp_path, TAU_ASSUMED_US * 1e-6)
    sim = tmp_path / "sim"
    rc = main([
        "ramsey-sim", "--device", device, "--waveform", "pulse",
        "--pulse", str(design / "pulse.json"), "--line", line_path,
        "--tau-pulse-us", "8", "--delay-max-us", "40", "--delay-step-us", "0.5",
        "--out-dir", str(sim),
    ])
    assert rc == 0
    assert (sim / "trace.csv").exists()
    rc = main([
        "ramsey-sim", "--device", device, "--waveform", "pulse",
        "--pulse", str(design / "pulse.json"), "--line", line_path,
        "--tau-pulse-us", "7", "--delay-max-us", "40", "--delay-step-us", "0.5",
        "--out-dir", str(tmp_path / "sim2"),
    ])
    assert rc == 2
    assert "period" in capsys.readouterr().err


def test_ramsey_missing_square_options(tmp_path, capsys):
    device = write_device(tmp_path)
    rc = main([
        "ramsey-sim", "--device", device, "--waveform", "square",
        "--square-amp-phi0", "5e-4",
        "--tau-pulse-us", "8", "--delay-max-us", "60", "--delay-step-us", "0.25",
        "--out-dir", str(tmp_path / "sim"),
    ])
    assert rc == 2
    assert "--line-tau-us" in capsys.readouterr().err


def _noisy_sim_args(device, out_dir, seed):
    return [
        "ramsey-sim", "--device", device, "--waveform", "square",
        "--square-amp-phi0", "5e-4", "--line-tau-us", "13",
        "--tau-pulse-us", "8", "--delay-max-us", "60", "--delay-step-us", "0.25",
        "--t2-us", "75", "--noise-sigma", "0.05", "--seed", str(seed),
        "--out-dir", str(out_dir),
    ]


def test_ramsey_sim_byte_determinism(tmp_path):
    device = write_device(tmp_path)
    for name, seed in (("a", 0), ("b", 0), ("c", 1)):
        assert main(_noisy_sim_args(device, tmp_path / name, seed)) == 0
    read = lambda name: (tmp_path / name / "trace.csv").read_bytes()
    assert read("a") == read("b")
    assert read("a") != read("c")


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    device = write_device(tmp_path)
    monkeypatch.setenv("FLUXSHAPE_SEED", "123")
    assert main(_noisy_sim_args(device, tmp_path / "env", 0)) == 0
    monkeypatch.delenv("FLUXSHAPE_SEED")
    assert main(_noisy_sim_args(device, tmp_path / "flag", 123)) == 0
    trace_env = (tmp_path / "env" / "trace.csv").read_bytes()
    trace_flag = (tmp_path / "flag" / "trace.csv").read_bytes()
    assert trace_env == trace_flag
    assert formats.load_json(tmp_path / "env" / "manifest.json")["rng_seed"] == 123


def test_impedance_default_chain_with_fit(tmp_path):
    out = tmp_path / "imp"
    assert main(["impedance", "--chain", "default", "--fit", "--out-dir", str(out)]) == 0
    fit = formats.load_json(out / "rc_fit.json")
    assert_allclose(fit["effective_r_ohms"], 50.0, rtol=1e-3)
    assert_allclose(fit["effective_c_farads"], 2.2e-7, rtol=1e-6)
    f, z_abs, z_re, z_im = formats.read_csv_columns(
        out / "impedance.csv", ["f_hz", "z_abs_ohms", "z_re", "z_im"]
    )
    assert f.size == 400
    assert_allclose(z_abs, np.hypot(z_re, z_im), rtol=1e-12)
    manifest = formats.load_json(out / "manifest.json")
    assert manifest["outputs"] == ["impedance.csv", "rc_fit.json"]


def test_impedance_custom_chain_and_validation(tmp_path, capsys):
    chain_path = tmp_path / "chain.json"
    formats.dump_json(
        [{"kind": "series_resistor", "r_ohms": 47.0}, {"kind": "series_capacitor", "c_farads": 3.3e-7}],
        chain_path,
    )
    out = tmp_path / "imp"
    rc = main([
        "impedance", "--chain", str(chain_path), "--fit",
        "--f-start-hz", "1e3", "--f-stop-hz", "1e6", "--n-points", "31",
        "--out-dir", str(out),
    ])
    assert rc == 0
    fit = formats.load_json(out / "rc_fit.json")
    assert_allclose(fit["effective_r_ohms"], 47.0, rtol=1e-9)
    assert main(["impedance", "--chain", "default", "--f-start-hz", "0",
                 "--out-dir", str(tmp_path / "bad")]) == 2
    assert "f-start" in capsys.readouterr().err


def test_unknown_arguments_exit_2(tmp_path, capsys):
    assert main(["sweep", "--definitely-not-a-flag", "1", "--out-dir", str(tmp_path)]) == 2
    capsys.readouterr()
