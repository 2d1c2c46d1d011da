"""Command-line interface.

Every subcommand validates its inputs, writes its outputs into ``--out-dir``
and finishes by writing ``manifest.json`` listing inputs, outputs and
parameters; the manifest is written last, so its presence marks a completed
run.  Exit codes: 0 success, 2 validation or I/O failure (nothing written
beyond what the message names), 3 numerical non-convergence (diagnostics
written, no manifest).

The environment variable ``FLUXSHAPE_SEED`` overrides ``--seed`` wherever a
seed is consumed, for deterministic pipelines driven from the outside.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

import fluxshape
from fluxshape import formats
from fluxshape.device import (
    RamseyConfig,
    pulse_flux_waveform,
    simulate_ramsey,
    square_transient_waveform,
)
from fluxshape.extraction import run_pipeline
from fluxshape.network import default_flux_chain, sweep_and_fit_rc, sweep_input_impedance
from fluxshape.pulse import HarmonicPulse
from fluxshape.rcline import RCLine, capacitor_voltage, line_current, transient_coefficient
from fluxshape.robustness import default_sweep_axes, sweep_transient_coefficient
from fluxshape.synthesis import solve_biharmonic, solve_top_harmonic

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3


def _float_list(text: str):
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _resolve_seed(args_seed: int) -> int:
    env = os.environ.get("FLUXSHAPE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"FLUXSHAPE_SEED must be an integer, got {env!r}") from exc
    return int(args_seed)


def _require(value, flag: str):
    if value is None:
        raise ValueError(f"missing required option {flag}")
    return value


def _out_dir(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _write_manifest(out_dir, command, inputs, outputs, parameters, rng_seed=None) -> None:
    manifest = {
        "command": command,
        "tool_version": fluxshape.__version__,
        "inputs": list(inputs),
        "outputs": list(outputs),
        "parameters": parameters,
        "rng_seed": rng_seed,
    }
    formats.dump_json(manifest, os.path.join(out_dir, "manifest.json"))


def _cmd_design(args) -> int:
    request = formats.load_json(args.request) if args.request else {}
    if not isinstance(request, dict):
        raise ValueError("--request file must contain a JSON object")

    family = args.family or request.get("family")
    family = _require(family, "--family")
    tau_pulse_s = args.tau_pulse_us * 1e-6 if args.tau_pulse_us is not None else request.get("tau_pulse_s")
    tau_pulse_s = float(_require(tau_pulse_s, "--tau-pulse-us"))
    tau_assumed_s = (
        args.tau_assumed_us * 1e-6 if args.tau_assumed_us is not None else request.get("tau_assumed_s")
    )
    tau_assumed_s = float(_require(tau_assumed_s, "--tau-assumed-us"))
    omega = 2.0 * math.pi / tau_pulse_s

    if family == "biharmonic":
        b1 = args.b1 if args.b1 is not None else request.get("b1")
        b1 = float(_require(b1, "--b1"))
        pulse = solve_biharmonic(b1, omega, tau_assumed_s)
    elif family == "top-harmonic":
        a0 = args.a0 if args.a0 is not None else request.get("a0", 0.0)
        a_low = args.a if args.a is not None else request.get("a")
        b_low = args.b if args.b is not None else request.get("b")
        a_low = _require(a_low, "--a")
        b_low = _require(b_low, "--b")
        pulse, _ = solve_top_harmonic(float(a0), a_low, b_low, omega, tau_assumed_s)
    else:
        raise ValueError(f"--family must be 'biharmonic' or 'top-harmonic', got {family!r}")

    out_dir = _out_dir(args)
    formats.dump_json(formats.pulse_to_dict(pulse), os.path.join(out_dir, "pulse.json"))
    diagnostics = {
        "k_exp_at_assumed": transient_coefficient(pulse, tau_assumed_s),
        "cond1": pulse.condition_one_residual(),
        "cond3": pulse.condition_three_residual(tau_assumed_s),
    }
    formats.dump_json(diagnostics, os.path.join(out_dir, "diagnostics.json"))
    _write_manifest(
        out_dir,
        "design",
        [args.request] if args.request else [],
        ["pulse.json", "diagnostics.json"],
        {"family": family, "tau_pulse_s": tau_pulse_s, "tau_assumed_s": tau_assumed_s},
    )
    return EXIT_OK


def _cmd_respond(args) -> int:
    pulse = formats.pulse_from_dict(formats.load_json(args.pulse))
    line = formats.rcline_from_dict(formats.load_json(args.line))
    dt = args.dt_us * 1e-6
    t, v_in = pulse.sample(dt, args.n_periods)
    v_c = capacitor_voltage(pulse, line, t)
    i = line_current(pulse, line, t)
    out_dir = _out_dir(args)
    formats.write_csv(
        os.path.join(out_dir, "response.csv"),
        ["t_s", "v_in_volts", "v_c_volts", "i_amps"],
        [t, v_in, v_c, i],
    )
    _write_manifest(
        out_dir,
        "respond",
        [args.pulse, args.line],
        ["response.csv"],
        {"dt_s": dt, "n_periods": args.n_periods},
    )
    return EXIT_OK


def _cmd_kexp(args) -> int:
    pulse = formats.pulse_from_dict(formats.load_json(args.pulse))
    tau = args.tau_us * 1e-6
    value = transient_coefficient(pulse, tau)
    print(formats.format_float(value))
    if args.out_dir is not None:
        out_dir = _out_dir(args)
        formats.dump_json({"k_exp": value, "tau_s": tau}, os.path.join(out_dir, "kexp.json"))
        _write_manifest(out_dir, "kexp", [args.pulse], ["kexp.json"], {"tau_s": tau})
    return EXIT_OK


def _cmd_sweep(args) -> int:
    explicit = args.omega_tau is not None or args.m is not None
    if args.grid is not None and explicit:
        raise ValueError("--grid cannot be combined with --omega-tau/--m")
    if (args.omega_tau is None) != (args.m is None):
        raise ValueError("--omega-tau and --m must be given together (or use --grid default)")
    if explicit:
        omega_tau, m = np.asarray(args.omega_tau), np.asarray(args.m)
    else:
        omega_tau, m = default_sweep_axes()
    grid = sweep_transient_coefficient(args.b1, omega_tau, m)
    rows = list(grid.rows())
    out_dir = _out_dir(args)
    formats.write_csv(
        os.path.join(out_dir, "sweep.csv"),
        ["omega_tau", "m", "k_exp"],
        [np.array([r[j] for r in rows]) for j in range(3)],
    )
    _write_manifest(
        out_dir,
        "sweep",
        [],
        ["sweep.csv"],
        {"b1": args.b1, "n_omega_tau": int(grid.omega_tau.size), "n_m": int(grid.m.size)},
    )
    return EXIT_OK


def _cmd_ramsey_sim(args) -> int:
    device = formats.device_from_dict(formats.load_json(args.device))
    tau_pulse = args.tau_pulse_us * 1e-6
    inputs = [args.device]

    if args.waveform == "square":
        amp = _require(args.square_amp_phi0, "--square-amp-phi0")
        line_tau = _require(args.line_tau_us, "--line-tau-us") * 1e-6
        waveform = square_transient_waveform(amp, tau_pulse, line_tau, device.phi_idle)
    elif args.waveform == "pulse":
        pulse_path = _require(args.pulse, "--pulse")
        line_path = _require(args.line, "--line")
        pulse = formats.pulse_from_dict(formats.load_json(pulse_path))
        line = formats.rcline_from_dict(formats.load_json(line_path))
        if abs(pulse.tau_pulse - tau_pulse) > 1e-12 * tau_pulse:
            raise ValueError(
                f"--tau-pulse-us disagrees with the pulse file period {pulse.tau_pulse!r} s"
            )
        waveform = pulse_flux_waveform(pulse, line, device)
        inputs.extend([pulse_path, line_path])
    else:
        raise ValueError(f"--waveform must be 'square' or 'pulse', got {args.waveform!r}")

    if args.delay_step_us <= 0 or args.delay_max_us < args.delay_step_us:
        raise ValueError("--delay-step-us must be positive and no larger than --delay-max-us")
    n = int(round(args.delay_max_us / args.delay_step_us)) + 1
    delays = np.arange(n) * (args.delay_step_us * 1e-6)
    seed = _resolve_seed(args.seed)
    config = RamseyConfig(
        tau_pulse=tau_pulse,
        delay_grid=delays,
        t2=args.t2_us * 1e-6 if args.t2_us is not None else None,
        readout_noise_sigma=args.noise_sigma,
        rng_seed=seed,
    )
    x, y = simulate_ramsey(device, waveform, config)
    out_dir = _out_dir(args)
    formats.write_csv(
        os.path.join(out_dir, "trace.csv"),
        ["tau_delay_s", "x_expect", "y_expect"],
        [delays, x, y],
    )
    _write_manifest(
        out_dir,
        "ramsey-sim",
        inputs,
        ["trace.csv"],
        {
            "waveform": args.waveform,
            "tau_pulse_s": tau_pulse,
            "delay_max_s": args.delay_max_us * 1e-6,
            "delay_step_s": args.delay_step_us * 1e-6,
            "t2_s": args.t2_us * 1e-6 if args.t2_us is not None else None,
            "noise_sigma": args.noise_sigma,
        },
        rng_seed=seed,
    )
    return EXIT_OK


def _cmd_extract(args) -> int:
    device = formats.device_from_dict(formats.load_json(args.device))
    delays, x, y = formats.read_csv_columns(args.trace, ["tau_delay_s", "x_expect", "y_expect"])
    steps = np.diff(delays)
    if delays.size < 3 or np.any(steps <= 0.0):
        raise ValueError("trace delays must be strictly increasing with at least three points")
    dt = float(steps[0])
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValueError("trace delay grid must be uniform")
    if abs(delays[0]) > 1e-9 * delays[-1]:
        raise ValueError("trace delay grid must start at zero delay")

    window_s = args.fit_window_us * 1e-6
    keep = delays <= window_s * (1.0 + 1e-12)
    if np.count_nonzero(keep) < max(8, args.sg_window):
        raise ValueError(
            f"--fit-window-us keeps only {int(np.count_nonzero(keep))} samples; "
            f"need at least {max(8, args.sg_window)}"
        )
    tau_pulse = args.tau_pulse_us * 1e-6
    result = run_pipeline(
        x[keep],
        y[keep],
        dt,
        device,
        device.phi_idle,
        tau_pulse,
        window_points=args.sg_window,
        poly_order=args.sg_order,
    )
    fit = result.fit
    report = {
        "tau_s": fit.tau if math.isfinite(fit.tau) else None,
        "A": fit.amplitude,
        "B": fit.offset,
        "acquired_phase_rad": result.acquired_phase,
        "residual_rms": fit.residual_rms,
        "converged": fit.converged,
    }
    out_dir = _out_dir(args)
    formats.dump_json(report, os.path.join(out_dir, "report.json"))
    if not fit.converged:
        print("error: transient fit did not converge; report.json holds diagnostics", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    _write_manifest(
        out_dir,
        "extract",
        [args.trace, args.device],
        ["report.json"],
        {
            "tau_pulse_s": tau_pulse,
            "fit_window_s": window_s,
            "sg_window": args.sg_window,
            "sg_order": args.sg_order,
        },
    )
    print(f"tau_us={formats.format_float(fit.tau * 1e6)}")
    return EXIT_OK


def _cmd_impedance(args) -> int:
    if args.chain == "default":
        elements = default_flux_chain()
        inputs = []
    else:
        elements = formats.chain_from_list(formats.load_json(args.chain))
        inputs = [args.chain]
    if not (args.f_start_hz > 0 and args.f_stop_hz > args.f_start_hz):
        raise ValueError("need 0 < --f-start-hz < --f-stop-hz")
    if args.n_points < 2:
        raise ValueError("--n-points must be at least 2")
    f = np.geomspace(args.f_start_hz, args.f_stop_hz, args.n_points)
    load = complex(args.load_ohms)

    out_dir = _out_dir(args)
    outputs = ["impedance.csv"]
    if args.fit:
        fit = sweep_and_fit_rc(elements, load, f, fit_band_hz=args.fit_band_hz)
        z = fit.z_in
        formats.dump_json(
            {
                "effective_r_ohms": fit.effective_r,
                "effective_c_farads": fit.effective_c,
                "fit_rms_ohms": fit.fit_rms,
                "fit_band_hz": args.fit_band_hz,
            },
            os.path.join(out_dir, "rc_fit.json"),
        )
        outputs.append("rc_fit.json")
    else:
        z = sweep_input_impedance(elements, load, f)
    formats.write_csv(
        os.path.join(out_dir, "impedance.csv"),
        ["f_hz", "z_abs_ohms", "z_re", "z_im"],
        [f, np.abs(z), z.real, z.imag],
    )
    _write_manifest(
        out_dir,
        "impedance",
        inputs,
        outputs,
        {
            "f_start_hz": args.f_start_hz,
            "f_stop_hz": args.f_stop_hz,
            "n_points": args.n_points,
            "load_ohms": args.load_ohms,
            "fit": bool(args.fit),
        },
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxshape",
        description="Design transient-immune flux pulses and verify them against simulated experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="synthesize a transient-immune pulse")
    p.add_argument("--family", choices=["biharmonic", "top-harmonic"])
    p.add_argument("--b1", type=float, help="fundamental sine amplitude in volts (biharmonic)")
    p.add_argument("--a0", type=float, help="DC coefficient in volts (top-harmonic)")
    p.add_argument("--a", type=_float_list, help="lower cosine coefficients, comma-separated (top-harmonic)")
    p.add_argument("--b", type=_float_list, help="lower sine coefficients, comma-separated (top-harmonic)")
    p.add_argument("--tau-pulse-us", type=float, help="pulse period in microseconds")
    p.add_argument("--tau-assumed-us", type=float, help="assumed line time constant in microseconds")
    p.add_argument("--request", help="JSON file with the same fields in SI units; flags take precedence")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_design)

    p = sub.add_parser("respond", help="closed-form line response of a pulse")
    p.add_argument("--pulse", required=True, help="pulse JSON file")
    p.add_argument("--line", required=True, help="RC line JSON file")
    p.add_argument("--dt-us", type=float, required=True)
    p.add_argument("--n-periods", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_respond)

    p = sub.add_parser("kexp", help="transient coefficient of a pulse on a given line")
    p.add_argument("--pulse", required=True, help="pulse JSON file")
    p.add_argument("--tau-us", type=float, required=True)
    p.add_argument("--out-dir")
    p.set_defaults(handler=_cmd_kexp)

    p = sub.add_parser("sweep", help="mischaracterization sweep of the two-harmonic design")
    p.add_argument("--b1", type=float, default=1.0)
    p.add_argument("--grid", choices=["default"],
                   help="built-in 50x50 log grid: omega*tau in [1, 30], m in [0.01, 100]")
    p.add_argument("--omega-tau", type=_float_list, help="explicit omega*tau values, comma-separated")
    p.add_argument("--m", type=_float_list, help="explicit mischaracterization factors, comma-separated")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("ramsey-sim", help="simulate the Ramsey transient-detection experiment")
    p.add_argument("--device", required=True, help="device JSON file")
    p.add_argument("--waveform", choices=["square", "pulse"], required=True)
    p.add_argument("--square-amp-phi0", type=float, help="commanded square amplitude in Phi0 (square)")
    p.add_argument("--line-tau-us", type=float, help="line time constant in microseconds (square)")
    p.add_argument("--pulse", help="pulse JSON file (pulse)")
    p.add_argument("--line", help="RC line JSON file (pulse)")
    p.add_argument("--tau-pulse-us", type=float, required=True)
    p.add_argument("--delay-max-us", type=float, required=True)
    p.add_argument("--delay-step-us", type=float, required=True)
    p.add_argument("--t2-us", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_ramsey_sim)

    p = sub.add_parser("extract", help="recover the line time constant from a Ramsey trace")
    p.add_argument("--trace", required=True, help="trace CSV from ramsey-sim")
    p.add_argument("--device", required=True, help="device JSON file")
    p.add_argument("--tau-pulse-us", type=float, required=True)
    p.add_argument("--fit-window-us", type=float, required=True,
                   help="analysis window; must be chosen explicitly")
    p.add_argument("--sg-window", type=int, default=11, help="smoothing window, odd number of points")
    p.add_argument("--sg-order", type=int, default=3)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_extract)

    p = sub.add_parser("impedance", help="input impedance of a wiring chain")
    p.add_argument("--chain", required=True, help="chain JSON file, or 'default'")
    p.add_argument("--f-start-hz", type=float, default=1e3)
    p.add_argument("--f-stop-hz", type=float, default=1e8)
    p.add_argument("--n-points", type=int, default=400)
    p.add_argument("--load-ohms", type=float, default=0.0)
    p.add_argument("--fit", action="store_true", help="also fit an effective series RC")
    p.add_argument("--fit-band-hz", type=float, default=1e6)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_impedance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
