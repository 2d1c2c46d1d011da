"""On-disk interchange formats: JSON schemas and CSV layouts.

All file formats used by the command-line interface live here so the
schemas stay in one auditable place.  JSON keys carry explicit units
(``tau_pulse_s``, ``omega_q_ghz``); in-memory objects are always SI
(seconds, ohms, farads, rad/s, Phi0).

CSV files are comma-separated with a single header row; floats are written
with ``repr``-level precision (17 significant digits) so outputs are
bit-stable across runs with the same inputs.
"""

from __future__ import annotations

import json

import numpy as np

from fluxshape.device import CouplerDevice
from fluxshape.network import WiringElement
from fluxshape.pulse import HarmonicPulse
from fluxshape.rcline import RCLine

__all__ = [
    "pulse_to_dict",
    "pulse_from_dict",
    "rcline_to_dict",
    "rcline_from_dict",
    "device_to_dict",
    "device_from_dict",
    "chain_to_list",
    "chain_from_list",
    "load_json",
    "dump_json",
    "write_csv",
    "read_csv_columns",
    "format_float",
]

_GHZ = 2.0 * np.pi * 1e9
_MHZ = 2.0 * np.pi * 1e6


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def pulse_to_dict(pulse: HarmonicPulse) -> dict:
    return {
        "tau_pulse_s": pulse.tau_pulse,
        "a0": pulse.a0,
        "a": list(pulse.a),
        "b": list(pulse.b),
    }


def pulse_from_dict(data: dict) -> HarmonicPulse:
    try:
        return HarmonicPulse(
            tau_pulse=data["tau_pulse_s"],
            a0=data.get("a0", 0.0),
            a=tuple(data.get("a", ())),
            b=tuple(data.get("b", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pulse record: {exc}") from exc


def rcline_to_dict(line: RCLine) -> dict:
    return {"r_ohms": line.resistance, "c_farads": line.capacitance}


def rcline_from_dict(data: dict) -> RCLine:
    try:
        return RCLine(resistance=data["r_ohms"], capacitance=data["c_farads"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed line record: {exc}") from exc


def device_to_dict(device: CouplerDevice) -> dict:
    return {
        "omega_q_ghz": device.omega_q / _GHZ,
        "omega_max_ghz": device.omega_max / _GHZ,
        "g_mhz": device.g / _MHZ,
        "flux_per_volt_phi0": device.flux_per_volt,
        "phi_idle_phi0": device.phi_idle,
    }


def device_from_dict(data: dict) -> CouplerDevice:
    try:
        return CouplerDevice(
            omega_q=float(data["omega_q_ghz"]) * _GHZ,
            omega_max=float(data["omega_max_ghz"]) * _GHZ,
            g=float(data["g_mhz"]) * _MHZ,
            flux_per_volt=float(data["flux_per_volt_phi0"]),
            phi_idle=float(data["phi_idle_phi0"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed device record: {exc}") from exc


def chain_to_list(elements) -> list:
    return [{"kind": e.kind, **e.params} for e in elements]


def chain_from_list(data) -> list:
    if not isinstance(data, list) or not data:
        raise ValueError("chain must be a non-empty JSON list of elements")
    elements = []
    for entry in data:
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ValueError(f"malformed chain element: {entry!r}")
        params = {k: v for k, v in entry.items() if k != "kind"}
        elements.append(WiringElement(entry["kind"], params))
    return elements


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(data, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, columns) -> None:
    """Write equal-length columns under a comma-separated header line."""
    columns = [np.asarray(col) for col in columns]
    n = columns[0].shape[0]
    if any(col.shape != (n,) for col in columns):
        raise ValueError("all columns must be 1-D with equal length")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(format_float(col[i]) for col in columns) + "\n")


def read_csv_columns(path, expected_header) -> list:
    """Read a CSV written by :func:`write_csv`, checking the header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        expected = ",".join(expected_header)
        if header != expected:
            raise ValueError(f"unexpected CSV header {header!r}, want {expected!r}")
        rows = [line.strip() for line in fh if line.strip()]
    if not rows:
        raise ValueError("CSV contains no data rows")
    data = np.array([[float(cell) for cell in row.split(",")] for row in rows])
    if data.shape[1] != len(expected_header):
        raise ValueError("CSV row width does not match the header")
    return [data[:, j] for j in range(data.shape[1])]
