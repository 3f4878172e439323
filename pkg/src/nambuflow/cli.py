"""Configuration-driven command line front end.

Reads a JSON scenario (schema-validated, unknown keys rejected), runs one of
the batch computations, and writes CSV/JSON artifacts into the output
directory.  Outputs are deterministic: a given config plus tolerance
settings yields bit-identical files, and a manifest records the config hash
together with library versions and invariant summaries.

Exit codes: 0 success, 2 config/schema violation, 3 numerical failure (a
diagnostic ``error.json`` is left in the output directory).

Environment overrides (flags take precedence): NAMBUFLOW_THREADS,
NAMBUFLOW_TOL, NAMBUFLOW_OUT, and NAMBUFLOW_NUMBA for the kernel backend.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import multiprocessing
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .dynamics import (QuadraticModel, Reservoir, decoherence_rates,
                       evolve_chi, noise_matrix, non_markovianity,
                       point_contact)
from .errors import NumericalError
from .models import charge_matrix, initial_chi, tight_binding_chain, xy_chain
from .nambu import build_hamiltonian, validate_correlation
from .observables import (boundary_current, classify_decay,
                          correlation_profile, energy_current_xy,
                          quadratic_expectation)
from .oracle import DiscretizedBath, bath_benchmark
from .steadystate import noise_matrix_infinity, steady_chi

SCHEMA_VERSION = 1
DEFAULT_SCAN_CAP = 4096


class ConfigError(Exception):
    """Invalid scenario configuration; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Schema

_TEMPERATURE = {"oneOf": [{"type": "number", "minimum": 0},
                          {"const": "inf"}]}

_LEAD = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "rate": {"type": "number", "minimum": 0},
        "temperature": _TEMPERATURE,
        "mu": {"type": "number"},
    },
    "required": ["rate", "temperature"],
}

_CONTACT = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "site": {"type": "integer", "minimum": 0},
        "rate": {"type": "number", "minimum": 0},
        "temperature": _TEMPERATURE,
        "mu": {"type": "number"},
        "label": {"type": "string"},
    },
    "required": ["site", "rate", "temperature"],
}

_REAL_MATRIX = {"type": "array",
                "items": {"type": "array", "items": {"type": "number"}}}

_MODEL = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["tight_binding", "xy", "generic"]},
        "m_sites": {"type": "integer", "minimum": 2},
        "hopping": {"type": "number"},
        "j_c": {"type": "number"},
        "gamma_c": {"type": "number"},
        "h_c": {"type": "number"},
        "delta_h": {"type": "number"},
        "leads": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"left": _LEAD, "right": _LEAD},
            "required": ["left", "right"],
        },
        "hamiltonian": _REAL_MATRIX,
        "pairing": _REAL_MATRIX,
        "contacts": {"type": "array", "items": _CONTACT},
    },
    "required": ["kind"],
}

_AXIS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "values": {"type": "array", "minItems": 1,
                   "items": {"type": "number"}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["linear", "log"]},
                "min": {"type": "number"},
                "max": {"type": "number"},
                "num": {"type": "integer", "minimum": 1},
            },
            "required": ["kind", "min", "max", "num"],
        },
        "targets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"path": {"type": "string"},
                               "scale": {"type": "number"}},
                "required": ["path"],
            },
        },
    },
    "required": ["name", "targets"],
}

_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "run": {"enum": ["evolve", "rates", "steady", "scan", "oracle"]},
        "model": _MODEL,
        "initial_state": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["vacuum", "filled", "infinite_T",
                                  "thermal"]},
                "temperature": _TEMPERATURE,
                "mu": {"type": "number"},
            },
            "required": ["kind"],
        },
        "time_grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["linear", "log"]},
                "t_min": {"type": "number", "exclusiveMinimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "num": {"type": "integer", "minimum": 2},
            },
            "required": ["kind", "t_max", "num"],
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rtol": {"type": "number", "exclusiveMinimum": 0},
                "atol": {"type": "number", "exclusiveMinimum": 0},
                "rate_threshold": {"type": "number", "minimum": 0},
                "defect_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x": _AXIS,
                "y": _AXIS,
                "max_points": {"type": "integer", "minimum": 1},
            },
            "required": ["x"],
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "l_modes": {"type": "integer", "minimum": 1},
                "bandwidth": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["l_modes", "bandwidth"],
        },
    },
    "required": ["schema_version", "model"],
}


def validate_config(cfg) -> None:
    import jsonschema

    validator = jsonschema.Draft202012Validator(_SCHEMA)
    errors = sorted(validator.iter_errors(cfg),
                    key=lambda e: (list(map(str, e.absolute_path)),
                                   e.message))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"at {where}: {err.message}")


# ---------------------------------------------------------------------------
# Config -> objects


def _to_beta(temperature) -> float:
    if temperature == "inf":
        return 0.0
    t = float(temperature)
    if t == 0.0:
        return np.inf
    return 1.0 / t


def _require(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"{context} requires {key!r}")
    return section[key]


def build_model(mcfg: dict) -> QuadraticModel:
    kind = mcfg["kind"]
    if kind == "tight_binding":
        leads = _require(mcfg, "leads", "tight_binding model")
        left, right = leads["left"], leads["right"]
        return tight_binding_chain(
            _require(mcfg, "m_sites", "tight_binding model"),
            rate_left=left["rate"], rate_right=right["rate"],
            beta_left=_to_beta(left["temperature"]),
            mu_left=_require(left, "mu", "tight_binding left lead"),
            beta_right=_to_beta(right["temperature"]),
            mu_right=_require(right, "mu", "tight_binding right lead"),
            hopping=mcfg.get("hopping", 1.0))
    if kind == "xy":
        leads = _require(mcfg, "leads", "xy model")
        left, right = leads["left"], leads["right"]
        for side, lead in (("left", left), ("right", right)):
            if "mu" in lead:
                raise ConfigError(
                    f"xy {side} lead: 'mu' is fixed by delta_h, remove it")
        return xy_chain(
            _require(mcfg, "m_sites", "xy model"),
            gamma_c=_require(mcfg, "gamma_c", "xy model"),
            h_c=_require(mcfg, "h_c", "xy model"),
            delta_h=_require(mcfg, "delta_h", "xy model"),
            rate_left=left["rate"], rate_right=right["rate"],
            beta_left=_to_beta(left["temperature"]),
            beta_right=_to_beta(right["temperature"]),
            j_c=mcfg.get("j_c", 1.0))
    # generic: explicit real blocks plus point contacts
    h = np.array(_require(mcfg, "hamiltonian", "generic model"), dtype=float)
    delta = mcfg.get("pairing")
    ham = build_hamiltonian(h, None if delta is None
                            else np.array(delta, dtype=float))
    n = h.shape[0]
    reservoirs = []
    for i, c in enumerate(mcfg.get("contacts", [])):
        reservoirs.append(point_contact(
            n, c["site"], c["rate"], beta=_to_beta(c["temperature"]),
            mu=c.get("mu", 0.0), label=c.get("label", f"contact{i}")))
    return QuadraticModel(ham, reservoirs,
                          params={"kind": "generic", "m_sites": n})


def build_initial_chi(cfg: dict, model: QuadraticModel) -> np.ndarray:
    scfg = cfg.get("initial_state")
    if scfg is None:
        raise ConfigError("this run kind requires an 'initial_state' section")
    kind = scfg["kind"]
    beta = _to_beta(scfg["temperature"]) if "temperature" in scfg else None
    if kind == "thermal" and beta is None:
        raise ConfigError("thermal initial state requires 'temperature'")
    return initial_chi(kind, model.n, hamiltonian=model.hamiltonian,
                       beta=beta, mu=scfg.get("mu", 0.0))


def build_time_grid(cfg: dict) -> np.ndarray:
    gcfg = cfg.get("time_grid")
    if gcfg is None:
        raise ConfigError("this run kind requires a 'time_grid' section")
    if gcfg["kind"] == "linear":
        if "t_min" in gcfg:
            raise ConfigError("linear time_grid always starts at t = 0; "
                              "drop 't_min' or use a log grid")
        return np.linspace(0.0, gcfg["t_max"], gcfg["num"])
    t_min = gcfg.get("t_min")
    if t_min is None:
        raise ConfigError("log time_grid requires 't_min'")
    if t_min >= gcfg["t_max"]:
        raise ConfigError("time_grid needs t_min < t_max")
    return np.geomspace(t_min, gcfg["t_max"], gcfg["num"])


def _tolerances(cfg: dict, tol_override: float | None) -> dict:
    tol = dict(cfg.get("tolerances", {}))
    if tol_override is not None:
        tol["rtol"] = tol_override
        tol.setdefault("atol", tol_override * 1e-2)
    tol.setdefault("rtol", 1e-8)
    tol.setdefault("atol", 1e-10)
    tol.setdefault("rate_threshold", 1e-10)
    tol.setdefault("defect_tol", 1e-6)
    return tol


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def write_matrix(path: Path, mat: np.ndarray) -> None:
    """Row-major (row, col, re, im) dump with header."""
    mat = np.asarray(mat)
    rows = []
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            z = complex(mat[i, j])
            rows.append([i, j, _fmt(z.real), _fmt(z.imag)])
    _write_csv(path, ["row", "col", "re", "im"], rows)


def _rate_rows(model: QuadraticModel, times, threshold: float):
    rows = []
    for t in times:
        rates, _ = decoherence_rates(noise_matrix(model, t),
                                     zero_threshold=threshold)
        rows.append([_fmt(t)] + [_fmt(g) for g in rates]
                    + [_fmt(non_markovianity(rates))])
    return rows


def _rates_header(n: int) -> list[str]:
    return ["t"] + [f"gamma_{k + 1}" for k in range(2 * n)] + ["f_nM"]


def _invariant_summary(chi: np.ndarray) -> dict:
    checks = validate_correlation(chi, atol=np.inf)
    return {k: float(v) for k, v in sorted(checks.items())}


def _steady_current(model: QuadraticModel, chi: np.ndarray):
    """Mid-chain steady current: energy flow for xy, particle flow else."""
    kind = model.params.get("kind")
    m = model.params.get("m_sites", model.n)
    if kind == "xy_chain":
        obs = energy_current_xy(model, m // 2)
    else:
        obs = boundary_current(model, range(m // 2, m),
                               charge_matrix(model.n), side="left")
    return quadratic_expectation(chi, obs)


def _decay_kind(chi: np.ndarray) -> str:
    try:
        r, cbar = correlation_profile(chi)
        return classify_decay(r, cbar).kind
    except ValueError:  # chain too short for a profile, or too few points
        return ""


# ---------------------------------------------------------------------------
# Run kinds


def run_rates(cfg, out: Path, tol) -> dict:
    model = build_model(cfg["model"])
    times = build_time_grid(cfg)
    rows = _rate_rows(model, times, tol["rate_threshold"])
    _write_csv(out / "rates.csv", _rates_header(model.n), rows)
    return {"outputs": ["rates.csv"],
            "summary": {"n_times": len(times),
                        "final_f_nM": float(rows[-1][-1])}}


def run_evolve(cfg, out: Path, tol) -> dict:
    model = build_model(cfg["model"])
    chi0 = build_initial_chi(cfg, model)
    times = build_time_grid(cfg)
    if times[0] > 0.0:
        times = np.concatenate([[0.0], times])
    result = evolve_chi(model, chi0, times, rtol=tol["rtol"],
                        atol=tol["atol"], defect_tol=tol["defect_tol"])
    _write_csv(out / "rates.csv", _rates_header(model.n),
               _rate_rows(model, times[times > 0], tol["rate_threshold"]))
    _write_csv(out / "defects.csv", ["t", "max_abs_defect"],
               [[_fmt(t), _fmt(d)] for t, d in
                zip(result.times, result.defects)])
    final = result.final()
    write_matrix(out / "chi_final.csv", final)
    return {"outputs": ["rates.csv", "defects.csv", "chi_final.csv"],
            "summary": {"t_final": float(times[-1]),
                        "nfev": int(result.nfev),
                        "max_defect": float(result.defects.max())},
            "invariants": _invariant_summary(final)}


def run_steady(cfg, out: Path, tol) -> dict:
    model = build_model(cfg["model"])
    result = steady_chi(model)
    write_matrix(out / "chi_steady.csv", result.chi)
    try:
        r, cbar = correlation_profile(result.chi)
    except ValueError:  # two-site chain has no separation to average over
        r, cbar = [], []
    _write_csv(out / "correlations.csv", ["r", "C_bar_r"],
               [[_fmt(a), _fmt(b)] for a, b in zip(r, cbar)])
    rates, _ = decoherence_rates(result.noise,
                                 zero_threshold=tol["rate_threshold"])
    summary = {
        "f_nM": float(non_markovianity(rates)),
        "current": float(_steady_current(model, result.chi)),
        "decay_kind": _decay_kind(result.chi),
        "residual": float(result.residual),
        "min_gap": float(result.min_gap),
    }
    return {"outputs": ["chi_steady.csv", "correlations.csv"],
            "summary": summary,
            "invariants": _invariant_summary(result.chi)}


def run_oracle(cfg, out: Path, tol) -> dict:
    model = build_model(cfg["model"])
    ocfg = cfg.get("oracle")
    if ocfg is None:
        raise ConfigError("oracle run requires an 'oracle' section")
    chi0 = build_initial_chi(cfg, model)
    times = build_time_grid(cfg)
    if times[0] > 0.0:
        times = np.concatenate([[0.0], times])
    result = evolve_chi(model, chi0, times, rtol=tol["rtol"],
                        atol=tol["atol"], defect_tol=tol["defect_tol"])
    bath = DiscretizedBath(ocfg["l_modes"], ocfg["bandwidth"])
    bench = bath_benchmark(model, chi0, bath, times)
    dev = np.abs(result.chi - bench.chi_sys).max(axis=(1, 2))
    _write_csv(out / "deviation.csv", ["t", "max_abs_deviation"],
               [[_fmt(t), _fmt(d)] for t, d in zip(times, dev)])
    return {"outputs": ["deviation.csv"],
            "summary": {"max_deviation": float(dev.max()),
                        "l_modes": ocfg["l_modes"],
                        "bandwidth": float(ocfg["bandwidth"]),
                        "recurrence_time": float(bath.recurrence_time)}}


# --- scan ------------------------------------------------------------------


def _axis_values(axis: dict) -> np.ndarray:
    if "values" in axis:
        return np.asarray(axis["values"], dtype=float)
    grid = axis.get("grid")
    if grid is None:
        raise ConfigError(
            f"axis {axis['name']!r} needs either 'values' or 'grid'")
    if grid["kind"] == "linear":
        return np.linspace(grid["min"], grid["max"], grid["num"])
    if grid["min"] <= 0:
        raise ConfigError(f"axis {axis['name']!r}: log grid needs min > 0")
    return np.geomspace(grid["min"], grid["max"], grid["num"])


def _set_path(cfg: dict, path: str, value: float) -> None:
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"scan target {path!r}: {k!r} is not an object")
    node[keys[-1]] = value


def _scan_point(task) -> list[str]:
    """One grid point, pure; exceptions land in the status column."""
    cfg, x, y, threshold = task
    ystr = "" if y is None else _fmt(y)
    try:
        validate_config(cfg)
        model = build_model(cfg["model"])
        result = steady_chi(model)
        rates, _ = decoherence_rates(result.noise, zero_threshold=threshold)
        f_nm = non_markovianity(rates)
        current = _steady_current(model, result.chi)
        kind = _decay_kind(result.chi)
        return [_fmt(x), ystr, _fmt(f_nm), _fmt(current), kind, "ok"]
    except Exception as exc:  # noqa: BLE001 - per-point isolation
        msg = f"{type(exc).__name__}: {exc}".replace(",", ";")
        msg = " ".join(msg.split())
        return [_fmt(x), ystr, "nan", "nan", "", msg[:300]]


def run_scan(cfg, out: Path, tol, threads: int) -> dict:
    scfg = cfg.get("scan")
    if scfg is None:
        raise ConfigError("scan run requires a 'scan' section")
    xs = _axis_values(scfg["x"])
    yaxis = scfg.get("y")
    ys = _axis_values(yaxis) if yaxis is not None else [None]
    cap = scfg.get("max_points", DEFAULT_SCAN_CAP)
    if len(xs) * len(ys) > cap:
        raise ConfigError(
            f"grid has {len(xs) * len(ys)} points, exceeding cap {cap}")

    tasks = []
    for x in xs:
        for y in ys:
            point = copy.deepcopy(cfg)
            for tgt in scfg["x"]["targets"]:
                _set_path(point, tgt["path"], float(x) * tgt.get("scale", 1.0))
            if y is not None:
                for tgt in yaxis["targets"]:
                    _set_path(point, tgt["path"],
                              float(y) * tgt.get("scale", 1.0))
            tasks.append((point, float(x), y if y is None else float(y),
                          tol["rate_threshold"]))

    header = ["x", "y", "f_nM", "J_e", "decay_kind", "status"]
    path = out / "scan.csv"
    done = 0
    if path.exists():
        with open(path, newline="") as fh:
            existing = [row for row in csv.reader(fh) if row]
        if existing and existing[0] == header:
            done = sum(1 for row in existing[1:] if len(row) == len(header))
    pending = tasks[done:]
    n_failed = 0
    mode = "a" if done else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if not done:
            writer.writerow(header)
            fh.flush()
        if threads > 1 and len(pending) > 1:
            with multiprocessing.Pool(threads) as pool:
                for row in pool.imap(_scan_point, pending):
                    n_failed += row[-1] != "ok"
                    writer.writerow(row)
                    fh.flush()
        else:
            for task in pending:
                row = _scan_point(task)
                n_failed += row[-1] != "ok"
                writer.writerow(row)
                fh.flush()
    return {"outputs": ["scan.csv"],
            "summary": {"n_points": len(tasks), "n_resumed": done,
                        "n_failed": int(n_failed)}}


# ---------------------------------------------------------------------------
# Entry point

_RUNNERS = {
    "evolve": run_evolve,
    "rates": run_rates,
    "steady": run_steady,
    "oracle": run_oracle,
}


def _env_default(name: str, cast, fallback):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for ${name}") from None


def _write_manifest(out: Path, run: str, config_bytes: bytes,
                    payload: dict) -> None:
    import scipy

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "run": run,
        "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "kernel_backend": BACKEND,
        **payload,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nambuflow",
        description="Correlation-matrix dynamics of open quadratic "
                    "fermion chains: evolution, decoherence rates, steady "
                    "states, parameter scans, and brute-force cross-checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
            ("evolve", "integrate chi(t) and the time-dependent rates"),
            ("rates", "evaluate decoherence rates on a time grid"),
            ("steady", "solve for the steady-state correlation matrix"),
            ("scan", "steady-state observables over a parameter grid"),
            ("oracle", "compare against a discretized-bath evolution")]:
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="output directory "
                       "(default $NAMBUFLOW_OUT or ./nambuflow_out)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for scan "
                            "(default $NAMBUFLOW_THREADS or 1)")
        p.add_argument("--tol", type=float, default=None,
                       help="override integration rtol "
                            "(default $NAMBUFLOW_TOL or config value)")
    args = parser.parse_args(argv)

    try:
        out = Path(args.out if args.out is not None
                   else _env_default("NAMBUFLOW_OUT", str, "nambuflow_out"))
        threads = (args.threads if args.threads is not None
                   else _env_default("NAMBUFLOW_THREADS", int, 1))
        tol_override = (args.tol if args.tol is not None
                        else _env_default("NAMBUFLOW_TOL", float, None))
        try:
            config_bytes = Path(args.config).read_bytes()
            cfg = json.loads(config_bytes)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        validate_config(cfg)
        declared = cfg.get("run")
        if declared is not None and declared != args.command:
            raise ConfigError(
                f"config declares run={declared!r} but the "
                f"{args.command!r} subcommand was invoked")
        tol = _tolerances(cfg, tol_override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out.mkdir(parents=True, exist_ok=True)
    try:
        try:
            if args.command == "scan":
                payload = run_scan(cfg, out, tol, threads)
            else:
                payload = _RUNNERS[args.command](cfg, out, tol)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        except ValueError as exc:
            # model-construction failures are config problems, not numerics
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    except NumericalError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("achieved", "cond", "min_gap"):
            if hasattr(exc, attr):
                diag[attr] = float(getattr(exc, attr))
        with open(out / "error.json", "w") as fh:
            json.dump(diag, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"numerical failure: {diag['error']}: {diag['message']}",
              file=sys.stderr)
        return 3
    _write_manifest(out, args.command, config_bytes, payload)
    return 0
