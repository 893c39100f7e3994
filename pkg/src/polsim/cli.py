"""Batch front-end: JSON experiment configs in, CSV/JSON artifacts out.

Every run resolves one config file against a strict schema, dispatches to
the compute modules, and finishes by writing ``manifest.json`` with the
resolved parameters, derived scales, collected warnings, and artifact list.
The manifest is written last, so its presence certifies a complete run.
CSV bodies are deterministic for identical configs; only filenames and the
manifest timestamp vary between runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core_model import PhysicalConfig, derive_scales
from .errors import PolsimError, SchemaError
from .fidelity import (
    PI_PHASE_MIN_DB,
    blockade_gate_baseline,
    fidelity_report,
    switch_fidelities,
)
from .polariton_spectrum import REGIMES, composition, default_k_grid, spectrum
from .propagation import (
    cw_analytic,
    cw_bulk_coefficients,
    fitted_transparency_width,
    solve_bvp,
    t0_spectrum,
    transparency_width_study,
)
from .spinwave import blockade_loss_baseline, evolve_cw, initial_sine_mode, retrieval_eta

__all__ = ["TASKS", "run", "main"]

TASKS = ("spectrum", "t0", "propagate", "cw", "spinwave", "fidelity", "scan")

_PHYSICAL_KEYS = ("G", "Omega", "OmegaS", "gamma", "phi", "c", "C6", "L", "x_gate")

# required keys and optional-with-default keys per task
_TASK_PARAMS: dict[str, tuple[set, dict]] = {
    "spectrum": ({"regime"}, {"kmax_labs": 2.0, "n_k": 401}),
    "t0": ({"omega_min", "omega_max", "n_omega"}, {"fit_width": False}),
    "propagate": ({"omega"}, {}),
    "cw": ({"d_b_min", "d_b_max", "n_db"}, {}),
    "spinwave": (set(), {"n_samples": 256}),
    "fidelity": (
        {"d_b_min", "d_b_max", "n_db"},
        {
            "durations": None,
            "omega_min": None,
            "omega_max": None,
            "n_omega": None,
            "n_samples": 64,
        },
    ),
    "scan": (
        {"parameter", "values", "observable"},
        {"rel_window": 1e-3, "n_omega": 21},
    ),
}

_SCAN_OBSERVABLES = ("transparency_width", "cw_point")


# ---------------------------------------------------------------------------
# schema helpers

def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be a JSON object, got {type(obj).__name__}")
    return obj


def _check_keys(obj: dict, required, optional, where: str) -> None:
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise SchemaError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise SchemaError(f"missing required key(s) in {where}: {', '.join(missing)}")


def _number(obj: dict, key: str, where: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(params: dict, key: str, minimum: int = 1) -> int:
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"task_params.{key} must be an integer, got {value!r}")
    if value < minimum:
        raise SchemaError(f"task_params.{key} must be >= {minimum}, got {value}")
    return value


def _resolve_params(task: str, raw: dict) -> dict:
    required, optional = _TASK_PARAMS[task]
    _check_keys(raw, required, optional, f"task_params ({task})")
    params = dict(optional)
    params.update(raw)
    return params


def _apply_override(raw: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise SchemaError(f"--set expects key=value, got {assignment!r}")
    path, _, text = assignment.partition("=")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    keys = path.split(".")
    if keys[0] not in ("physical", "task_params", "task", "output_dir"):
        raise SchemaError(f"--set cannot touch {keys[0]!r}")
    if len(keys) == 1:
        if keys[0] in ("physical", "task_params"):
            raise SchemaError(f"--set {keys[0]} needs a subkey, e.g. {keys[0]}.name=value")
        raw[keys[0]] = value
    elif len(keys) == 2:
        section = raw.setdefault(keys[0], {})
        _require_mapping(section, keys[0])
        section[keys[1]] = value
    else:
        raise SchemaError(f"--set path too deep: {path!r}")


# ---------------------------------------------------------------------------
# artifact helpers

def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _parallel_map(fn, items):
    items = list(items)
    threads = int(os.environ.get("POLSIM_THREADS", "1") or "1")
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # executor.map preserves input order, keeping output deterministic
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# task implementations; each returns (artifacts, manifest_extras)

def _run_spectrum(cfg, scales, params, outdir, ts):
    regime = params["regime"]
    if regime not in REGIMES:
        raise SchemaError(f"task_params.regime must be one of {REGIMES}, got {regime!r}")
    kmax = float(params["kmax_labs"])
    n_k = _integer(params, "n_k", minimum=3)
    branches = spectrum(default_k_grid(cfg, kmax_labs=kmax, n=n_k), regime, cfg)
    rows = []
    for branch in branches:
        for i, k in enumerate(branch.k_samples):
            frac_fwd, frac_bwd, frac_matter = composition(branch.vectors[i])
            rows.append((
                branch.branch_id, branch.kind, k,
                branch.omega[i].real, branch.omega[i].imag,
                frac_fwd, frac_bwd, frac_matter,
            ))
    header = [
        "branch_id (index)", "kind (dark|bright)", "k_labs (1/l_abs)",
        "re_omega (gamma)", "im_omega (gamma)",
        "weight_forward (fraction)", "weight_backward (fraction)",
        "weight_matter (fraction)",
    ]
    name = f"spectrum_{ts}.csv"
    _atomic_write(outdir / name, _csv_text(header, rows))
    n_dark = sum(1 for b in branches if b.kind == "dark")
    return [name], {"regime": regime, "n_branches": len(branches), "n_dark": n_dark}


def _run_t0(cfg, scales, params, outdir, ts):
    lo = float(params["omega_min"])
    hi = float(params["omega_max"])
    n = _integer(params, "n_omega", minimum=2)
    if not lo < hi:
        raise SchemaError("task_params.omega_min must be below omega_max")
    grid = np.linspace(lo, hi, n)
    result = t0_spectrum(grid, cfg, scales)
    rows = [
        (w, t.real, t.imag, abs(t), abs(t) ** 2, r.real, r.imag, abs(r), abs(r) ** 2)
        for w, t, r in zip(result.omega, result.transmission, result.reflection)
    ]
    header = [
        "omega (rad/s)",
        "re_T0 (amplitude)", "im_T0 (amplitude)", "abs_T0 (amplitude)",
        "abs_T0_sq (power)",
        "re_R0 (amplitude)", "im_R0 (amplitude)", "abs_R0 (amplitude)",
        "abs_R0_sq (power)",
    ]
    name = f"t0_{ts}.csv"
    _atomic_write(outdir / name, _csv_text(header, rows))
    extras = {}
    if params["fit_width"]:
        fitted = fitted_transparency_width(result)
        extras["width_fit"] = {
            "fitted (rad/s)": fitted,
            "predicted (rad/s)": scales.delta_omega0,
            "rel_error": abs(fitted - scales.delta_omega0) / scales.delta_omega0,
        }
    return [name], extras


def _run_propagate(cfg, scales, params, outdir, ts):
    omega = float(params["omega"])
    result = solve_bvp(omega, cfg.x_gate, cfg, scales=scales, cw=(omega == 0.0))
    field = result.field
    rows = [
        (
            z, er.real, er.imag, abs(er), abs(er) ** 2,
            el.real, el.imag, abs(el), abs(el) ** 2,
        )
        for z, er, el in zip(field.z * scales.z_b, field.e_right, field.e_left)
    ]
    header = [
        "z (m)",
        "re_E_fwd (amplitude)", "im_E_fwd (amplitude)", "abs_E_fwd (amplitude)",
        "abs_E_fwd_sq (power)",
        "re_E_bwd (amplitude)", "im_E_bwd (amplitude)", "abs_E_bwd (amplitude)",
        "abs_E_bwd_sq (power)",
    ]
    name = f"propagate_{ts}.csv"
    _atomic_write(outdir / name, _csv_text(header, rows))
    extras = {
        "omega (rad/s)": omega,
        "transmission": {"re": result.transmission.real, "im": result.transmission.imag,
                         "abs": abs(result.transmission)},
        "reflection": {"re": result.reflection.real, "im": result.reflection.imag,
                       "abs": abs(result.reflection)},
        "absorption": result.absorption,
        "richardson_error": result.richardson_error,
        "segments": result.segments,
    }
    return [name], extras


def _run_cw(cfg, scales, params, outdir, ts):
    lo = float(params["d_b_min"])
    hi = float(params["d_b_max"])
    n = _integer(params, "n_db", minimum=2)
    if not 0.0 < lo < hi:
        raise SchemaError("task_params must satisfy 0 < d_b_min < d_b_max")
    dbs = np.linspace(lo, hi, n)

    def one(d_b):
        t, r, loss = cw_bulk_coefficients(float(d_b), cfg.phi)
        return (
            d_b, abs(t), abs(t) ** 2, abs(r), abs(r) ** 2,
            math.atan2(r.imag, r.real), loss, blockade_loss_baseline(float(d_b)),
        )

    rows = _parallel_map(one, dbs)
    header = [
        "d_b (dimensionless)",
        "abs_T1 (amplitude)", "abs_T1_sq (power)",
        "abs_R1 (amplitude)", "abs_R1_sq (power)", "arg_R1 (rad)",
        "loss_A (fraction)", "blockade_loss_baseline (fraction)",
    ]
    name = f"cw_{ts}.csv"
    _atomic_write(outdir / name, _csv_text(header, rows))
    return [name], {}


def _run_spinwave(cfg, scales, params, outdir, ts):
    n = _integer(params, "n_samples", minimum=64)
    rho0 = initial_sine_mode(cfg.L, n)
    evolved = evolve_cw(rho0, cfg, scales)

    def matrix_csv(matrix):
        header = ["x\\y (m)"] + [_fmt(y) for y in evolved.grid]
        rows = [(x, *row) for x, row in zip(evolved.grid, matrix)]
        return _csv_text(header, rows)

    names = [f"spinwave_re_{ts}.csv", f"spinwave_im_{ts}.csv", f"spinwave_summary_{ts}.json"]
    _atomic_write(outdir / names[0], matrix_csv(evolved.rho.real))
    _atomic_write(outdir / names[1], matrix_csv(evolved.rho.imag))

    supported = np.abs(rho0.rho) > 0
    ratio = np.ones_like(rho0.rho, dtype=float)
    ratio[supported] = np.abs(evolved.rho[supported] / rho0.rho[supported])
    summary = {
        "n_samples": n,
        "trace": evolved.trace(),
        "purity": evolved.purity(),
        "min_coherence_ratio": float(ratio.min()),
        "eta_retrieval_estimate": retrieval_eta(evolved),
    }
    _atomic_write(outdir / names[2], _json_text(summary))
    return names, {"spinwave_summary": summary}


def _run_fidelity(cfg, scales, params, outdir, ts):
    lo = float(params["d_b_min"])
    hi = float(params["d_b_max"])
    n = _integer(params, "n_db", minimum=2)
    if not 0.0 < lo < hi:
        raise SchemaError("task_params must satisfy 0 < d_b_min < d_b_max")
    n_samples = _integer(params, "n_samples", minimum=64)
    dbs = np.linspace(lo, hi, n)

    def one(d_b):
        d_b = float(d_b)
        f = switch_fidelities(d_b, cfg.phi)
        masked = blockade_gate_baseline(d_b) if d_b >= PI_PHASE_MIN_DB else None
        return (
            d_b, f.classical, f.quantum, f.gate, masked,
            blockade_loss_baseline(d_b),
        )

    rows = _parallel_map(one, dbs)
    header = [
        "d_b (dimensionless)",
        "f_classical_switch (fidelity)", "f_quantum_switch (fidelity)",
        "f_gate (fidelity)",
        "f_gate_blockade_baseline (fidelity, masked below d_b=6)",
        "f_classical_blockade_baseline (fidelity)",
    ]
    names = [f"fidelity_{ts}.csv"]
    _atomic_write(outdir / names[0], _csv_text(header, rows))

    durations = params["durations"]
    omega_grid = None
    if durations is not None:
        if (not isinstance(durations, list) or not durations
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in durations)):
            raise SchemaError("task_params.durations must be a nonempty list of numbers")
        for key in ("omega_min", "omega_max", "n_omega"):
            if params[key] is None:
                raise SchemaError(f"task_params.{key} is required when durations are given")
        n_omega = _integer(params, "n_omega", minimum=2)
        omega_grid = np.linspace(float(params["omega_min"]), float(params["omega_max"]), n_omega)

    report = fidelity_report(
        cfg,
        durations=tuple(sorted(float(v) for v in durations)) if durations else (),
        omega_grid=omega_grid,
        n_samples=n_samples,
    )
    payload = dataclasses.asdict(report)
    payload["f_pulse"] = {_fmt(k): v for k, v in report.f_pulse.items()}
    names.append(f"fidelity_report_{ts}.json")
    _atomic_write(outdir / names[1], _json_text(payload))

    if durations is not None:
        pulse_rows = sorted(report.f_pulse.items())
        names.append(f"fidelity_pulse_{ts}.csv")
        _atomic_write(
            outdir / names[2],
            _csv_text(["duration (s)", "fidelity (dimensionless)"], pulse_rows),
        )
    return names, {"operating_point_d_b": scales.d_b}


def _run_scan(cfg, scales, params, outdir, ts):
    parameter = params["parameter"]
    if parameter not in _PHYSICAL_KEYS:
        raise SchemaError(
            f"task_params.parameter must be one of {_PHYSICAL_KEYS}, got {parameter!r}"
        )
    observable = params["observable"]
    if observable not in _SCAN_OBSERVABLES:
        raise SchemaError(
            f"task_params.observable must be one of {_SCAN_OBSERVABLES}, got {observable!r}"
        )
    values = params["values"]
    if (not isinstance(values, list) or not values
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values)):
        raise SchemaError("task_params.values must be a nonempty list of numbers")
    values = sorted(float(v) for v in values)

    if observable == "transparency_width":
        def one(value):
            sub = dataclasses.replace(cfg, **{parameter: value})
            fit = transparency_width_study(
                sub, rel_window=float(params["rel_window"]), n=int(params["n_omega"])
            )
            return (value, fit.fitted, fit.predicted, fit.rel_error)

        header = [
            f"{parameter} (config units)", "fitted_width (rad/s)",
            "predicted_width (rad/s)", "rel_error (dimensionless)",
        ]
    else:
        def one(value):
            sub = dataclasses.replace(cfg, **{parameter: value})
            sub_scales = derive_scales(sub, allow_oversized_blockade=True)
            res = cw_analytic(sub.x_gate, sub, scales=sub_scales)
            return (
                value, abs(res.transmission), abs(res.transmission) ** 2,
                abs(res.reflection), abs(res.reflection) ** 2, res.absorption,
            )

        header = [
            f"{parameter} (config units)",
            "abs_T1 (amplitude)", "abs_T1_sq (power)",
            "abs_R1 (amplitude)", "abs_R1_sq (power)", "loss_A (fraction)",
        ]

    rows = _parallel_map(one, values)
    name = f"scan_{ts}.csv"
    _atomic_write(outdir / name, _csv_text(header, rows))
    return [name], {"parameter": parameter, "observable": observable}


_RUNNERS = {
    "spectrum": _run_spectrum,
    "t0": _run_t0,
    "propagate": _run_propagate,
    "cw": _run_cw,
    "spinwave": _run_spinwave,
    "fidelity": _run_fidelity,
    "scan": _run_scan,
}


# ---------------------------------------------------------------------------
# entry points

def run(config_path, cli_task: str | None = None, overrides=(), out_override=None) -> int:
    """Execute one experiment config and write its artifacts.

    Raises SchemaError for input problems and lets numerical failures
    propagate; ``main`` maps these onto exit codes 2 and 3.
    """
    path = Path(config_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"config file {path} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})"
        ) from exc
    _require_mapping(raw, "config")

    for assignment in overrides:
        _apply_override(raw, assignment)

    _check_keys(raw, {"physical"}, {"task", "task_params", "output_dir"}, "config")
    task = raw.get("task", cli_task)
    if task is None:
        raise SchemaError("no task given (config 'task' key or CLI argument)")
    if cli_task is not None and task != cli_task:
        raise SchemaError(
            f"config task {task!r} conflicts with command-line task {cli_task!r}"
        )
    if task not in TASKS:
        raise SchemaError(f"task must be one of {TASKS}, got {task!r}")

    physical = _require_mapping(raw["physical"], "physical")
    _check_keys(physical, set(_PHYSICAL_KEYS), set(), "physical")
    numbers = {key: _number(physical, key, "physical") for key in _PHYSICAL_KEYS}
    try:
        cfg = PhysicalConfig(**numbers)
    except ValueError as exc:
        raise SchemaError(f"physical: {exc}") from exc

    params = _resolve_params(task, _require_mapping(raw.get("task_params", {}), "task_params"))

    outdir = Path(out_override or raw.get("output_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)

    soft_warnings = []
    scales = derive_scales(cfg, allow_oversized_blockade=True)
    if scales.z_b > cfg.L:
        soft_warnings.append(
            f"blockade radius {scales.z_b:.6g} exceeds medium length {cfg.L:.6g}; "
            "continuing with the oversized-blockade override"
        )

    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        artifacts, extras = _RUNNERS[task](cfg, scales, params, outdir, timestamp)

    manifest = {
        "task": task,
        "timestamp": timestamp,
        "config": {
            "physical": numbers,
            "task": task,
            "task_params": params,
            "output_dir": str(outdir),
        },
        "derived_scales": dataclasses.asdict(scales),
        "warnings": soft_warnings + [str(w.message) for w in caught],
        "artifacts": artifacts,
    }
    manifest.update(extras)
    _atomic_write(outdir / "manifest.json", _json_text(manifest))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polsim",
        description="Batch runner for polariton switching simulations.",
    )
    parser.add_argument("task", choices=TASKS, help="compute task to run")
    parser.add_argument("--config", required=True, help="JSON experiment config file")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="KEY=VALUE", help="override a config entry, e.g. physical.OmegaS=2e8",
    )
    parser.add_argument("--out", default=None, help="output directory override")
    args = parser.parse_args(argv)

    try:
        return run(args.config, cli_task=args.task, overrides=args.overrides,
                   out_override=args.out)
    except SchemaError as exc:
        print(f"polsim: config error: {exc}", file=sys.stderr)
        return 2
    except (PolsimError, ValueError) as exc:
        print(f"polsim: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
