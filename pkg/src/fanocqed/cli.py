"""Command-line front end: presets, config-driven runs, parameter sweeps.

Commands: spectrum, weights, dynamics, sweep, preset list, preset show <id>.
Every run writes deterministic CSV outputs (9 significant digits, scientific
notation, fixed ordering) plus a manifest.json holding every number needed to
reproduce the run. Default output directory comes from $FANOCQED_OUT.

Exit codes: 0 success, 2 validation error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__, _kernels
from .config import ResolvedRun, effective_t_max, load_config, resolved_from_preset
from .discretize import build_photon_grid, grid_to_csv
from .dynamics import fit_decay_rate, propagate, recurrence_time, trajectory_to_csv
from .eigensolve import eigen_table_csv, eigensolve_dense, eigensolve_structured
from .hamiltonian import assemble
from .model import SolverError, ValidationError
from .observables import (
    Spectrum,
    absorption_spectrum,
    default_omega_grid,
    dip_depth,
    find_peaks,
    resolvent_spectrum,
    spectrum_to_csv,
    weight_spectrum,
    weight_table_csv,
)

ENV_OUT_DIR = "FANOCQED_OUT"


def _out_root(arg_out: str | None) -> str:
    if arg_out:
        return arg_out
    return os.environ.get(ENV_OUT_DIR, "fanocqed_out")


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _solve(system, solver: str, use_numba=None):
    if solver == "dense":
        return eigensolve_dense(system)
    return eigensolve_structured(system, use_numba=use_numba)


def _omega_grid_for(resolved: ResolvedRun):
    lo = resolved.run.omega_min if resolved.run.omega_min is not None else resolved.cavity.window[0]
    hi = resolved.run.omega_max if resolved.run.omega_max is not None else resolved.cavity.window[1]
    return default_omega_grid(lo, hi, resolved.run.omega_points)


def run_resolved(resolved: ResolvedRun, out_dir: str, run_name: str | None = None) -> dict:
    """Execute one resolved run and write its outputs; returns the manifest dict."""
    name = run_name or resolved.name
    base = os.path.join(out_dir, name)
    grid = build_photon_grid(resolved.cavity)
    outputs: list[str] = []
    summary: dict = {}

    kind = resolved.run.kind
    omega_grid = _omega_grid_for(resolved)
    if kind == "spectrum":
        system = assemble(resolved.levels, grid)
        if resolved.run.solver == "resolvent":
            spec = resolvent_spectrum(
                system, resolved.levels, resolved.run.gamma, omega_grid,
                polarization=resolved.run.polarization,
            )
        else:
            modes = _solve(system, resolved.run.solver)
            spec = absorption_spectrum(
                modes, resolved.levels, resolved.run.gamma, omega_grid,
                polarization=resolved.run.polarization,
            )
        _write(os.path.join(base, "spectrum.csv"), spectrum_to_csv(spec))
        outputs.append("spectrum.csv")
        positions, heights = find_peaks(spec)
        summary["n_peaks"] = int(positions.size)
        summary["peak_positions_eV"] = [float(p) for p in positions[:4]]
    elif kind == "weights":
        system = assemble(resolved.levels, grid)
        solver = resolved.run.solver if resolved.run.solver != "resolvent" else "structured"
        modes = _solve(system, solver)
        curves = [
            weight_spectrum(modes, lb, resolved.run.gamma, omega_grid)
            for lb in resolved.levels.labels
        ]
        _write(os.path.join(base, "weights.csv"), weight_table_csv(curves))
        _write(os.path.join(base, "eigen_table.csv"), eigen_table_csv(modes))
        outputs.extend(["weights.csv", "eigen_table.csv"])
    elif kind == "dynamics":
        system = assemble(resolved.levels, grid)
        solver = resolved.run.solver if resolved.run.solver != "resolvent" else "structured"
        modes = _solve(system, solver)
        t_max = effective_t_max(resolved)
        t_rec = recurrence_time(resolved.cavity.spacing)
        if t_max >= 0.5 * t_rec:
            raise ValidationError(
                [
                    "run.t_max_fs: trajectory must end before half the grid recurrence "
                    f"time ({0.5 * t_rec:.1f} fs for this spacing)"
                ]
            )
        initial = resolved.run.initial or resolved.levels.labels[0]
        t_grid = np.linspace(0.0, t_max, resolved.run.t_points)
        traj = propagate(system, initial, t_grid, modes=modes)
        _write(os.path.join(base, "trajectory.csv"), trajectory_to_csv(traj))
        outputs.append("trajectory.csv")
        fit = fit_decay_rate(traj, initial)
        summary["hbar_gamma_fit_eV"] = fit.hbar_gamma
        summary["fit_exponential"] = fit.exponential
    else:  # pragma: no cover - guarded by config validation
        raise ValidationError([f"run.kind: unknown kind {kind!r}"])

    _write(os.path.join(base, "grid.csv"), grid_to_csv(grid))
    outputs.append("grid.csv")
    manifest = {
        "version": __version__,
        "backend": _kernels.backend_name(),
        "run_name": name,
        "n_modes": int(grid.n),
        "config": resolved.to_dict(),
        "summary": summary,
        "outputs": sorted(outputs),
    }
    _write(os.path.join(base, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def run_preset(preset_id: str, out_dir: str) -> dict:
    """Run a preset with its default kind and solver."""
    return run_resolved(resolved_from_preset(preset_id), out_dir)


def run_config(path, out_dir: str) -> dict:
    """Run a JSON config document from disk (same outputs as presets)."""
    return run_resolved(load_config(path), out_dir)


SWEEP_PARAMS = ("lambda_c", "kappa", "gamma")


def _apply_sweep_value(resolved: ResolvedRun, param: str, value: float) -> ResolvedRun:
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError([f"sweep.values: {value!r} must be finite and positive"])
    if param == "gamma":
        return replace(resolved, run=replace(resolved.run, gamma=value))
    cav = resolved.cavity
    if param == "kappa":
        new_cav = replace(cav, kappa=value)
    else:
        lam = cav.lambda_vec()
        norm = float(np.linalg.norm(lam))
        direction = lam / norm if norm > 0.0 else np.array([1.0, 0.0, 0.0])
        new_cav = replace(cav, lambda_c=tuple(float(x) for x in direction * value))
    from .model import validate_inputs

    validate_inputs(resolved.levels, new_cav)
    return replace(resolved, cavity=new_cav)


def run_sweep(
    resolved: ResolvedRun,
    param: str,
    values: list[float],
    out_dir: str,
    dip_at: float | None = None,
    dip_halfwidth: float = 0.004,
) -> dict:
    """One output set per value plus a summary CSV of peaks, splittings, dips, rates."""
    if param not in SWEEP_PARAMS:
        raise ValidationError([f"sweep.param: must be one of {SWEEP_PARAMS}"])
    if not values:
        raise ValidationError(["sweep.values: value list must not be empty"])
    name = f"{resolved.name}-sweep-{param}"
    rows = []
    for i, value in enumerate(values):
        member = _apply_sweep_value(resolved, param, value)
        member_name = f"{name}/member{i:03d}"
        manifest = run_resolved(member, out_dir, run_name=member_name)
        row = {
            "value": value,
            "n_peaks": float("nan"),
            "peak1_eV": float("nan"),
            "peak2_eV": float("nan"),
            "splitting_eV": float("nan"),
            "dip_depth": float("nan"),
            "hbar_gamma_fit_eV": float("nan"),
        }
        if member.run.kind == "spectrum":
            spec = _read_spectrum_csv(os.path.join(out_dir, member_name, "spectrum.csv"))
            positions, heights = find_peaks(spec)
            row["n_peaks"] = float(positions.size)
            order = np.argsort(heights)[::-1]
            if positions.size >= 1:
                row["peak1_eV"] = float(positions[order[0]])
            if positions.size >= 2:
                row["peak2_eV"] = float(positions[order[1]])
                row["splitting_eV"] = abs(row["peak1_eV"] - row["peak2_eV"])
            if dip_at is not None:
                row["dip_depth"] = dip_depth(spec, dip_at, dip_halfwidth)
        elif member.run.kind == "dynamics":
            row["hbar_gamma_fit_eV"] = manifest["summary"]["hbar_gamma_fit_eV"]
        rows.append(row)
    cols = ["value", "n_peaks", "peak1_eV", "peak2_eV", "splitting_eV", "dip_depth", "hbar_gamma_fit_eV"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(f"{row[c] + 0.0:.8e}" for c in cols))
    _write(os.path.join(out_dir, name, "summary.csv"), "\n".join(lines) + "\n")
    return {"name": name, "rows": rows}


def _read_spectrum_csv(path: str) -> Spectrum:
    omega = []
    intensity = []
    scale = 1.0
    gamma = 0.0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("omega_eV"):
                continue
            if line.startswith("#"):
                if line.startswith("# gamma_eV="):
                    gamma = float(line.split("=", 1)[1])
                continue
            w, v, s = line.split(",")
            omega.append(float(w))
            intensity.append(float(v))
            scale = float(s)
    return Spectrum(
        omega=np.asarray(omega),
        intensity=np.asarray(intensity),
        scale_factor=scale,
        channel="total_absorption",
        gamma=gamma,
        normalized=True,
    )


def _resolved_from_args(args) -> ResolvedRun:
    if getattr(args, "config", None):
        resolved = load_config(args.config)
    elif getattr(args, "preset", None):
        try:
            resolved = resolved_from_preset(args.preset)
        except KeyError as exc:
            raise ValidationError([str(exc.args[0])]) from None
    else:
        raise ValidationError(["arguments: provide --preset or --config"])
    overrides = {}
    if getattr(args, "solver", None):
        overrides["solver"] = args.solver
    if getattr(args, "initial", None):
        overrides["initial"] = args.initial
    if getattr(args, "t_max", None) is not None:
        overrides["t_max_fs"] = args.t_max
    if getattr(args, "t_points", None) is not None:
        overrides["t_points"] = args.t_points
    if overrides:
        resolved = replace(resolved, run=replace(resolved.run, **overrides))
    return resolved


def _add_run_options(p: argparse.ArgumentParser, dynamics: bool = False) -> None:
    p.add_argument("--preset", help="preset id (see 'preset list')")
    p.add_argument("--config", help="path to a JSON config document")
    p.add_argument("--out", help="output directory (default $FANOCQED_OUT or ./fanocqed_out)")
    p.add_argument("--solver", choices=("structured", "dense", "resolvent"))
    p.add_argument("--threads", type=int, help="numba thread count for parallel kernels")
    if dynamics:
        p.add_argument("--initial", help="starting electronic state label")
        p.add_argument("--t-max", dest="t_max", type=float, help="trajectory length in fs")
        p.add_argument("--t-points", dest="t_points", type=int, help="number of time samples")


def _apply_threads(args) -> None:
    n = getattr(args, "threads", None)
    if n and _kernels.HAVE_NUMBA:
        import numba

        numba.set_num_threads(max(1, min(n, os.cpu_count() or 1)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanocqed",
        description="Few-level emitters in a lossy cavity: spectra, weights, dynamics",
    )
    parser.add_argument("--version", action="version", version=f"fanocqed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for cmd, is_dyn in (("spectrum", False), ("weights", False), ("dynamics", True)):
        p = sub.add_parser(cmd, help=f"run a {cmd} calculation")
        _add_run_options(p, dynamics=is_dyn)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep with a summary table")
    _add_run_options(p_sweep, dynamics=True)
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--dip-at", dest="dip_at", type=float,
                         help="report dip depth near this frequency (eV)")
    p_sweep.add_argument("--dip-halfwidth", dest="dip_halfwidth", type=float, default=0.004)

    p_preset = sub.add_parser("preset", help="list or show built-in presets")
    p_preset.add_argument("action", choices=("list", "show"))
    p_preset.add_argument("id", nargs="?")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            from .presets import get_preset, list_presets

            if args.action == "list":
                for preset in list_presets():
                    print(f"{preset.id:14s} {preset.kind:9s} {preset.description}")
            else:
                if not args.id:
                    raise ValidationError(["preset show: missing preset id"])
                try:
                    preset = get_preset(args.id)
                except KeyError as exc:
                    raise ValidationError([str(exc.args[0])]) from None
                doc = resolved_from_preset(preset.id).to_dict()
                print(json.dumps(doc, indent=2, sort_keys=True))
            return 0

        _apply_threads(args)
        out_dir = _out_root(args.out)
        resolved = _resolved_from_args(args)
        if args.command in ("spectrum", "weights", "dynamics"):
            resolved = replace(resolved, run=replace(resolved.run, kind=args.command))
            manifest = run_resolved(resolved, out_dir)
            print(f"wrote {out_dir}/{manifest['run_name']}")
        elif args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ValidationError(["sweep.values: could not parse value list"]) from None
            result = run_sweep(
                resolved, args.param, values, out_dir,
                dip_at=args.dip_at, dip_halfwidth=args.dip_halfwidth,
            )
            print(f"wrote {out_dir}/{result['name']}")
        return 0
    except ValidationError as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
