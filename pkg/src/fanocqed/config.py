"""JSON run configuration: schema, preset inheritance, validation.

A config document has three sections. ``levels`` and ``cavity`` define the
physical system (units: eV, e*Angstrom, eV^(1/2)/nm), ``run`` selects what to
compute. A top-level ``"preset"`` key inherits everything from a named preset
and applies the given sections as overrides (``levels`` wholesale, ``cavity``
and ``run`` key by key), so overriding a single number is a two-line file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import CavityModel, ElectronicLevels, Level, ValidationError, validate_inputs
from .presets import Preset, default_t_max, get_preset

RUN_KINDS = ("spectrum", "weights", "dynamics")
SOLVERS = ("structured", "dense", "resolvent")


@dataclass(frozen=True)
class RunSpec:
    kind: str = "spectrum"
    gamma: float = 0.001
    solver: str = "structured"
    omega_min: float | None = None
    omega_max: float | None = None
    omega_points: int = 3000
    polarization: tuple[float, float, float] = (1.0, 0.0, 0.0)
    initial: str | None = None
    t_max_fs: float | None = None
    t_points: int = 2000

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "gamma": self.gamma,
            "solver": self.solver,
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
            "omega_points": self.omega_points,
            "polarization": list(self.polarization),
            "initial": self.initial,
            "t_max_fs": self.t_max_fs,
            "t_points": self.t_points,
        }


@dataclass(frozen=True)
class ResolvedRun:
    name: str
    levels: ElectronicLevels
    cavity: CavityModel
    run: RunSpec

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "levels": self.levels.to_dict()["levels"],
            "cavity": self.cavity.to_dict(),
            "run": self.run.to_dict(),
        }


def _run_from_preset(preset: Preset) -> RunSpec:
    return RunSpec(
        kind=preset.kind,
        gamma=preset.gamma,
        solver=preset.solver,
        omega_points=preset.omega_points,
        initial=preset.initial,
    )


def _parse_levels(data, errors: list[str]) -> ElectronicLevels | None:
    if not isinstance(data, list) or not data:
        errors.append("levels: must be a non-empty list")
        return None
    levels = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            errors.append(f"levels[{i}]: must be an object")
            return None
        try:
            levels.append(
                Level(
                    str(entry["label"]),
                    float(entry["energy"]),
                    tuple(float(x) for x in entry["dipole"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"levels[{i}]: {exc}")
            return None
    return ElectronicLevels(tuple(levels))


def _parse_cavity(data, base: CavityModel | None, errors: list[str]) -> CavityModel | None:
    if not isinstance(data, dict):
        errors.append("cavity: must be an object")
        return None
    merged = base.to_dict() if base is not None else {}
    merged.update(data)
    required = ("omega_c", "lambda_c", "kappa", "window", "spacing")
    missing = [k for k in required if k not in merged]
    if missing:
        errors.append(f"cavity: missing fields {missing}")
        return None
    try:
        return CavityModel.from_dict(merged)
    except (TypeError, ValueError, IndexError) as exc:
        errors.append(f"cavity: {exc}")
        return None


def _parse_run(data, base: RunSpec, errors: list[str]) -> RunSpec:
    if not isinstance(data, dict):
        errors.append("run: must be an object")
        return base
    merged = base.to_dict()
    for key in data:
        if key not in merged:
            errors.append(f"run.{key}: unknown field")
    merged.update({k: v for k, v in data.items() if k in merged})
    try:
        spec = RunSpec(
            kind=str(merged["kind"]),
            gamma=float(merged["gamma"]),
            solver=str(merged["solver"]),
            omega_min=None if merged["omega_min"] is None else float(merged["omega_min"]),
            omega_max=None if merged["omega_max"] is None else float(merged["omega_max"]),
            omega_points=int(merged["omega_points"]),
            polarization=tuple(float(x) for x in merged["polarization"]),
            initial=None if merged["initial"] is None else str(merged["initial"]),
            t_max_fs=None if merged["t_max_fs"] is None else float(merged["t_max_fs"]),
            t_points=int(merged["t_points"]),
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"run: {exc}")
        return base
    if spec.kind not in RUN_KINDS:
        errors.append(f"run.kind: must be one of {RUN_KINDS}")
    if spec.solver not in SOLVERS:
        errors.append(f"run.solver: must be one of {SOLVERS}")
    if not spec.gamma > 0.0:
        errors.append("run.gamma: must be positive")
    if spec.omega_points < 2:
        errors.append("run.omega_points: need at least two points")
    if spec.t_points < 2:
        errors.append("run.t_points: need at least two points")
    return spec


def resolve_config(doc: dict, name: str = "run") -> ResolvedRun:
    """Turn a config document (possibly inheriting a preset) into a validated run."""
    if not isinstance(doc, dict):
        raise ValidationError(["config: document must be a JSON object"])
    errors: list[str] = []
    levels = None
    cavity_base = None
    run_base = RunSpec()
    if "preset" in doc:
        try:
            preset = get_preset(str(doc["preset"]))
        except KeyError as exc:
            raise ValidationError([f"preset: {exc.args[0]}"]) from None
        levels = preset.levels
        cavity_base = preset.cavity
        run_base = _run_from_preset(preset)
        name = str(doc["preset"])
    if "levels" in doc:
        levels = _parse_levels(doc["levels"], errors)
    if levels is None and not errors:
        errors.append("levels: section is required (directly or via a preset)")
    if "cavity" in doc:
        cavity = _parse_cavity(doc["cavity"], cavity_base, errors)
    else:
        cavity = cavity_base
        if cavity is None:
            errors.append("cavity: section is required (directly or via a preset)")
    run = _parse_run(doc.get("run", {}), run_base, errors)
    if errors:
        raise ValidationError(errors)
    levels, cavity = validate_inputs(levels, cavity)
    if run.initial is not None and run.initial not in levels.labels:
        raise ValidationError([f"run.initial: unknown level label {run.initial!r}"])
    return ResolvedRun(name=name, levels=levels, cavity=cavity, run=run)


def load_config(path) -> ResolvedRun:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError([f"config: invalid JSON ({exc})"]) from None
    import os

    return resolve_config(doc, name=os.path.splitext(os.path.basename(str(path)))[0])


def resolved_from_preset(preset_id: str) -> ResolvedRun:
    preset = get_preset(preset_id)
    return ResolvedRun(
        name=preset.id,
        levels=preset.levels,
        cavity=preset.cavity,
        run=_run_from_preset(preset),
    )


def effective_t_max(resolved: ResolvedRun) -> float:
    if resolved.run.t_max_fs is not None:
        return resolved.run.t_max_fs
    return default_t_max(resolved.levels, resolved.cavity)
