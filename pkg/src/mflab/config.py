"""Experiment configuration: flat `key = value` files with documented defaults.

Unknown keys are rejected; missing keys fall back to the defaults below. The
fully resolved configuration is echoed next to the results so a run can be
reproduced from its output directory alone.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .ensemble import ExperimentPlan
from .grid import LatticeGrid, WaveFunction, build_grid, gaussian_packet, \
    plane_wave, uniform_state
from .observables import PObservable, condensate_projector, site_multiplier
from .random_field import FieldSpec

_DEFAULTS = {
    "dimension": "1",
    "sites": "8",
    "box_length": "8.0",
    "t_final": "0.5",
    "dt": "",                      # empty -> t_final / 512
    "particle_counts": "2,4,6",
    "samples": "64",
    "base_seed": "20240817",
    "threads": "0",                # 0 -> available cores
    "field.base": "zero",
    "field.gaussian_mean": "0.0",
    "field.sigmas": "",
    "field.enforce_even": "true",
    "observable.kind": "condensate_projector",
    "observable.p": "1",
    "observable.amplitude": "1.0",
    "observable.mode": "1",
    "init.kind": "gaussian_packet",
    "init.center": "",             # empty -> box_length / 2
    "init.width": "",              # empty -> box_length / 8
    "init.mode": "1",
    "output_dir": "./out",
    "beta": "auto",                # auto -> half the observable norm
}


@dataclass
class RunOptions:
    threads: int          # 0 means "use available cores"
    output_dir: str
    beta: float | None    # None means "observable norm / 2"
    resolved: dict[str, str]


def _parse_kv_file(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    out: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"{p}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{p}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _get_int(cfg: dict, key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected integer, got {cfg[key]!r}") from None


def _get_float(cfg: dict, key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected number, got {cfg[key]!r}") from None


def _get_bool(cfg: dict, key: str) -> bool:
    val = cfg[key].lower()
    if val in ("true", "1", "yes"):
        return True
    if val in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: expected boolean, got {cfg[key]!r}")


def _float_list(cfg: dict, key: str) -> tuple[float, ...]:
    raw = cfg[key].strip()
    if not raw:
        return ()
    try:
        return tuple(float(tok) for tok in raw.split(","))
    except ValueError:
        raise ConfigError(f"key {key!r}: expected comma list of numbers, "
                          f"got {cfg[key]!r}") from None


def _int_list(cfg: dict, key: str) -> tuple[int, ...]:
    raw = cfg[key].strip()
    if not raw:
        return ()
    try:
        return tuple(int(tok) for tok in raw.split(","))
    except ValueError:
        raise ConfigError(f"key {key!r}: expected comma list of integers, "
                          f"got {cfg[key]!r}") from None


def _build_initial_state(cfg: dict, grid: LatticeGrid) -> WaveFunction:
    kind = cfg["init.kind"]
    if kind == "gaussian_packet":
        center = _get_float(cfg, "init.center") if cfg["init.center"] else None
        width = _get_float(cfg, "init.width") if cfg["init.width"] else None
        return gaussian_packet(grid, center=center, width=width)
    if kind == "uniform":
        return uniform_state(grid)
    if kind == "plane_wave":
        return plane_wave(grid, mode=_get_int(cfg, "init.mode"))
    raise ConfigError(f"key 'init.kind': unknown initial state {kind!r}")


def _build_observable(cfg: dict, grid: LatticeGrid,
                      phi: WaveFunction) -> PObservable:
    kind = cfg["observable.kind"]
    p = _get_int(cfg, "observable.p")
    if p < 1:
        raise ConfigError("key 'observable.p': must be a positive integer")
    if kind == "condensate_projector":
        return condensate_projector(phi, p=p)
    if kind == "site_multiplier":
        if p != 1:
            raise ConfigError("key 'observable.p': site_multiplier is one-particle")
        return site_multiplier(grid, amplitude=_get_float(cfg, "observable.amplitude"),
                               mode=_get_int(cfg, "observable.mode"))
    raise ConfigError(f"key 'observable.kind': unknown observable {kind!r}")


def parse_config(path: str | Path) -> tuple[ExperimentPlan, RunOptions]:
    """Read, validate and resolve a config file into a runnable plan."""
    user = _parse_kv_file(path)
    cfg = dict(_DEFAULTS)
    cfg.update(user)

    grid = build_grid(_get_int(cfg, "dimension"), _get_int(cfg, "sites"),
                      _get_float(cfg, "box_length"))

    t_final = _get_float(cfg, "t_final")
    if t_final < 0:
        raise ConfigError("key 't_final': must be nonnegative")
    dt = _get_float(cfg, "dt") if cfg["dt"] else (t_final / 512 if t_final > 0 else 1.0)
    if dt <= 0:
        raise ConfigError("key 'dt': must be positive")

    counts = _int_list(cfg, "particle_counts")
    if not counts:
        raise ConfigError("key 'particle_counts': must be a nonempty comma list")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ConfigError("key 'particle_counts': particle_counts must be "
                          "strictly ascending")

    sigmas = _float_list(cfg, "field.sigmas")
    if len(sigmas) >= grid.m / 2:
        raise ConfigError(
            f"key 'field.sigmas': {len(sigmas)} modes violate the K < M/2 rule "
            f"(M = {grid.m} sites per axis)"
        )
    field_spec = FieldSpec(
        base=cfg["field.base"],
        gaussian_mean=_get_float(cfg, "field.gaussian_mean"),
        mode_stddevs=sigmas,
        enforce_even=_get_bool(cfg, "field.enforce_even"),
    )

    phi = _build_initial_state(cfg, grid)
    observable = _build_observable(cfg, grid, phi)

    samples = _get_int(cfg, "samples")
    if samples < 1:
        raise ConfigError("key 'samples': must be >= 1")
    base_seed = _get_int(cfg, "base_seed")
    if not (0 <= base_seed < 2 ** 64):
        raise ConfigError("key 'base_seed': must fit in 64 unsigned bits")
    threads = _get_int(cfg, "threads")
    if threads < 0:
        raise ConfigError("key 'threads': must be >= 0 (0 = available cores)")

    beta = None if cfg["beta"] == "auto" else _get_float(cfg, "beta")
    if beta is not None and beta <= 0:
        raise ConfigError("key 'beta': must be positive (or 'auto')")

    plan = ExperimentPlan(
        grid=grid, field_spec=field_spec, initial_state=phi,
        observable=observable, t_final=t_final, dt=dt,
        particle_counts=counts, samples=samples, base_seed=base_seed,
    )
    resolved = dict(cfg)
    resolved["dt"] = repr(dt)
    options = RunOptions(threads=threads, output_dir=cfg["output_dir"],
                         beta=beta, resolved=resolved)
    return plan, options


def format_resolved(resolved: dict[str, str]) -> str:
    keys = [k for k in _DEFAULTS if k in resolved]
    keys += [k for k in resolved if k not in _DEFAULTS]
    return "\n".join(f"{k} = {resolved[k]}" for k in keys) + "\n"
