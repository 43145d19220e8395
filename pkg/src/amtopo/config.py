"""Run configuration: flat key-value files with per-case defaults.

Every named case ships defaults matching the reference parameter sets;
a config file only has to state the case and any overrides. Unknown
keys are rejected rather than ignored so typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    case: str = "cantilever2d"
    formulation: str = "standard"
    l: int = 1
    w0: float = 1.0
    Lx: float = 12.0
    Ly: float = 6.0
    Lz: float = 0.0          # 0 means 2D
    nx: int = 240
    ny: int = 120
    nz: int = 0
    vbar: float = 0.5
    r_bar: float = 1.25
    beta_min: float = 1.0
    beta_max: float = 32.0
    beta_double_every: int = 100
    gamma_threshold: float = 0.5
    E0: float = 1.0
    E_min: float = 1e-9
    nu: float = 0.3
    q_main: float = 5.0
    q_sub: float = 5.0
    kappa_min: float = 1e-9
    g: float = 9.81
    T: float = 1.0
    q_source: float = 1.0
    load: float = 1.0
    tol: float = 1e-2
    max_iterations: int = 2000
    move_limit: float = 0.2
    main_solver: str = ""    # "" = auto: direct in 2D, cg in 3D
    sub_solver: str = ""
    cg_tol: float = 1e-8
    log_every: int = 0
    out_dir: str = "out"
    pup_angle: float = 45.0
    pup_max: float = 0.5
    grayness_max: float = 0.6

    @property
    def dim(self) -> int:
        return 3 if self.nz > 0 else 2

    @property
    def extents(self) -> tuple:
        if self.dim == 2:
            return (self.Lx, self.Ly)
        return (self.Lx, self.Ly, self.Lz)

    @property
    def elems(self) -> tuple:
        if self.dim == 2:
            return (self.nx, self.ny)
        return (self.nx, self.ny, self.nz)


CASE_DEFAULTS = {
    "cantilever2d": dict(
        Lx=12.0, Ly=6.0, Lz=0.0, nx=240, ny=120, nz=0,
        vbar=0.5, r_bar=1.25, beta_min=1.0, beta_max=32.0,
        beta_double_every=100,
    ),
    "mbb2d": dict(
        Lx=160.0, Ly=80.0, Lz=0.0, nx=320, ny=160, nz=0,
        vbar=0.6, r_bar=2.40, beta_min=1.0, beta_max=4.0,
        beta_double_every=100,
    ),
    "beam3d": dict(
        Lx=12.0, Ly=6.0, Lz=6.0, nx=60, ny=30, nz=30,
        vbar=1.0 / 12.0, r_bar=0.50, beta_min=1.0, beta_max=4.0,
        beta_double_every=50,
    ),
    "custom": dict(),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"l", "nx", "ny", "nz", "beta_double_every", "max_iterations",
             "log_every"}
_STR_KEYS = {"case", "formulation", "main_solver", "sub_solver", "out_dir"}


def _coerce(key: str, raw: str, lineno: int):
    if key in _STR_KEYS:
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot parse value {raw!r} for key {key!r}"
        ) from None


def parse_config_text(text: str, overrides: dict = None) -> RunConfig:
    """Parse 'key = value' lines; '#' starts a comment."""
    seen: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        seen[key] = _coerce(key, raw, lineno)
    if overrides:
        for key, value in overrides.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown key {key!r}")
            seen[key] = value
    case = seen.get("case", RunConfig.case)
    if case not in CASE_DEFAULTS:
        raise ConfigError(
            f"unknown case {case!r}; expected one of {sorted(CASE_DEFAULTS)}"
        )
    merged = dict(CASE_DEFAULTS[case])
    merged["case"] = case
    # explicit keys win over case defaults
    merged.update({k: v for k, v in seen.items() if k != "case"})
    cfg = replace(RunConfig(), **merged)
    validate_config(cfg)
    return cfg


def load_config(path, overrides: dict = None) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), overrides)


def validate_config(cfg: RunConfig) -> None:
    from .process import FORMULATIONS

    if cfg.formulation not in FORMULATIONS:
        raise ConfigError(f"unknown formulation {cfg.formulation!r}")
    if (cfg.nz > 0) != (cfg.Lz > 0.0):
        raise ConfigError("nz and Lz must both be positive for 3D "
                          "or both zero for 2D")
    if cfg.nz < 0 or cfg.Lz < 0.0:
        raise ConfigError("nz and Lz cannot be negative")
    rows = cfg.elems[-1]
    if cfg.formulation in ("self_weight", "thermal") and rows % cfg.l != 0:
        raise ConfigError(
            f"layer count {cfg.l} does not divide the {rows} element rows "
            "along the build direction"
        )
    if not 0.0 < cfg.w0 <= 1.0:
        raise ConfigError("w0 must lie in (0, 1]")
    if cfg.main_solver not in ("", "direct", "cg"):
        raise ConfigError(f"unknown main_solver {cfg.main_solver!r}")
    if cfg.sub_solver not in ("", "direct", "cg"):
        raise ConfigError(f"unknown sub_solver {cfg.sub_solver!r}")


def config_echo(cfg: RunConfig) -> str:
    """Canonical text form; parsing it back reproduces the config."""
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"
