"""Experiment configuration: flat key=value files plus CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .sched import POLICIES

# LTE bandwidth (MHz) -> PRBs per TTI.
BANDWIDTH_TO_PRB = {1.4: 7, 3.0: 15, 10.0: 50}

DEFAULT_FRAME_VAR_CAP = 2000
DEFAULT_TTI_VAR_CAP = 600


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    bandwidth_mhz: float = 3.0
    num_data: int = 5
    volte_sweep: tuple[int, ...] = (0, 4, 8, 12)
    policies: tuple[str, ...] = ("heuristic", "heuristic_pf", "baseline")
    runs: int = 30
    seed: int = 1
    gamma: float = 0.9
    frames: int = 1  # frames per run; PF averages persist across them
    tx_power: float = 1.0
    noise_power: float = 5e-12
    cell_radius_m: float = 288.0
    pathloss_exponent: float = 3.8
    strict_pseudocode: bool = False
    per_tti_fading: bool = False
    frame_var_cap: int = DEFAULT_FRAME_VAR_CAP
    tti_var_cap: int = DEFAULT_TTI_VAR_CAP
    time_limit: float = 30.0  # seconds per exact frame/TTI solve

    @property
    def num_prb(self) -> int:
        return BANDWIDTH_TO_PRB[self.bandwidth_mhz]

    def validate(self) -> "ExperimentConfig":
        if self.bandwidth_mhz not in BANDWIDTH_TO_PRB:
            raise ConfigError(
                f"bandwidth must be one of {sorted(BANDWIDTH_TO_PRB)} MHz, got {self.bandwidth_mhz}"
            )
        if self.num_data < 0:
            raise ConfigError("num_data must be nonnegative")
        if any(u < 0 for u in self.volte_sweep) or not self.volte_sweep:
            raise ConfigError("volte_sweep must be a nonempty list of nonnegative counts")
        for p in self.policies:
            if p not in POLICIES:
                raise ConfigError(f"unknown policy {p!r}; expected one of {POLICIES}")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if self.frames < 1:
            raise ConfigError("frames must be positive")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.tx_power <= 0 or self.noise_power <= 0:
            raise ConfigError("powers must be positive")
        if self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")
        return self


_BOOL_KEYS = {"strict_pseudocode", "per_tti_fading"}
_INT_KEYS = {"num_data", "runs", "seed", "frames", "frame_var_cap", "tti_var_cap"}
_FLOAT_KEYS = {
    "bandwidth_mhz",
    "gamma",
    "tx_power",
    "noise_power",
    "cell_radius_m",
    "pathloss_exponent",
    "time_limit",
}


def _parse_bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def parse_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Read key=value lines ('#' comments allowed), then apply overrides."""
    values: dict = {}
    if path is not None:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                values[key] = _coerce(key, val)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig()
    known = {f for f in cfg.__dataclass_fields__}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **values).validate()


def _coerce(key: str, val: str):
    try:
        if key in _BOOL_KEYS:
            return _parse_bool(val)
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
        if key == "volte_sweep":
            return tuple(int(s) for s in val.split(",") if s.strip())
        if key == "policies":
            return tuple(s.strip() for s in val.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return val  # unknown keys are rejected later with a clearer message
