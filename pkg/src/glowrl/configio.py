"""Flat key-value configuration format with one section per concern.

Grammar (exact): INI as parsed by configparser with interpolation disabled.
Section names and keys are lowercase; values are written with repr-style
shortest decimals for floats, ``true``/``false`` for booleans, ``none`` for
absent optionals, comma-separated lists for tuples.  Unknown sections or keys
are errors: configs fail fast instead of silently ignoring typos.

Sections:
    [run]    name, kind, seed, agents, budget, workers, record_every,
             out_dir, metrics, max_episode_steps
    [agent]  alpha, eta, kappa, controls, hamiltonian_case, layer_scale,
             reset_glow, gradient_mode, fd_delta
    [env]    variant, reward_correct, reward_wrong, p_coh, reversal_cycle,
             color_introduction_cycle, basis_mode
    [grid]   obstacle, start, goal, goal_reward, boundary_penalty,
             random_start
"""

from __future__ import annotations

import configparser
from dataclasses import fields

from .runner import ExperimentConfig

_SCHEMA = {
    "run": ("name", "kind", "seed", "agents", "budget", "workers",
            "record_every", "out_dir", "metrics", "max_episode_steps"),
    "agent": ("alpha", "eta", "kappa", "controls", "hamiltonian_case",
              "layer_scale", "reset_glow", "gradient_mode", "fd_delta"),
    "env": ("variant", "reward_correct", "reward_wrong", "p_coh",
            "reversal_cycle", "color_introduction_cycle", "basis_mode"),
    "grid": ("obstacle", "start", "goal", "goal_reward", "boundary_penalty",
             "random_start"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _parse_value(key: str, text: str):
    text = text.strip()
    if text == "none":
        return None
    if key in ("reset_glow", "random_start"):
        if text not in ("true", "false"):
            raise ConfigError(f"{key} must be true or false, got {text!r}")
        return text == "true"
    if key in ("metrics",):
        return tuple(s.strip() for s in text.split(",") if s.strip())
    if key in ("obstacle", "start", "goal"):
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{key} must be 'row,col', got {text!r}")
        return (int(parts[0]), int(parts[1]))
    if key in ("seed", "agents", "budget", "workers", "record_every",
               "controls", "reversal_cycle", "color_introduction_cycle",
               "max_episode_steps"):
        return int(text)
    if key in ("alpha", "eta", "kappa", "layer_scale", "fd_delta",
               "reward_correct", "reward_wrong", "p_coh", "goal_reward",
               "boundary_penalty"):
        return float(text)
    return text


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {_format_value(getattr(cfg, key))}")
        lines.append("")
    return "\n".join(lines)


def config_from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section == "ledger":
            continue  # result metadata written into manifests; not config
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = _parse_value(key, raw)
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def write_config(cfg: ExperimentConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_text(cfg))


def read_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_text(fh.read())
