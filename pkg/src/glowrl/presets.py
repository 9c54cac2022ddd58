"""Figure presets: named experiment configurations matching the published
learning-curve setups, at desk-scale ensemble defaults (paper-scale counts go
through --agents / --budget overrides).

Grid-world presets deserve two notes.  First, the published runs never state
the number of memory controls; 64 alternating case-I layers on the
32-dimensional cell/action space are the default here, exposed as a config
knob.  Second, the publication leaves the magnitude of its random layer
generators unstated, and the learning-rate/penalty combination (alpha = 0.1,
r = -10) only sits in the perturbative regime if the generators are much
smaller than the sqrt(dim)-normalized draws used elsewhere in this package;
``GRID_LAYER_SCALE`` rescales the grid stacks accordingly.  This is a pure
change of control units (h and H enter only through their product), chosen
once so the published hyperparameters reproduce the published behavior, and
it is a config knob too.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .runner import ExperimentConfig

GRID_LAYER_SCALE = 0.4  # see module docstring; pinned by the glow-benefit runs
GRID_CONTROLS = 128

# Tensor-structured (case II) generators run at this scale.  The published
# runs report machine-precision convergence of the 4-percept game within
# 5e3 cycles at learning rate 1e-2, which pins the generator magnitude at
# roughly 2.25x the sqrt(dim)-normalized ensemble; a config knob like the
# grid scale above.
INVASION_CASE_II_SCALE = 2.25


@dataclass(frozen=True)
class Preset:
    """A base config plus the per-curve overrides that make up one figure."""

    name: str
    base: ExperimentConfig
    curves: tuple  # ((curve_name, {field: value}), ...)
    tail_sweep: bool = False  # fig12-style: emit tail averages over a sweep

    def curve_configs(self):
        for curve_name, overrides in self.curves:
            yield replace(self.base, name=curve_name, **overrides)


def _invasion_base(**kw) -> ExperimentConfig:
    defaults = dict(
        kind="invasion",
        agents=100,
        budget=10_000,
        metrics=("reward", "preward"),
        eta=1.0,
        kappa=0.0,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def _grid_base(**kw) -> ExperimentConfig:
    defaults = dict(
        kind="grid",
        agents=1,
        budget=10_000,
        metrics=("length",),
        alpha=0.1,
        kappa=0.0,
        controls=GRID_CONTROLS,
        hamiltonian_case="I",
        layer_scale=GRID_LAYER_SCALE,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def _build_presets() -> dict:
    presets = {}

    # 2-symbol invasion game: learning speed vs number of controls
    base = _invasion_base(name="fig5a", variant="two_symbol", alpha=1e-3,
                          reward_correct=1.0, reward_wrong=-1.0, p_coh=1.0,
                          hamiltonian_case="I", controls=16)
    presets["fig5a"] = Preset(
        name="fig5a", base=base,
        curves=tuple((f"fig5a_controls{n}", {"controls": n}) for n in (1, 2, 3, 4, 8, 16)),
    )

    # symbol-meaning reversal at 4e3 cycles, action register purity sweep
    base = _invasion_base(name="fig5b", variant="two_symbol", alpha=1e-3,
                          controls=16, reversal_cycle=4000, hamiltonian_case="I")
    presets["fig5b"] = Preset(
        name="fig5b", base=base,
        curves=tuple(
            (f"fig5b_pcoh{str(p).replace('.', 'p')}", {"p_coh": p})
            for p in (0.0, 0.25, 0.5, 0.75, 1.0)
        ),
    )

    # tensor-structured generators impede learning at this figure's scale;
    # the published 4-percept runs imply a larger generator magnitude (see
    # INVASION_CASE_II_SCALE), which would erase the contrast shown here
    base = _invasion_base(name="fig5c", variant="two_symbol", alpha=1e-3,
                          controls=32, hamiltonian_case="II")
    presets["fig5c"] = Preset(name="fig5c", base=base,
                              curves=(("fig5c_controls32", {}),))

    # 4-percept game, 4 actions, meaning reversal at 5e3 cycles
    base = _invasion_base(name="fig7a", variant="four_percept_4act", alpha=1e-2,
                          reward_correct=1.0, reward_wrong=-10.0,
                          reversal_cycle=5000, hamiltonian_case="II", controls=16,
                          layer_scale=INVASION_CASE_II_SCALE)
    presets["fig7a"] = Preset(
        name="fig7a", base=base,
        curves=tuple((f"fig7a_controls{n}", {"controls": n})
                     for n in (1, 2, 3, 4, 8, 16, 32)),
    )

    # 4-percept game, 2 actions, second color introduced at 5e3 cycles
    base = _invasion_base(name="fig7b", variant="four_percept_2act", alpha=1e-2,
                          reward_correct=1.0, reward_wrong=-10.0,
                          color_introduction_cycle=5000, hamiltonian_case="II",
                          controls=16, layer_scale=INVASION_CASE_II_SCALE)
    presets["fig7b"] = Preset(
        name="fig7b", base=base,
        curves=tuple((f"fig7b_controls{n}", {"controls": n})
                     for n in (1, 2, 3, 4, 8, 16, 32)),
    )

    # single vs per-cycle-random input bases; track fidelity and distance
    base = _invasion_base(name="fig8", variant="four_percept_4act", alpha=1e-2,
                          reward_correct=1.0, reward_wrong=-10.0,
                          hamiltonian_case="II", controls=16, budget=20_000,
                          layer_scale=INVASION_CASE_II_SCALE,
                          metrics=("reward", "preward", "fidelity", "distance"))
    presets["fig8"] = Preset(
        name="fig8", base=base,
        curves=(
            ("fig8_single_onb", {"basis_mode": "single_onb"}),
            ("fig8_multi_onb", {"basis_mode": "random_onb_per_cycle"}),
        ),
    )

    # neverending colors: single agent, dim 8, Schmidt-orthonormalized pair
    base = _invasion_base(name="fig9", variant="neverending_color", alpha=1e-2,
                          reward_correct=1.0, reward_wrong=-10.0, agents=1,
                          controls=64, hamiltonian_case="I_schmidt",
                          budget=200_000, metrics=("reward", "preward", "hnorm"))
    presets["fig9"] = Preset(name="fig9", base=base, curves=(("fig9", {}),))

    # grid world: glow on/off under the two reward schemes
    grid_curves = {
        "fig11a": dict(eta=1.0, boundary_penalty=None),
        "fig11b": dict(eta=0.01, boundary_penalty=None),
        "fig11c": dict(eta=1.0, boundary_penalty=-10.0),
        "fig11d": dict(eta=0.7, boundary_penalty=-10.0),
        "fig11e": dict(eta=0.5, boundary_penalty=-10.0),
        "fig11f": dict(eta=1.0, boundary_penalty=None, goal_reward=0.0,
                       max_episode_steps=1_000_000),
    }
    for name, overrides in grid_curves.items():
        base = _grid_base(name=name, **overrides)
        presets[name] = Preset(name=name, base=base, curves=((name, {}),))

    # the policy-table figure trains the fig11d agent
    base = _grid_base(name="fig10", eta=0.7, boundary_penalty=-10.0)
    presets["fig10"] = Preset(name="fig10", base=base, curves=(("fig10", {}),))

    # tail-average summary over the glow parameter, both reward schemes
    base = _grid_base(name="fig12", budget=10_000)
    etas = (1.0, 0.9, 0.7, 0.5, 0.3)
    curves = []
    for eta in etas:
        curves.append((f"fig12_goal_eta{str(eta).replace('.', 'p')}",
                       {"eta": eta, "boundary_penalty": None}))
    for eta in etas:
        curves.append((f"fig12_penalty_eta{str(eta).replace('.', 'p')}",
                       {"eta": eta, "boundary_penalty": -10.0}))
    presets["fig12"] = Preset(name="fig12", base=base, curves=tuple(curves),
                              tail_sweep=True)

    return presets


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; see list-presets") from None


def preset_catalog():
    """All (name, base config) pairs, alphabetically."""
    return [(name, preset.base) for name, preset in sorted(PRESETS.items())]
