"""Experiment orchestration: seeded ensembles, figure presets, CSV emission.

Every run is a pure function of (config, master seed): per-agent randomness
comes from counter-derived streams (stream 0 is reserved for shared draws
like the target unitary, stream 1+i belongs to agent i), agents are combined
in index order, and workers only parallelize over agents, so the output bytes
do not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .agent import GlowAgent
from .envs import (
    GridWorld,
    grid_percept,
    grid_povm,
    grid_reset,
    grid_step,
    invasion_percept,
    invasion_step,
    make_invasion,
)
from .estimators import fd_gradient_expectation, probability_evaluator
from .linalg import RngStream, random_unitary
from .memory import (
    HamiltonianStack,
    build_snapshot,
    case_I_hamiltonians,
    case_II_hamiltonians,
    rank_decompose,
    schmidt_orthonormalize,
)
from .metrics import avg_fidelity, distance_sq

INVASION_METRICS = ("reward", "preward", "fidelity", "distance", "hnorm")
GRID_METRICS = ("length",)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; (config, seed) fully determines the output."""

    name: str = "custom"
    kind: str = "invasion"  # 'invasion' | 'grid'
    seed: int = 0
    agents: int = 100
    budget: int = 10_000  # external cycles (invasion) or episodes (grid)
    workers: int = 1
    record_every: int = 0  # 0 = auto (~400 points); grid records every episode
    out_dir: str = "out"
    metrics: tuple = ("reward", "preward")
    max_episode_steps: int = 100_000
    # agent
    alpha: float = 1e-3
    eta: float = 1.0
    kappa: float = 0.0
    controls: int = 16
    hamiltonian_case: str = "I"  # 'I' | 'II' | 'I_schmidt'
    layer_scale: float = 1.0
    reset_glow: bool = True
    gradient_mode: str = "analytic"  # 'analytic' | 'fd_expectation'
    fd_delta: float = 1e-4
    # invasion environment
    variant: str = "two_symbol"
    reward_correct: float = 1.0
    reward_wrong: float = -1.0
    p_coh: float = 1.0
    reversal_cycle: int | None = None
    color_introduction_cycle: int | None = None
    basis_mode: str = "single_onb"
    # grid environment
    obstacle: tuple = (2, 1)
    start: tuple = (2, 0)
    goal: tuple = (2, 2)
    goal_reward: float = 1.0
    boundary_penalty: float | None = None
    random_start: bool = False

    def __post_init__(self):
        if self.kind not in ("invasion", "grid"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.agents <= 0:
            raise ValueError("ensemble size must be positive")
        if self.workers <= 0:
            raise ValueError("worker count must be positive")
        if self.gradient_mode not in ("analytic", "fd_expectation"):
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")
        allowed = INVASION_METRICS if self.kind == "invasion" else GRID_METRICS
        for m in self.metrics:
            if m not in allowed:
                raise ValueError(f"metric {m!r} not available for kind {self.kind!r}")


@dataclass
class CurveTable:
    """Ensemble aggregates along the run axis, ready for CSV emission."""

    name: str
    x_name: str
    xs: np.ndarray
    metrics: dict  # name -> (mean array, sem array)
    external_cycles: int = 0
    internal_cycles: int = 0
    config: ExperimentConfig | None = None
    per_agent: dict = field(default_factory=dict)  # name -> (agents, n_x) array


def record_points(budget: int, record_every: int) -> np.ndarray:
    """1-based cycle/episode indices at which metrics get recorded."""
    if record_every <= 0:
        record_every = max(1, budget // 400)
    pts = set(range(record_every, budget + 1, record_every))
    pts.update((1, budget))
    return np.array(sorted(pts), dtype=np.int64)


def _env_dim(cfg: ExperimentConfig) -> int:
    if cfg.kind == "grid":
        return 32
    return 8 if cfg.variant == "neverending_color" else 4


def _case_ii_dims(cfg: ExperimentConfig):
    if cfg.kind == "grid":
        return 8, 4
    if cfg.variant == "neverending_color":
        return 4, 2
    return 2, 2


def build_stack(cfg: ExperimentConfig, rng) -> HamiltonianStack:
    """Draw this agent's layer generators per the configured case and scale."""
    dim = _env_dim(cfg)
    if cfg.hamiltonian_case == "I":
        h1, h2 = case_I_hamiltonians(dim, rng)
    elif cfg.hamiltonian_case == "II":
        h1, h2 = case_II_hamiltonians(*_case_ii_dims(cfg), rng)
    elif cfg.hamiltonian_case == "I_schmidt":
        h1, h2 = schmidt_orthonormalize(*case_I_hamiltonians(dim, rng))
    else:
        raise ValueError(f"unknown hamiltonian case {cfg.hamiltonian_case!r}")
    if cfg.layer_scale != 1.0:
        h1 = h1 * cfg.layer_scale
        h2 = h2 * cfg.layer_scale
    return HamiltonianStack(dim=dim, ham1=h1, ham2=h2, n=cfg.controls)


def _shared_instance(cfg: ExperimentConfig):
    """Per-experiment draws shared by the whole ensemble, from stream 0.

    The task instance (target unitary where the variant has one, then the
    layer generators) is fixed once per experiment; per-agent streams only
    drive percepts, measurement sampling and exploration.  Every worker
    re-derives the same instance from the master seed.
    """
    setup = RngStream(cfg.seed, 0).generator()
    u_target = None
    if cfg.kind == "invasion" and cfg.variant in ("four_percept_4act", "four_percept_2act"):
        u_target = random_unitary(4, setup)
    stack = build_stack(cfg, setup)
    return u_target, stack


def _run_invasion_agent(cfg: ExperimentConfig, agent_index: int) -> dict:
    rng = RngStream(cfg.seed, 1 + agent_index).generator()
    u_target, stack = _shared_instance(cfg)
    env = make_invasion(
        cfg.variant,
        reward_correct=cfg.reward_correct,
        reward_wrong=cfg.reward_wrong,
        p_coh=cfg.p_coh,
        reversal_cycle=cfg.reversal_cycle,
        color_introduction_cycle=cfg.color_introduction_cycle,
        basis_mode=cfg.basis_mode,
        **({"u_target": u_target} if u_target is not None else {}),
    )
    agent = GlowAgent(stack, alpha=cfg.alpha, eta=cfg.eta, kappa=cfg.kappa)
    xs = record_points(cfg.budget, cfg.record_every)
    out = {m: np.empty(len(xs)) for m in cfg.metrics}
    internal = 0
    ptr = 0
    static_components = {}
    for t in range(cfg.budget):
        labels, rho, povm = invasion_percept(env, t, rng)
        components = None
        u_r = labels.get("basis_unitary")
        if u_r is not None:
            # conjugated basis states are rank one by construction
            col = 2 * labels["symbol"] + labels["color"]
            components = (np.ones(1), np.ascontiguousarray(u_r[:, [col]]))
        elif cfg.variant != "neverending_color":
            key = (labels["symbol"], labels.get("color"))
            components = static_components.get(key)
            if components is None:
                components = rank_decompose(rho)
                static_components[key] = components
        if cfg.reset_glow:
            agent.reset_episode()  # one cycle per episode in the invasion game
        if cfg.gradient_mode == "fd_expectation":
            probs = agent.policy_distribution(rho, povm)
            from .policy import sample_index

            idx = sample_index(probs, rng)
            action = povm.actions[idx]
            p_eval = probability_evaluator(stack, rho, povm, action)
            grad = fd_gradient_expectation(p_eval, agent.h, cfg.fd_delta)
            internal += stack.n + 1
            agent.observe_gradient(grad)
        else:
            action, probs = agent.step(rho, povm, rng, components=components)
        r = invasion_step(env, t, action, labels)
        agent.apply_reward(r)
        if ptr < len(xs) and t + 1 == xs[ptr]:
            _fill_invasion_metrics(cfg, env, agent, stack, t, labels, povm, probs, r, out, ptr)
            ptr += 1
    return {"metrics": out, "external": cfg.budget, "internal": internal}


def _fill_invasion_metrics(cfg, env, agent, stack, t, labels, povm, probs, r, out, ptr):
    snap = None
    for m in cfg.metrics:
        if m == "reward":
            val = r
        elif m == "preward":
            val = sum(
                p * invasion_step(env, t, a, labels)
                for a, p in zip(povm.actions, probs)
            )
        elif m == "hnorm":
            val = float(np.linalg.norm(agent.h))
        elif m in ("fidelity", "distance"):
            if env.u_target is None:
                raise ValueError(f"metric {m!r} needs a target unitary")
            if snap is None:
                snap = build_snapshot(stack, agent.h)
            val = (avg_fidelity if m == "fidelity" else distance_sq)(snap.U, env.u_target)
        else:
            raise ValueError(f"unknown invasion metric {m!r}")
        out[m][ptr] = val


def _run_grid_agent(cfg: ExperimentConfig, agent_index: int) -> dict:
    rng = RngStream(cfg.seed, 1 + agent_index).generator()
    gw = GridWorld(
        obstacle=cfg.obstacle,
        start=cfg.start,
        goal=cfg.goal,
        goal_reward=cfg.goal_reward,
        boundary_penalty=cfg.boundary_penalty,
        random_start=cfg.random_start,
    )
    _, stack = _shared_instance(cfg)
    agent = GlowAgent(stack, alpha=cfg.alpha, eta=cfg.eta, kappa=cfg.kappa)
    povm = grid_povm(gw)
    components = {
        cell: rank_decompose(grid_percept(gw, cell)) for cell in gw.free_cells
    }
    lengths = np.empty(cfg.budget, dtype=np.int64)
    external = 0
    for ep in range(cfg.budget):
        cell = grid_reset(gw, rng)
        if cfg.reset_glow:
            agent.reset_episode()
        steps = 0
        while True:
            action, _ = agent.step(None, povm, rng, components=components[cell], key=cell)
            cell, r, terminal, _ = grid_step(gw, cell, action)
            agent.apply_reward(r)
            steps += 1
            if terminal or steps >= cfg.max_episode_steps:
                break
        lengths[ep] = steps
        external += steps
    return {"metrics": {"length": lengths.astype(float)}, "external": external,
            "internal": 0, "h": agent.h}


def _agent_runner(args):
    cfg, index = args
    fn = _run_invasion_agent if cfg.kind == "invasion" else _run_grid_agent
    return fn(cfg, index)


def run_ensemble(cfg: ExperimentConfig) -> CurveTable:
    """Run the configured ensemble and aggregate per-record-point statistics.

    Agents execute independently on derived streams; results are combined in
    agent-index order so the aggregate is identical for any worker count.
    """
    jobs = [(cfg, i) for i in range(cfg.agents)]
    if cfg.workers > 1 and cfg.agents > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_agent_runner, jobs))
    else:
        results = [_agent_runner(job) for job in jobs]
    if cfg.kind == "invasion":
        xs = record_points(cfg.budget, cfg.record_every)
        x_name = "cycle"
    else:
        xs = np.arange(1, cfg.budget + 1, dtype=np.int64)
        x_name = "episode"
    metrics = {}
    per_agent = {}
    for m in cfg.metrics:
        stacked = np.stack([res["metrics"][m] for res in results])
        mean = stacked.mean(axis=0)
        if stacked.shape[0] > 1:
            sem = stacked.std(axis=0, ddof=1) / np.sqrt(stacked.shape[0])
        else:
            sem = np.zeros_like(mean)
        metrics[m] = (mean, sem)
        per_agent[m] = stacked
    return CurveTable(
        name=cfg.name,
        x_name=x_name,
        xs=xs,
        metrics=metrics,
        external_cycles=int(sum(res["external"] for res in results)),
        internal_cycles=int(sum(res["internal"] for res in results)),
        config=cfg,
        per_agent=per_agent,
    )


def glow_tail_average(episode_lengths, window: int = 500) -> float:
    """Mean episode length over the final window (the summary statistic)."""
    lengths = np.asarray(episode_lengths, dtype=float)
    if lengths.shape[-1] < window:
        raise ValueError(f"need at least {window} episodes, got {lengths.shape[-1]}")
    return float(lengths[..., -window:].mean())


def emit_csv(curve: CurveTable, path):
    """Write one curve: header row, x column, then mean/sem per metric.

    Floats are written with repr (shortest round-trip decimals); rerunning
    the same (config, seed) reproduces the file byte for byte.
    """
    names = list(curve.metrics)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join([curve.x_name] + [f"{m}_{s}" for m in names for s in ("mean", "sem")]))
            fh.write("\n")
            for i, x in enumerate(curve.xs):
                cells = [str(int(x))]
                for m in names:
                    mean, sem = curve.metrics[m]
                    cells.append(repr(float(mean[i])))
                    cells.append(repr(float(sem[i])))
                fh.write(",".join(cells))
                fh.write("\n")
    except OSError as exc:
        raise IOError(f"cannot write curve to {path}: {exc}") from exc


def write_manifest(curve: CurveTable, path):
    from .configio import config_to_text

    text = config_to_text(curve.config)
    text += (
        "[ledger]\n"
        f"external_cycles = {curve.external_cycles}\n"
        f"internal_cycles = {curve.internal_cycles}\n"
    )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOError(f"cannot write manifest to {path}: {exc}") from exc


def run_and_emit(cfg: ExperimentConfig, out_dir=None) -> list:
    """Run one config and write <name>.csv plus its manifest; returns paths."""
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    curve = run_ensemble(cfg)
    csv_path = os.path.join(out_dir, f"{cfg.name}.csv")
    emit_csv(curve, csv_path)
    manifest_path = os.path.join(out_dir, f"{cfg.name}.manifest.cfg")
    write_manifest(curve, manifest_path)
    return [csv_path, manifest_path]


def grid_policy_from_config(cfg: ExperimentConfig):
    """Train one grid agent and tabulate its final policy over the free cells."""
    if cfg.kind != "grid":
        raise ValueError("policy tables are a grid-world feature")
    result = _run_grid_agent(cfg, 0)
    gw = GridWorld(
        obstacle=cfg.obstacle,
        start=cfg.start,
        goal=cfg.goal,
        goal_reward=cfg.goal_reward,
        boundary_penalty=cfg.boundary_penalty,
        random_start=cfg.random_start,
    )
    _, stack = _shared_instance(cfg)
    agent = GlowAgent(stack, alpha=cfg.alpha, eta=cfg.eta, kappa=cfg.kappa)
    agent.h = result["h"]
    povm = grid_povm(gw)
    table = np.stack([
        agent.policy_distribution(grid_percept(gw, cell), povm)
        for cell in gw.free_cells
    ])
    return gw, table


def run_tail_sweep(preset, base: ExperimentConfig) -> list:
    """fig12-style summary: last-window episode-length averages over a sweep.

    Each curve of the preset is a full grid run; its per-agent tail averages
    are reduced to mean and sem, grouped into one CSV per reward scheme with
    the glow parameter as the x column.
    """
    out_dir = base.out_dir
    os.makedirs(out_dir, exist_ok=True)
    groups = {}
    ledgers = {}
    for curve_name, overrides in preset.curves:
        cfg = replace(base, name=curve_name, **overrides)
        curve = run_ensemble(cfg)
        tails = [glow_tail_average(lengths) for lengths in curve.per_agent["length"]]
        tails = np.asarray(tails)
        mean = float(tails.mean())
        sem = float(tails.std(ddof=1) / np.sqrt(len(tails))) if len(tails) > 1 else 0.0
        scheme = "penalty" if cfg.boundary_penalty is not None else "goal"
        groups.setdefault(scheme, []).append((cfg.eta, mean, sem))
        led = ledgers.setdefault(scheme, [0, 0, cfg])
        led[0] += curve.external_cycles
        led[1] += curve.internal_cycles
    files = []
    for scheme, rows in groups.items():
        path = os.path.join(out_dir, f"{preset.name}_{scheme}.csv")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("eta,tail_mean,tail_sem\n")
                for eta, mean, sem in rows:
                    fh.write(f"{eta!r},{mean!r},{sem!r}\n")
        except OSError as exc:
            raise IOError(f"cannot write sweep to {path}: {exc}") from exc
        external, internal, cfg = ledgers[scheme]
        curve_stub = CurveTable(name=f"{preset.name}_{scheme}", x_name="eta",
                                xs=np.array([], dtype=np.int64), metrics={},
                                external_cycles=external, internal_cycles=internal,
                                config=cfg)
        manifest = os.path.join(out_dir, f"{preset.name}_{scheme}.manifest.cfg")
        write_manifest(curve_stub, manifest)
        files += [path, manifest]
    return files
