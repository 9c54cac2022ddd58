"""Task suite: the invasion-game family and the 3x3 grid world.

Both expose the same episodic contract: a percept (with its quantum encoding
and the cycle's measurement), an action taken by the agent, and a reward plus
terminal flag coming back.

Grid layout
-----------
The published figure fixes the layout only through derived facts: 8 free
cells, shortest start-to-goal path of exactly 4 moves, a uniform random walk
from S needing ~54 steps on average, and an optimal policy with two-way ties
("double arrows") in the upper-left and upper-middle cells.  Enumerating all
504 (obstacle, start, goal) placements, the unique layout family matching the
path length and tie pattern puts the obstacle at bottom-middle, S at
bottom-left and G at bottom-right; its exact expected hitting time is
160/3 = 53.33, of which the published 54.1 is a finite-sample estimate
(10^4 walks, standard error ~0.45).  ``enumerate_layouts`` reproduces the
search; ``GridWorld()`` defaults to the selected layout and every position is
a constructor argument for anyone wanting to override it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .linalg import random_mixed_qubit, random_unitary
from .policy import (
    PovmSet,
    basis_projector,
    encode_invasion_2x2,
    encode_invasion_4,
    encode_neverending,
    kron,
    plus_state,
    povm_action_subsystem,
    povm_rotated,
    rotate_povm,
)

INVASION_VARIANTS = ("two_symbol", "four_percept_4act", "four_percept_2act",
                     "neverending_color")

# Action order everywhere in the grid world: right, down, left, up.
GRID_MOVES = ((0, 1), (1, 0), (0, -1), (-1, 0))
GRID_ACTION_NAMES = ("right", "down", "left", "up")


@dataclass(frozen=True)
class InvasionConfig:
    """One invasion-game setup; build via ``make_invasion``.

    reversal_cycle: from this external cycle on, symbol j and color k are
    read as 1-j and 1-k when deciding the correct action.
    color_introduction_cycle: before this cycle only color 0 is presented.
    basis_mode 'random_onb_per_cycle' conjugates the percept state by a fresh
    Haar unitary U_R each cycle and the POVM by U_T U_R U_T^dag.
    """

    variant: str
    reward_correct: float = 1.0
    reward_wrong: float = -1.0
    p_coh: float = 1.0
    reversal_cycle: int | None = None
    color_introduction_cycle: int | None = None
    basis_mode: str = "single_onb"
    u_target: np.ndarray | None = None
    povm: PovmSet = field(init=False, repr=False, compare=False)
    _states: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in INVASION_VARIANTS:
            raise ValueError(f"unknown invasion variant {self.variant!r}")
        if self.basis_mode not in ("single_onb", "random_onb_per_cycle"):
            raise ValueError(f"unknown basis mode {self.basis_mode!r}")
        states = {}
        if self.variant == "two_symbol":
            povm = povm_action_subsystem(2, 2)
            states = {s: encode_invasion_2x2(s, self.p_coh) for s in (0, 1)}
        elif self.variant == "four_percept_4act":
            povm = povm_rotated(self._target(), merge_colors=False)
        elif self.variant == "four_percept_2act":
            povm = povm_rotated(self._target(), merge_colors=True)
        else:  # neverending_color: symbol x color x action, dim 8
            povm = povm_action_subsystem(4, 2)
        if self.variant in ("four_percept_4act", "four_percept_2act"):
            states = {(j, k): encode_invasion_4(j, k) for j in (0, 1) for k in (0, 1)}
        object.__setattr__(self, "povm", povm)
        object.__setattr__(self, "_states", states)

    def _target(self) -> np.ndarray:
        if self.u_target is None:
            raise ValueError(f"variant {self.variant!r} needs a target unitary")
        return self.u_target

    @property
    def dim(self) -> int:
        return 8 if self.variant == "neverending_color" else 4


def make_invasion(variant: str, rng=None, **kwargs) -> InvasionConfig:
    """Construct a config, drawing the target unitary where the variant needs one."""
    if variant in ("four_percept_4act", "four_percept_2act") and "u_target" not in kwargs:
        if rng is None:
            raise ValueError("need an rng to draw the target unitary")
        kwargs["u_target"] = random_unitary(4, rng)
    return InvasionConfig(variant=variant, **kwargs)


def _reversed_at(cfg: InvasionConfig, cycle: int) -> bool:
    return cfg.reversal_cycle is not None and cycle >= cfg.reversal_cycle


def invasion_percept(cfg: InvasionConfig, cycle: int, rng):
    """Draw the cycle's percept; return (labels, encoded state, measurement).

    labels is a dict carrying the classical percept ('symbol', plus 'color'
    where the variant has one); the POVM is per-cycle because the random-ONB
    mode rotates it along with the state.
    """
    labels = {"symbol": int(rng.integers(2))}
    povm = cfg.povm
    if cfg.variant == "two_symbol":
        rho = cfg._states[labels["symbol"]]
    elif cfg.variant in ("four_percept_4act", "four_percept_2act"):
        if cfg.color_introduction_cycle is not None and cycle < cfg.color_introduction_cycle:
            labels["color"] = 0
        else:
            labels["color"] = int(rng.integers(2))
        rho = cfg._states[(labels["symbol"], labels["color"])]
        if cfg.basis_mode == "random_onb_per_cycle":
            u_r = random_unitary(4, rng)
            labels["basis_unitary"] = u_r
            rho = u_r @ rho @ u_r.conj().T
            w = cfg.u_target @ u_r @ cfg.u_target.conj().T
            povm = rotate_povm(povm, w)
    else:  # neverending_color
        labels["color_state"] = random_mixed_qubit(rng)
        rho = encode_neverending(labels["symbol"], labels["color_state"])
    return labels, rho, povm


def invasion_step(cfg: InvasionConfig, cycle: int, action, labels) -> float:
    """Reward for the chosen action under the cycle's (possibly reversed) rules."""
    j = labels["symbol"]
    if cfg.variant == "two_symbol":
        correct = (1 - j) if _reversed_at(cfg, cycle) else j
        return cfg.reward_correct if action == correct else cfg.reward_wrong
    if cfg.variant == "four_percept_4act":
        k = labels["color"]
        if _reversed_at(cfg, cycle):
            j, k = 1 - j, 1 - k
        return cfg.reward_correct if action == (j, k) else cfg.reward_wrong
    if cfg.variant == "four_percept_2act":
        correct = (1 - j) if _reversed_at(cfg, cycle) else j
        return cfg.reward_correct if action == correct else cfg.reward_wrong
    # neverending_color: the color is irrelevant by design
    return cfg.reward_correct if action == j else cfg.reward_wrong


@dataclass(frozen=True)
class GridWorld:
    """3x3 grid with one obstacle; blocked moves leave the position unchanged."""

    width: int = 3
    height: int = 3
    obstacle: tuple = (2, 1)
    start: tuple = (2, 0)
    goal: tuple = (2, 2)
    goal_reward: float = 1.0
    boundary_penalty: float | None = None
    random_start: bool = False

    def __post_init__(self):
        cells = {self.obstacle, self.start, self.goal}
        if len(cells) != 3:
            raise ValueError("obstacle, start and goal must be distinct")
        for r, c in cells:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValueError("cell outside the grid")

    @property
    def free_cells(self) -> tuple:
        return tuple(
            (r, c)
            for r in range(self.height)
            for c in range(self.width)
            if (r, c) != self.obstacle
        )

    def cell_index(self, cell) -> int:
        return self.free_cells.index(tuple(cell))


def grid_reset(gw: GridWorld, rng=None):
    """Start cell for a new episode: S, or a uniform free non-goal cell."""
    if not gw.random_start:
        return gw.start
    eligible = [c for c in gw.free_cells if c != gw.goal]
    return eligible[int(rng.integers(len(eligible)))]


def grid_step(gw: GridWorld, cell, action: int):
    """Apply one move; returns (next_cell, reward, terminal, hit_boundary)."""
    r, c = cell
    dr, dc = GRID_MOVES[action]
    nr, nc = r + dr, c + dc
    blocked = not (0 <= nr < gw.height and 0 <= nc < gw.width) or (nr, nc) == gw.obstacle
    nxt = cell if blocked else (nr, nc)
    reward = 0.0
    if blocked and gw.boundary_penalty is not None:
        reward = gw.boundary_penalty
    terminal = nxt == gw.goal
    if terminal:
        reward = gw.goal_reward
    return nxt, reward, terminal, blocked


def grid_percept(gw: GridWorld, cell) -> np.ndarray:
    """Encode a cell as |cell><cell| (x) coherent action register (dim 32)."""
    n_cells = len(gw.free_cells)
    psi_a = plus_state(len(GRID_MOVES))
    rho_a = np.outer(psi_a, psi_a.conj())
    return kron(basis_projector(n_cells, gw.cell_index(cell)), rho_a)


def grid_povm(gw: GridWorld) -> PovmSet:
    return povm_action_subsystem(len(gw.free_cells), len(GRID_MOVES))


def grid_policy_table(policy, gw: GridWorld) -> np.ndarray:
    """Stack the action distribution of every free cell into an 8x4 table.

    ``policy`` is a callable cell -> probability vector; rows follow
    ``gw.free_cells`` order, columns the right/down/left/up action order.
    """
    rows = [np.asarray(policy(cell), dtype=float) for cell in gw.free_cells]
    table = np.stack(rows)
    if not np.allclose(table.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("policy rows must be normalized")
    return table


def shortest_path_length(gw: GridWorld) -> int:
    """BFS distance from start to goal under the actual step dynamics."""
    seen = {gw.start}
    frontier = deque([(gw.start, 0)])
    while frontier:
        cell, d = frontier.popleft()
        if cell == gw.goal:
            return d
        for a in range(len(GRID_MOVES)):
            nxt, _, _, _ = grid_step(gw, cell, a)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    raise ValueError("goal unreachable")


def exact_hitting_time(gw: GridWorld, start=None) -> float:
    """Expected steps to reach the goal under the uniform random walk.

    Solves the linear absorption system over the transient free cells,
    counting blocked moves as steps (the position just does not change).
    """
    transient = [c for c in gw.free_cells if c != gw.goal]
    idx = {c: i for i, c in enumerate(transient)}
    n = len(transient)
    a = np.eye(n)
    b = np.ones(n)
    for cell in transient:
        for action in range(len(GRID_MOVES)):
            nxt, _, _, _ = grid_step(gw, cell, action)
            if nxt != gw.goal:
                a[idx[cell], idx[nxt]] -= 0.25
    t = np.linalg.solve(a, b)
    return float(t[idx[tuple(start or gw.start)]])


def optimal_action_ties(gw: GridWorld) -> dict:
    """Cells mapped to their set of shortest-path-optimal actions.

    Cells with exactly two optimal actions are the figure's double arrows.
    """
    dist = {gw.goal: 0}
    frontier = deque([gw.goal])
    while frontier:
        cell = frontier.popleft()
        for other in gw.free_cells:
            if other in dist:
                continue
            for a in range(len(GRID_MOVES)):
                nxt, _, _, _ = grid_step(gw, other, a)
                if nxt == cell:
                    dist[other] = dist[cell] + 1
                    frontier.append(other)
                    break
    ties = {}
    for cell in gw.free_cells:
        if cell == gw.goal:
            continue
        outcomes = []
        for a in range(len(GRID_MOVES)):
            nxt, _, _, _ = grid_step(gw, cell, a)
            if nxt != cell:
                outcomes.append((1 + dist[nxt], a))
        best = min(d for d, _ in outcomes)
        ties[cell] = tuple(a for d, a in outcomes if d == best)
    return ties


def enumerate_layouts(target_distance: int = 4):
    """All (obstacle, start, goal) placements with the target shortest path.

    Returns a list of (GridWorld, exact_hitting_time, double_arrow_cells)
    sorted by hitting time; reproduces the layout selection documented in the
    module docstring.
    """
    cells = [(r, c) for r in range(3) for c in range(3)]
    out = []
    for obstacle in cells:
        for start in cells:
            for goal in cells:
                if len({obstacle, start, goal}) != 3:
                    continue
                gw = GridWorld(obstacle=obstacle, start=start, goal=goal)
                try:
                    d = shortest_path_length(gw)
                except ValueError:
                    continue
                if d != target_distance:
                    continue
                ties = optimal_action_ties(gw)
                doubles = tuple(sorted(c for c, t in ties.items() if len(t) == 2))
                out.append((gw, exact_hitting_time(gw), doubles))
    out.sort(key=lambda item: item[1])
    return out


@dataclass
class EpisodeLog:
    """Per-cycle records of one episode: who saw what, did what, got what."""

    cycles: list = field(default_factory=list)

    def record(self, cycle: int, percept, action, reward: float, probs):
        self.cycles.append((cycle, percept, action, reward, tuple(np.asarray(probs))))

    def __len__(self) -> int:
        return len(self.cycles)
