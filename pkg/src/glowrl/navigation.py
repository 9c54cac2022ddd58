"""Self-contained demonstrations that training navigates the memory unitary.

Three nested amounts of freedom, checked after small training runs:
(i) a single input state only pins the output ray, so the gradient of the
outcome probability vanishes at the optimum; (ii) a fixed input basis leaves
the solution class U_T x (diagonal phases in that basis); (iii) random input
states squeeze the freedom down to a global phase, so the state-average
fidelity against the target must approach 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import GlowAgent
from .envs import invasion_percept, invasion_step, make_invasion
from .linalg import RngStream
from .memory import HamiltonianStack, case_I_hamiltonians, case_II_hamiltonians, gradient_fixed_layers
from .metrics import avg_fidelity


@dataclass(frozen=True)
class NavigationReport:
    case_id: str
    achieved: float  # probability (cases i, ii) or fidelity (case iii)
    residual_gradient_norm: float
    cycles_used: int

    def __post_init__(self):
        if not 0.0 <= self.achieved <= 1.0 + 1e-9:
            raise ValueError("achieved probability must lie in [0, 1]")

    def csv_row(self) -> str:
        return "%s,%s,%s,%s" % (
            self.case_id, repr(self.achieved),
            repr(self.residual_gradient_norm), self.cycles_used,
        )

    @staticmethod
    def csv_header() -> str:
        return "case,achieved,residual_gradient_norm,cycles"


def stationary_point_check(snap, stack: HamiltonianStack, rho_s: np.ndarray,
                           pi_a: np.ndarray) -> float:
    """Max-norm of the analytic gradient at the current controls.

    Small values certify a stationary point of the outcome probability,
    which is what a converged maximum must be.
    """
    g = gradient_fixed_layers(snap, stack, rho_s, pi_a)
    return float(np.abs(g).max())


def basis_freedom_check(u: np.ndarray, u_t: np.ndarray, basis_s: np.ndarray | None = None,
                        basis_a: np.ndarray | None = None) -> float:
    """Frobenius distance from U to the diagonal-phase orbit of the target.

    The single-basis solution class collapses algebraically to
    {U_T B D B^dag : D diagonal unitary} with B the common input eigenbasis;
    the minimizing D aligns each diagonal entry of B^dag U_T^dag U B by
    closed-form phase cancellation (the class is a torus orbit, so no
    iteration is needed).  basis_a defaults to U_T applied to basis_s.
    """
    n = u.shape[0]
    if basis_s is None:
        basis_s = np.eye(n, dtype=complex)
    if basis_a is None:
        basis_a = u_t @ basis_s
    m = basis_a.conj().T @ u @ basis_s
    diag = np.diag(m).copy()
    mags = np.abs(diag)
    phases = np.where(mags > 1e-300, diag / np.where(mags > 1e-300, mags, 1.0), 1.0)
    # forming M - D* directly avoids the cancellation in 2n - 2 sum|M_jj|
    return float(np.linalg.norm(m - np.diag(phases)))


def _train_invasion(cfg, stack, alpha, cycles, rng):
    agent = GlowAgent(stack, alpha=alpha, eta=1.0)
    for t in range(cycles):
        labels, rho, povm = invasion_percept(cfg, t, rng)
        agent.reset_episode()
        action, _ = agent.step(rho, povm, rng)
        agent.apply_reward(invasion_step(cfg, t, action, labels))
    return agent


def demo_case_i(seed: int = 1, cycles: int = 8000) -> NavigationReport:
    """Single input state: drive p(a|s) toward 1 and verify stationarity.

    Generic instances reach p ~ 1; occasional draws (e.g. the stream-0
    instance of seed 0) carry a genuine local maximum near p = 0.975 that
    traps plain ascent at every tested learning rate, which is worth knowing
    about but is not this demonstration's subject.
    """
    from .policy import action_distribution, encode_invasion_2x2

    rng = RngStream(seed, 0).generator()
    h1, h2 = case_I_hamiltonians(4, rng)
    stack = HamiltonianStack(dim=4, ham1=h1, ham2=h2, n=16)
    cfg = make_invasion("two_symbol", reward_correct=1.0, reward_wrong=-1.0)
    agent = GlowAgent(stack, alpha=5e-3, eta=1.0)
    labels = {"symbol": 0}  # single-percept task: the attacker always shows 0
    rho = encode_invasion_2x2(0, cfg.p_coh)
    for t in range(cycles):
        action, _ = agent.step(rho, cfg.povm, rng)
        agent.apply_reward(invasion_step(cfg, t, action, labels))
    snap = agent.snapshot()
    dist = dict(action_distribution(snap, rho, cfg.povm))
    resid = stationary_point_check(snap, stack, rho, cfg.povm.ops[0])
    return NavigationReport("i", float(dist[0]), resid, cycles)


def demo_case_ii(seed: int = 0, cycles: int = 8000) -> NavigationReport:
    """Fixed input basis: reward converges while U only reaches the phase orbit."""
    from .presets import INVASION_CASE_II_SCALE

    rng = RngStream(seed, 0).generator()
    h1, h2 = case_II_hamiltonians(2, 2, rng)
    h1, h2 = INVASION_CASE_II_SCALE * h1, INVASION_CASE_II_SCALE * h2
    stack = HamiltonianStack(dim=4, ham1=h1, ham2=h2, n=16)
    cfg = make_invasion("four_percept_4act", rng=rng, reward_wrong=-10.0)
    agent = _train_invasion(cfg, stack, alpha=1e-2, cycles=cycles, rng=rng)
    u = agent.snapshot().U
    residual = basis_freedom_check(u, cfg.u_target)
    p_correct = _mean_correct_probability(agent, cfg)
    return NavigationReport("ii", p_correct, residual, cycles)


def demo_case_iii(seed: int = 0, cycles: int = 20000) -> NavigationReport:
    """Random input states: only a global phase is left, so fidelity -> 1."""
    from .presets import INVASION_CASE_II_SCALE

    rng = RngStream(seed, 0).generator()
    h1, h2 = case_II_hamiltonians(2, 2, rng)
    h1, h2 = INVASION_CASE_II_SCALE * h1, INVASION_CASE_II_SCALE * h2
    stack = HamiltonianStack(dim=4, ham1=h1, ham2=h2, n=16)
    cfg = make_invasion("four_percept_4act", rng=rng, reward_wrong=-10.0,
                        basis_mode="random_onb_per_cycle")
    agent = _train_invasion(cfg, stack, alpha=1e-2, cycles=cycles, rng=rng)
    u = agent.snapshot().U
    # only the fidelity is constrained; the phase freedom keeps the squared
    # distance away from 0 in general, so it is not reported here
    fid = avg_fidelity(u, cfg.u_target)
    g = _mean_gradient_norm(agent, cfg)
    return NavigationReport("iii", fid, g, cycles)


def _mean_correct_probability(agent: GlowAgent, cfg) -> float:
    from .policy import action_distribution, encode_invasion_4

    snap = agent.snapshot()
    total = 0.0
    for j in (0, 1):
        for k in (0, 1):
            dist = dict(action_distribution(snap, encode_invasion_4(j, k), cfg.povm))
            total += dist[(j, k)]
    return total / 4.0


def _mean_gradient_norm(agent: GlowAgent, cfg) -> float:
    from .policy import encode_invasion_4

    snap = agent.snapshot()
    norms = []
    for j in (0, 1):
        for k in (0, 1):
            rho = encode_invasion_4(j, k)
            idx = cfg.povm.actions.index((j, k))
            norms.append(stationary_point_check(snap, agent.stack, rho, cfg.povm.ops[idx]))
    return float(np.mean(norms))
