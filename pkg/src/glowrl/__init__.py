"""glowrl: reinforcement learning with a parametrized-unitary memory.

An agent whose memory is a product of alternating Hamiltonian layers learns
invasion-game and grid-world tasks through a glow-equipped gradient update of
its layer strengths, with classical tabular baselines for comparison.
"""

from .linalg import RngStream
from .memory import HamiltonianStack, MemorySnapshot, build_snapshot
from .agent import GlowAgent

__all__ = ["RngStream", "HamiltonianStack", "MemorySnapshot", "build_snapshot", "GlowAgent"]

__version__ = "0.1.0"
