import numpy as np
import pytest

from glowrl.linalg import RngStream, herm_expm, kron, partial_trace, random_hermitian
from glowrl.memory import (
    HamiltonianStack,
    build_snapshot,
    case_I_hamiltonians,
    case_II_hamiltonians,
    gradient_add_layer,
    gradient_fixed_layers,
    rank_decompose,
    schmidt_orthonormalize,
)
from glowrl.policy import encode_invasion_2x2, povm_action_subsystem, povm_rotated
from glowrl.linalg import random_unitary

from conftest import random_density, random_projector_povm_element


def make_stack(dim, n, rng, scale=1.0):
    h1, h2 = case_I_hamiltonians(dim, rng)
    return HamiltonianStack(dim=dim, ham1=h1 * scale, ham2=h2 * scale, n=n)


def probability(stack, h, rho, pi):
    u = build_snapshot(stack, h).U
    return np.trace(u @ rho @ u.conj().T @ pi).real


def central_fd(stack, h, rho, pi, delta=1e-5):
    g = np.empty(stack.n)
    for k in range(stack.n):
        hp = h.copy(); hp[k] += delta
        hm = h.copy(); hm[k] -= delta
        g[k] = (probability(stack, hp, rho, pi) - probability(stack, hm, rho, pi)) / (2 * delta)
    return g


class TestCaseHamiltonians:
    def test_case_I_shapes_and_hermiticity(self, rng):
        h1, h2 = case_I_hamiltonians(4, rng)
        assert h1.shape == (4, 4) and h2.shape == (4, 4)
        assert np.abs(h1 - h1.conj().T).max() < 1e-14
        assert np.abs(h2 - h2.conj().T).max() < 1e-14

    def test_case_I_pairs_differ(self):
        for seed in range(100):
            rng = RngStream(seed, 0).generator()
            h1, h2 = case_I_hamiltonians(4, rng)
            assert np.linalg.norm(h1 - h2) > 0.1

    def test_case_II_structure(self):
        # replay the documented draw order (hs1, ha1, hs2, ha2) to rebuild the factors
        rng = RngStream(55, 0).generator()
        h1, h2 = case_II_hamiltonians(2, 2, rng)
        rng = RngStream(55, 0).generator()
        hs1 = random_hermitian(2, rng)
        ha1 = random_hermitian(2, rng)
        hs2 = random_hermitian(2, rng)
        ha2 = random_hermitian(2, rng)
        assert np.abs(h1 - (kron(hs1, np.eye(2)) + kron(np.eye(2), ha1))).max() < 1e-14
        assert np.abs(h2 - kron(hs2, ha2)).max() < 1e-14
        # Kronecker trace identity for the interaction term
        assert abs(np.trace(h2) - np.trace(hs2) * np.trace(ha2)) < 1e-10
        # reduction over A of the local term: d_A * Hs1 + Tr(Ha1) * I
        red = partial_trace(h1, [2, 2], keep=[0])
        assert np.abs(red - (2 * hs1 + np.trace(ha1) * np.eye(2))).max() < 1e-10

    def test_case_II_dim(self, rng):
        h1, h2 = case_II_hamiltonians(2, 2, rng)
        assert h1.shape == (4, 4) and h2.shape == (4, 4)


class TestSchmidtOrthonormalize:
    def test_hilbert_schmidt_orthogonal(self, rng):
        g1, g2 = schmidt_orthonormalize(random_hermitian(8, rng), random_hermitian(8, rng))
        assert abs(np.trace(g1.conj().T @ g2)) < 1e-10
        assert abs(np.linalg.norm(g1) - np.sqrt(8)) < 1e-12
        assert abs(np.linalg.norm(g2) - np.sqrt(8)) < 1e-12
        assert np.abs(g1 - g1.conj().T).max() < 1e-12
        assert np.abs(g2 - g2.conj().T).max() < 1e-12

    def test_orthogonal_pair_keeps_directions(self):
        h1 = np.diag([1.0, -1.0]).astype(complex)
        h2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)  # HS-orthogonal to h1
        g1, g2 = schmidt_orthonormalize(h1, h2)
        assert np.abs(g1 - h1) .max() < 1e-12  # already norm sqrt(2)
        assert np.abs(g2 - h2).max() < 1e-12

    def test_parallel_pair_rejected(self, rng):
        h = random_hermitian(4, rng)
        with pytest.raises(ValueError):
            schmidt_orthonormalize(h, 2.0 * h)


class TestBuildSnapshot:
    def test_zero_controls_identity(self, rng):
        stack = make_stack(4, 5, rng)
        snap = build_snapshot(stack, np.zeros(5))
        assert np.array_equal(snap.U, np.eye(4, dtype=complex))

    def test_single_layer_equals_expm(self, rng):
        stack = make_stack(4, 1, rng)
        snap = build_snapshot(stack, np.array([0.37]))
        assert np.abs(snap.U - herm_expm(stack.ham1, 0.37)).max() < 1e-12

    def test_three_layers_equal_direct_product(self, rng):
        stack = make_stack(4, 3, rng)
        h = rng.normal(size=3)
        snap = build_snapshot(stack, h)
        direct = (
            herm_expm(stack.ham1, h[2])
            @ herm_expm(stack.ham2, h[1])
            @ herm_expm(stack.ham1, h[0])
        )
        assert np.abs(snap.U - direct).max() < 1e-10

    def test_prefixes_unitary_and_conclusive(self, rng):
        stack = make_stack(8, 6, rng)
        snap = build_snapshot(stack, rng.normal(size=6))
        for p in snap.prefixes:
            assert np.linalg.norm(p.conj().T @ p - np.eye(8)) < 1e-10
        assert np.array_equal(snap.prefixes[-1], snap.U)

    def test_length_mismatch_rejected(self, rng):
        stack = make_stack(4, 3, rng)
        with pytest.raises(ValueError):
            build_snapshot(stack, np.zeros(4))


class TestGradientFixedLayers:
    def test_mixed_action_register_gradient_is_exactly_zero(self, rng):
        # p_coh = 0 input and identity memory: the analytic gradient vanishes
        # identically, not merely to roundoff
        stack = make_stack(4, 6, rng)
        snap = build_snapshot(stack, np.zeros(6))
        rho = encode_invasion_2x2(0, p_coh=0.0)
        povm = povm_action_subsystem(2, 2)
        for pi in povm.ops:
            g = gradient_fixed_layers(snap, stack, rho, pi)
            assert np.array_equal(g, np.zeros(6))

    def test_complete_povm_sums_to_zero(self, rng):
        stack = make_stack(4, 5, rng)
        snap = build_snapshot(stack, rng.normal(size=5))
        rho = random_density(4, rng)
        povm = povm_rotated(random_unitary(4, rng))
        total = np.zeros(5)
        for pi in povm.ops:
            total += gradient_fixed_layers(snap, stack, rho, pi)
        assert np.abs(total).max() < 1e-12

    def test_matches_central_differences(self, rng):
        worst = 0.0
        for _ in range(60):
            dim = int(rng.choice([4, 8]))
            n = int(rng.integers(1, 9))
            stack = make_stack(dim, n, rng)
            h = rng.normal(size=n)
            rho = random_density(dim, rng)
            pi = random_projector_povm_element(dim, dim // 2, rng)
            g = gradient_fixed_layers(build_snapshot(stack, h), stack, rho, pi)
            worst = max(worst, np.abs(g - central_fd(stack, h, rho, pi)).max())
        assert worst < 1e-6

    def test_gauge_phase_on_measurement_basis(self, rng):
        # a global phase on the rotation defining the POVM leaves the
        # operators, and therefore every gradient, unchanged
        stack = make_stack(4, 4, rng)
        h = rng.normal(size=4)
        snap = build_snapshot(stack, h)
        rho = random_density(4, rng)
        u_t = random_unitary(4, rng)
        povm = povm_rotated(u_t)
        povm_phased = povm_rotated(np.exp(1j * 0.713) * u_t)
        for pi, pj in zip(povm.ops, povm_phased.ops):
            gi = gradient_fixed_layers(snap, stack, rho, pi)
            gj = gradient_fixed_layers(snap, stack, rho, pj)
            assert np.abs(gi - gj).max() < 1e-12

    def test_component_bound(self, rng):
        for _ in range(20):
            stack = make_stack(4, 6, rng)
            snap = build_snapshot(stack, rng.normal(size=6))
            rho = random_density(4, rng)
            pi = random_projector_povm_element(4, 2, rng)
            g = gradient_fixed_layers(snap, stack, rho, pi)
            for k in range(6):
                bound = 2 * np.linalg.norm(stack.layer_hamiltonian(k), 2)
                assert abs(g[k]) <= bound + 1e-12

    def test_rejects_bad_inputs(self, rng):
        stack = make_stack(4, 3, rng)
        snap = build_snapshot(stack, np.zeros(3))
        povm = povm_action_subsystem(2, 2)
        with pytest.raises(ValueError):
            gradient_fixed_layers(snap, stack, np.eye(4, dtype=complex), povm.ops[0])
        rho = random_density(4, rng)
        with pytest.raises(ValueError):
            gradient_fixed_layers(snap, stack, rho, -np.eye(4, dtype=complex))


class TestGradientAddLayer:
    def test_identity_povm_element_gives_zero(self, rng):
        u = random_unitary(4, rng)
        rho = random_density(4, rng)
        g = gradient_add_layer(u, random_hermitian(4, rng), rho, np.eye(4, dtype=complex))
        assert abs(g) < 1e-12

    def test_consistent_with_appended_fixed_layer(self, rng):
        # a fresh layer at strength zero on top of a 2-layer stack is the
        # third alternating layer; component 2 of the fixed-layer gradient
        # must agree with the add-layer formula
        h1, h2 = case_I_hamiltonians(4, rng)
        base = HamiltonianStack(dim=4, ham1=h1, ham2=h2, n=2)
        ext = HamiltonianStack(dim=4, ham1=h1, ham2=h2, n=3)
        h = rng.normal(size=2)
        rho = random_density(4, rng)
        pi = random_projector_povm_element(4, 2, rng)
        u = build_snapshot(base, h).U
        ext_snap = build_snapshot(ext, np.append(h, 0.0))
        g_ext = gradient_fixed_layers(ext_snap, ext, rho, pi)
        g_add = gradient_add_layer(u, h1, rho, pi)
        assert abs(g_ext[2] - g_add) < 1e-10

    def test_matches_finite_difference(self, rng):
        u = random_unitary(4, rng)
        hk = random_hermitian(4, rng)
        rho = random_density(4, rng)
        pi = random_projector_povm_element(4, 2, rng)
        g = gradient_add_layer(u, hk, rho, pi)
        delta = 1e-5

        def p(eps):
            w = herm_expm(hk, eps) @ u
            return np.trace(w @ rho @ w.conj().T @ pi).real

        fd = (p(delta) - p(-delta)) / (2 * delta)
        assert abs(g - fd) < 1e-6


class TestRankDecompose:
    def test_reconstructs_density(self, rng):
        rho = random_density(4, rng, rank=2)
        w, vecs = rank_decompose(rho)
        assert len(w) == 2
        back = (vecs * w) @ vecs.conj().T
        assert np.abs(back - rho).max() < 1e-12
