import numpy as np
import pytest

from gateforge.grape import OptimizationConfig, gradient, optimize, propagate
from gateforge.lindblad import (
    OpenEnsemble,
    choi_matrix,
    open_fidelity,
    open_gradient,
    open_optimize,
    open_target,
    propagate_channel,
)
from gateforge.linalg import dagger, kron, unvec, vec
from gateforge.model import (
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Z,
    CollapseTerm,
    ControlTerm,
    HamiltonianModel,
    LindbladModel,
    TargetGate,
    UncertaintySample,
    standard_gate,
)
from gateforge.pulse import ControlSchedule

NOMINAL = UncertaintySample.nominal()


def flux_model(gamma1=1e-4, gamma_phi=1e-3, g1_channel=None, gphi_channel=None):
    ham = HamiltonianModel(
        drift=np.zeros((2, 2), dtype=complex),
        controls=(
            ControlTerm(operator=SIGMA_X, bounds=(-5, 5), name="u_x"),
            ControlTerm(operator=SIGMA_Z, bounds=(-5, 5), name="u_z"),
        ),
        unit_system="GHz-ns",
    )
    return LindbladModel(
        hamiltonian=ham,
        collapse_terms=(
            CollapseTerm(operator=SIGMA_MINUS, rate=gamma1, channel=g1_channel),
            CollapseTerm(operator=SIGMA_Z, rate=gamma_phi, channel=gphi_channel),
        ),
    )


def closed_model():
    return HamiltonianModel(
        drift=SIGMA_Z,
        controls=(ControlTerm(operator=SIGMA_X, bounds=(-5, 5)),),
    )


def closed_as_lindblad():
    return LindbladModel(hamiltonian=closed_model(), collapse_terms=())


def random_density_matrix(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ dagger(a)
    return rho / np.trace(rho)


def unitary_conjugation_superop(u):
    return kron(u.conj(), u)


class TestPropagateChannel:
    def test_gamma_zero_matches_unitary_conjugation(self):
        rng = np.random.default_rng(0)
        sched = ControlSchedule(8.0, rng.uniform(-2, 2, (1, 30)))
        u_t = propagate(closed_model(), NOMINAL, sched).terminal
        g_t = propagate_channel(closed_as_lindblad(), NOMINAL, sched).terminal
        assert np.abs(g_t - unitary_conjugation_superop(u_t)).max() < 1e-9

    def test_pure_dephasing_coherence_decay(self):
        gphi, total = 1e-3, 5.0
        model = flux_model(gamma1=0.0, gamma_phi=gphi)
        sched = ControlSchedule(total, np.zeros((2, 40)))
        g_t = propagate_channel(model, NOMINAL, sched).terminal
        rng = np.random.default_rng(1)
        rho0 = random_density_matrix(rng, 2)
        rho_t = unvec(g_t @ vec(rho0))
        assert abs(rho_t[0, 1] - np.exp(-2 * gphi * total) * rho0[0, 1]) < 1e-12

    def test_chain_starts_at_identity(self):
        model = flux_model()
        sched = ControlSchedule(5.0, np.zeros((2, 10)))
        chain = propagate_channel(model, NOMINAL, sched)
        assert np.array_equal(chain.partials[0], np.eye(4))
        # vanishing elapsed time leaves the channel at the identity
        tiny = propagate_channel(model, NOMINAL, ControlSchedule(1e-12, np.zeros((2, 1))))
        assert np.abs(tiny.terminal - np.eye(4)).max() < 1e-11

    def test_steps_preserve_trace_and_hermiticity(self):
        rng = np.random.default_rng(2)
        model = flux_model(g1_channel="g1", gphi_channel="gphi")
        sample = UncertaintySample({"g1": 1.15, "gphi": 0.9})
        sched = ControlSchedule(5.0, rng.uniform(-3, 3, (2, 12)))
        chain = propagate_channel(model, sample, sched)
        for _ in range(20):
            rho = random_density_matrix(rng, 2)
            for g in chain.steps:
                out = unvec(g @ vec(rho))
                assert abs(np.trace(out) - 1) < 1e-9
                assert np.abs(out - dagger(out)).max() < 1e-9


class TestOpenFidelity:
    def test_exact_lift_scores_one(self):
        for name in ("H", "S", "T_pi8"):
            t = open_target(standard_gate(name))
            g = unitary_conjugation_superop(standard_gate(name).matrix)
            assert abs(open_fidelity(t, g) - 1) < 1e-14

    def test_depolarizing_vs_identity(self):
        # fully depolarizing channel: rho -> tr(rho) I/2; superoperator oracle
        eye = np.eye(2, dtype=complex)
        depol = 0.5 * np.outer(vec(eye), vec(eye).conj())
        ident = TargetGate(name="custom", matrix=eye, qubits=1)
        assert abs(open_fidelity(open_target(ident), depol) - 0.25) < 1e-14

    def test_gamma_zero_phase_free(self):
        rng = np.random.default_rng(3)
        sched = ControlSchedule(8.0, rng.uniform(-2, 2, (1, 40)))
        u_t = propagate(closed_model(), NOMINAL, sched).terminal
        target = TargetGate(name="custom", matrix=np.exp(1j * 0.7) * u_t, qubits=1)
        g_t = propagate_channel(closed_as_lindblad(), NOMINAL, sched).terminal
        assert abs(open_fidelity(open_target(target), g_t) - 1) < 1e-9

    def test_literal_normalization_switch(self):
        t_default = open_target(standard_gate("H"))
        t_literal = open_target(standard_gate("H"), literal_normalization=True)
        g = unitary_conjugation_superop(standard_gate("S").matrix)
        assert abs(
            open_fidelity(t_literal, g) - 2.0 * open_fidelity(t_default, g)
        ) < 1e-14

    def test_bounded_for_channel_inputs(self):
        rng = np.random.default_rng(4)
        model = flux_model()
        t = open_target(standard_gate("H"))
        for _ in range(5):
            sched = ControlSchedule(5.0, rng.uniform(-4, 4, (2, 10)))
            g_t = propagate_channel(model, NOMINAL, sched).terminal
            f = open_fidelity(t, g_t)
            assert 0.0 <= f <= 1.0 + 1e-12


class TestOpenGradient:
    def test_gamma_zero_parallel_to_unitary_gradient(self):
        rng = np.random.default_rng(5)
        target = standard_gate("H")
        for _ in range(5):
            sched = ControlSchedule(8.0, rng.uniform(-1, 1, (1, 50)))
            g_open = open_gradient(
                closed_as_lindblad(), NOMINAL, sched, open_target(target)
            )
            g_unit = gradient(closed_model(), NOMINAL, sched, target)
            cos = np.vdot(g_open, g_unit).real / (
                np.linalg.norm(g_open) * np.linalg.norm(g_unit)
            )
            assert cos > 0.999

    def test_matches_finite_differences_on_flux_preset(self):
        model = flux_model(g1_channel="g1", gphi_channel="gphi")
        sample = UncertaintySample({"g1": 1.1, "gphi": 0.85})
        target = open_target(standard_gate("S"))
        rng = np.random.default_rng(6)
        sched = ControlSchedule(5.0, rng.uniform(-0.3, 0.3, (2, 40)))
        g = open_gradient(model, sample, sched, target)
        du = 1e-6
        g_fd = np.zeros_like(g)
        for m in range(2):
            for j in range(40):
                up = sched.copy()
                up.values[m, j] += du
                um = sched.copy()
                um.values[m, j] -= du
                zp = propagate_channel(model, sample, up).terminal
                zm = propagate_channel(model, sample, um).terminal
                pp = abs(np.vdot(target.superoperator, zp)) ** 2
                pm = abs(np.vdot(target.superoperator, zm)) ** 2
                g_fd[m, j] = (pp - pm) / (2 * du)
        rel = np.abs(g - g_fd).max() / np.abs(g_fd).max()
        assert rel < 1e-3

    def test_stationary_at_achieved_target(self):
        sched = ControlSchedule(1.3, np.zeros((1, 16)))
        u_t = propagate(closed_model(), NOMINAL, sched).terminal
        target = open_target(TargetGate(name="custom", matrix=u_t, qubits=1))
        g = open_gradient(closed_as_lindblad(), NOMINAL, sched, target)
        assert np.abs(g).max() < 1e-9


class TestOpenOptimize:
    def test_gamma_zero_matches_unitary_trajectory(self):
        # along the unitary optimizer's trajectory the open-system fidelity
        # is exactly the squared unitary fidelity (phase-free lift)
        rng = np.random.default_rng(7)
        s0 = ControlSchedule(8.0, rng.uniform(-0.5, 0.5, (1, 30)))
        target = standard_gate("H")
        ot = open_target(target)
        for k in (0, 3, 8, 15, 25):
            rep = optimize(
                closed_model(), NOMINAL, s0, target,
                OptimizationConfig(step_size=0.3, max_iterations=k),
            )
            g_t = propagate_channel(
                closed_as_lindblad(), NOMINAL, rep.final_schedule
            ).terminal
            f_open = open_fidelity(ot, g_t)
            assert abs(f_open - rep.final_fidelity**2) < 1e-6

    def test_gamma_zero_ascends_to_unitary_optimum(self):
        rng = np.random.default_rng(17)
        s0 = ControlSchedule(8.0, rng.uniform(-0.5, 0.5, (1, 30)))
        cfg = OptimizationConfig(
            step_size=0.05, max_iterations=1500, target_infidelity=1e-9, momentum=0.9
        )
        rep = open_optimize(
            closed_as_lindblad(), NOMINAL, s0, open_target(standard_gate("H")), cfg
        )
        assert rep.final_fidelity > 1 - 1e-6

    def test_zero_iterations(self):
        model = flux_model()
        s0 = ControlSchedule(5.0, np.zeros((2, 20)))
        cfg = OptimizationConfig(step_size=0.05, max_iterations=0)
        rep = open_optimize(model, NOMINAL, s0, open_target(standard_gate("H")), cfg)
        g_t = propagate_channel(model, NOMINAL, s0).terminal
        assert len(rep.fidelity_trace) == 1
        assert abs(rep.final_fidelity - open_fidelity(open_target(standard_gate("H")), g_t)) < 1e-12


class TestChoi:
    def test_unitary_channel_choi_is_rank_one(self):
        u = standard_gate("H").matrix
        c = choi_matrix(unitary_conjugation_superop(u))
        w = np.linalg.eigvalsh(c)
        assert w.min() > -1e-12
        assert abs(w.max() - 2.0) < 1e-12  # tr C = d, single Kraus term
        assert (w > 1e-9).sum() == 1

    def test_channel_chain_is_completely_positive(self):
        rng = np.random.default_rng(8)
        model = flux_model()
        for _ in range(5):
            sched = ControlSchedule(5.0, rng.uniform(-3, 3, (2, 8)))
            g_t = propagate_channel(model, NOMINAL, sched).terminal
            w = np.linalg.eigvalsh(choi_matrix(g_t))
            assert w.min() > -1e-8
