"""Bundled models: forced pendulum and the reduced multi-machine grid."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from moi import (
    DataFormatError,
    IntegratorConfig,
    MultiMachineParams,
    ParamOutOfRange,
    PendulumParams,
    Termination,
    bundled_network_path,
    classify_recovery,
    eval_field,
    eval_jacobian,
    fault_scenario_ic,
    find_equilibrium,
    find_sep,
    initial_state,
    load_network,
    multimachine_system,
    pendulum_disturbance_ic,
    pendulum_sep,
    pendulum_system,
    pendulum_uep,
    simulate,
    Verdict,
)


class TestPendulumEquilibria:
    def test_stable_point(self):
        params = PendulumParams()
        sep = pendulum_sep(params, 1.5)
        assert sep[0] == np.arcsin(0.75)
        assert sep[1] == 0.0

    def test_unstable_point(self):
        params = PendulumParams()
        uep = pendulum_uep(params, 1.5)
        assert uep[0] == pytest.approx(np.pi - np.arcsin(0.75), abs=1e-15)
        assert uep[1] == 0.0

    def test_both_are_field_zeros(self, pendulum):
        params = PendulumParams()
        for x in (pendulum_sep(params, 1.5), pendulum_uep(params, 1.5)):
            f = eval_field(pendulum, x, np.array([1.5]))
            assert np.linalg.norm(f) < 1e-14

    def test_torque_beyond_pullout_rejected(self):
        params = PendulumParams()
        with pytest.raises(ParamOutOfRange):
            pendulum_sep(params, 2.0)
        with pytest.raises(ParamOutOfRange):
            pendulum_sep(params, -2.5)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            PendulumParams(c1=-1.0)
        with pytest.raises(ValueError):
            PendulumParams(ic_method="guess")
        with pytest.raises(ParamOutOfRange):
            PendulumParams(c3=2.5)  # rest torque beyond pull-out


class TestPendulumDisturbanceIC:
    def test_closed_form_value(self):
        """Hand-derived response of the torque-only linear dynamics."""
        params = PendulumParams()  # closed-form variant
        p = 1.5
        x0 = pendulum_disturbance_ic(params, np.array([p]))
        t, c2 = params.disturbance_duration, params.c2
        decay = 1.0 - np.exp(-c2 * t)
        z2 = (p / c2) * decay
        z1 = np.arcsin(p / params.c1) + (p / c2) * t - (p / c2**2) * decay
        assert x0[0] == pytest.approx(z1, rel=1e-14)
        assert x0[1] == pytest.approx(z2, rel=1e-14)
        assert np.allclose(x0, [1.2699, 0.9890], atol=1e-4)

    def test_integrated_matches_closed_form(self):
        closed = pendulum_disturbance_ic(PendulumParams(), np.array([1.5]))
        integrated = pendulum_disturbance_ic(
            PendulumParams(ic_method="integrated", ic_step=0.02), np.array([1.5])
        )
        assert np.linalg.norm(closed - integrated) < 1e-4

    def test_zero_duration_is_rest_state(self):
        for method in ("closed", "integrated"):
            params = PendulumParams(disturbance_duration=0.0, ic_method=method)
            x0 = pendulum_disturbance_ic(params, np.array([1.5]))
            assert np.array_equal(x0, pendulum_sep(params, 1.5))

    def test_system_initial_condition_wired(self, pendulum, pendulum_params):
        x0 = initial_state(pendulum, np.array([1.5]))
        assert np.array_equal(
            x0, pendulum_disturbance_ic(pendulum_params, np.array([1.5]))
        )

    def test_integrated_step_independent_of_recovery_step(self, pendulum_params):
        a = pendulum_disturbance_ic(pendulum_params, np.array([1.5]))
        b = pendulum_disturbance_ic(pendulum_params, np.array([1.5]))
        assert np.array_equal(a, b)


def write_network(tmp_path, text, name="net.dat"):
    path = tmp_path / name
    path.write_text(text)
    return path


MINIMAL_NET = """\
GEN 2
G 1 1.0 0.1 0.5 1.0
G 2 2.0 0.2 -0.5 1.1
Y 1 1 0.0 -2.0
Y 1 2 0.0 1.0
Y 2 2 0.0 -2.0
"""


class TestNetworkParser:
    def test_minimal_roundtrip(self, tmp_path):
        params = load_network(write_network(tmp_path, MINIMAL_NET))
        assert params.n_machines == 2
        assert np.array_equal(params.inertia, [1.0, 2.0])
        assert np.array_equal(params.damping, [0.1, 0.2])
        assert np.array_equal(params.mech_power, [0.5, -0.5])
        assert np.array_equal(params.emf, [1.0, 1.1])
        assert params.susceptance[1, 2] == 1.0
        assert params.susceptance[2, 1] == 1.0  # symmetrized
        assert params.fault_conductance is None

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        text = "# header\n\n" + MINIMAL_NET.replace("GEN 2", "GEN 2  # trailing")
        params = load_network(write_network(tmp_path, text))
        assert params.n_machines == 2

    def test_unknown_directive(self, tmp_path):
        path = write_network(tmp_path, MINIMAL_NET + "BOGUS 1 2\n")
        with pytest.raises(DataFormatError, match=r"net\.dat:7"):
            load_network(path)

    def test_bad_field_count(self, tmp_path):
        bad = MINIMAL_NET.replace("G 1 1.0 0.1 0.5 1.0", "G 1 1.0 0.1 0.5")
        with pytest.raises(DataFormatError, match=":2:"):
            load_network(write_network(tmp_path, bad))

    def test_non_numeric_value(self, tmp_path):
        bad = MINIMAL_NET.replace("0.5 1.0", "half 1.0")
        with pytest.raises(DataFormatError, match=":2:"):
            load_network(write_network(tmp_path, bad))

    def test_duplicate_machine_line(self, tmp_path):
        bad = MINIMAL_NET + "G 2 2.0 0.2 -0.5 1.1\n"
        with pytest.raises(DataFormatError, match="duplicate"):
            load_network(write_network(tmp_path, bad))

    def test_missing_machine_line(self, tmp_path):
        bad = MINIMAL_NET.replace("G 2 2.0 0.2 -0.5 1.1\n", "")
        with pytest.raises(DataFormatError):
            load_network(write_network(tmp_path, bad))

    def test_machine_index_out_of_range(self, tmp_path):
        bad = MINIMAL_NET.replace("G 2", "G 3")
        with pytest.raises(DataFormatError):
            load_network(write_network(tmp_path, bad))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_network(tmp_path / "nope.dat")


class TestMultiMachineParams:
    def test_fault_block_must_be_paired(self, nine_bus):
        with pytest.raises(ValueError):
            replace(nine_bus, fault_susceptance=None)

    def test_positivity_checks(self, nine_bus):
        with pytest.raises(ValueError):
            replace(nine_bus, inertia=np.array([1.0, -1.0, 1.0]))

    def test_shape_checks(self, nine_bus):
        with pytest.raises(ValueError):
            replace(nine_bus, susceptance=np.zeros((3, 3)))

    def test_inertia_mode_validated(self, nine_bus):
        with pytest.raises(ValueError):
            replace(nine_bus, inertia_mode="inverse")


class TestBundledNetwork:
    def test_loads_and_has_fault_scenario(self, nine_bus):
        assert nine_bus.n_machines == 3
        assert nine_bus.fault_conductance is not None
        assert nine_bus.slack_emf > 0.0

    def test_deterministic_load(self, nine_bus):
        again = load_network(bundled_network_path())
        assert np.array_equal(again.susceptance, nine_bus.susceptance)
        assert np.array_equal(again.inertia, nine_bus.inertia)

    def test_equilibrium_is_strictly_stable(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        sep = find_sep(sys_, [1.0])
        J = eval_jacobian(sys_, sep, np.array([1.0]))
        assert np.max(np.linalg.eigvals(J).real) < -1e-3

    def test_state_labels_and_wrapping(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        assert sys_.state_names == (
            "theta_1",
            "theta_2",
            "theta_3",
            "omega_1",
            "omega_2",
            "omega_3",
        )
        assert sys_.wrap_indices == (0, 1, 2)

    def test_scale_mode_rejects_nonpositive(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        with pytest.raises(ParamOutOfRange):
            eval_field(sys_, np.zeros(6), np.array([-0.5]))

    def test_vector_inertia_mode(self, nine_bus):
        vec = replace(nine_bus, inertia_mode="vector")
        sys_ = multimachine_system(vec)
        assert sys_.param_dim == 3
        # the coefficients themselves are now the parameter
        f_file = eval_field(
            multimachine_system(nine_bus), np.zeros(6), np.array([1.0])
        )
        f_vec = eval_field(sys_, np.zeros(6), nine_bus.inertia.copy())
        assert np.allclose(f_file, f_vec, atol=1e-15)
        with pytest.raises(ParamOutOfRange):
            eval_field(sys_, np.zeros(6), np.array([1.0, 0.0, 1.0]))


class TestFaultScenario:
    def test_zero_duration_returns_pre_fault_equilibrium(self, nine_bus):
        params = replace(nine_bus, fault_duration=0.0)
        ic = fault_scenario_ic(params, np.array([1.0]), IntegratorConfig(step=1 / 60))
        sys_ = multimachine_system(nine_bus)
        sep = find_sep(sys_, [1.0])
        assert np.allclose(ic, sep, atol=1e-9)

    def test_faulted_machine_most_perturbed(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        sep = find_sep(sys_, [1.0])
        ic = fault_scenario_ic(nine_bus, np.array([1.0]), IntegratorConfig(step=1 / 60))
        dth = np.abs(ic[:3] - sep[:3])
        dom = np.abs(ic[3:] - sep[3:])
        assert np.argmax(dth) == 2
        assert np.argmax(dom) == 2

    def test_requires_fault_block(self, nine_bus):
        no_fault = replace(
            nine_bus, fault_conductance=None, fault_susceptance=None
        )
        with pytest.raises(DataFormatError):
            fault_scenario_ic(no_fault, np.array([1.0]), IntegratorConfig(step=1 / 60))

    def test_recovers_at_nominal_inertia(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        cfg = IntegratorConfig(step=1 / 60, divergence_norm=200.0)
        sep = find_sep(sys_, [1.0])
        rv = classify_recovery(sys_, [1.0], cfg, sep)
        assert rv.verdict is Verdict.RECOVERS

    def test_fails_at_low_inertia(self, nine_bus):
        sys_ = multimachine_system(nine_bus)
        cfg = IntegratorConfig(step=1 / 60, divergence_norm=200.0)
        sep = find_sep(sys_, [0.3])
        rv = classify_recovery(sys_, [0.3], cfg, sep)
        assert rv.verdict is Verdict.FAILS_TO_RECOVER

    def test_deterministic_ic(self, nine_bus):
        cfg = IntegratorConfig(step=1 / 60)
        a = fault_scenario_ic(nine_bus, np.array([1.0]), cfg)
        b = fault_scenario_ic(nine_bus, np.array([1.0]), cfg)
        assert np.array_equal(a, b)


def swing_energy(params: MultiMachineParams, state: np.ndarray) -> float:
    """Kinetic plus coupling/forcing potential for the lossless model."""
    n = params.n_machines
    th = np.concatenate([[0.0], state[:n]])
    w = state[n:]
    emf = np.concatenate([[params.slack_emf], params.emf])
    total = 0.5 * np.sum(params.inertia * w**2) - np.sum(
        params.mech_power * state[:n]
    )
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            total -= (
                params.susceptance[i, j]
                * emf[i]
                * emf[j]
                * np.cos(th[i] - th[j])
            )
    return float(total)


def test_lossless_energy_conserved(nine_bus):
    """With damping and conductance removed the swing dynamics preserve the
    standard energy function along trajectories."""
    lossless = replace(
        nine_bus,
        damping=np.zeros(3),
        conductance=np.zeros((4, 4)),
        fault_conductance=None,
        fault_susceptance=None,
    )
    sys_ = multimachine_system(lossless)
    eq = find_equilibrium(sys_, [1.0], x_guess=np.zeros(6))
    start = eq.copy()
    start[0] += 0.3
    start[4] += 0.2
    sys_ = replace(sys_, initial_condition=lambda p: start)
    cfg = IntegratorConfig(step=0.002, max_time=3.0, divergence_norm=200.0)
    traj = simulate(sys_, [1.0], cfg, eq)
    assert traj.termination is Termination.MAX_TIME_REACHED
    energies = [swing_energy(lossless, s) for s in traj.states]
    assert max(energies) - min(energies) < 1e-4


def test_zero_coupling_grid_has_marginal_equilibrium():
    """With no electrical coupling and no forcing, any angle set is an
    equilibrium — and none of them is strictly stable."""
    from moi import NotStable

    params = MultiMachineParams(
        inertia=np.ones(2),
        damping=np.full(2, 0.1),
        mech_power=np.zeros(2),
        emf=np.ones(2),
        slack_emf=1.0,
        conductance=np.zeros((3, 3)),
        susceptance=np.zeros((3, 3)),
    )
    sys_ = multimachine_system(params)
    eq = find_equilibrium(sys_, [1.0], x_guess=np.array([0.4, -0.2, 0.0, 0.0]))
    assert np.allclose(eq[2:], 0.0, atol=1e-12)
    with pytest.raises(NotStable):
        find_sep(sys_, [1.0], x_guess=np.array([0.4, -0.2, 0.0, 0.0]))
