import numpy as np
import pytest

from semigauss import (AliasingError, GaussianState, GridSpec, GridWavefunction,
                       PhaseSpacePoint, SiegelForm, ValidationError,
                       default_grid, exact_width, fidelity, from_gaussian,
                       hbar_scaling_study, integrate_flow, l2_distance,
                       make_model, max_split_step, plan_grid,
                       propagate_gaussian, split_step_evolve)


def ground_state(hbar=1.0, p=0.0, q=0.0, z=1j):
    return GaussianState(hbar, PhaseSpacePoint([p], [q]), SiegelForm([[z]]))


def ground_on_grid(hbar=1.0, p=0.0, q=0.0, z=1j, half_width=15.0, n=2048):
    state = ground_state(hbar, p, q, z)
    spec = GridSpec(q - half_width, 2 * half_width / n, n)
    return from_gaussian(state, spec), state


class TestGridWavefunction:
    def test_rejects_non_power_of_two(self):
        x = np.linspace(-10, 10, 1000)
        psi = np.exp(-0.5 * x * x) / np.pi ** 0.25
        with pytest.raises(ValidationError):
            GridWavefunction(-10.0, x[1] - x[0], psi, 1.0)

    def test_rejects_unnormalized(self):
        x = np.linspace(-10, 10, 1024)
        with pytest.raises(ValidationError):
            GridWavefunction(-10.0, x[1] - x[0], np.exp(-0.5 * x * x), 1.0)

    def test_aliasing_guard(self):
        # oscillation at the Nyquist edge carries tail mass
        n = 1024
        dx = 20.0 / n
        x = -10.0 + dx * np.arange(n)
        k_edge = 0.98 * np.pi / dx
        psi = np.exp(-0.5 * x * x + 1j * k_edge * x)
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
        with pytest.raises(AliasingError):
            GridWavefunction(-10.0, dx, psi, 1.0)

    def test_default_grid_expands_when_needed(self):
        # free-spread packet at hbar = 1 does not fit the base window
        wide = ground_state(hbar=1.0, z=(10.0 + 1j) / 101.0)  # t = 10 free shape
        psi = default_grid(wide, n=1024)
        assert psi.n > 1024 or psi.dx * psi.n > 25.0
        assert abs(psi.norm - 1.0) < 1e-8


class TestExactWidth:
    def test_minimum_uncertainty(self):
        psi, _ = ground_on_grid(hbar=1.0)
        assert exact_width(psi) == pytest.approx(1.0, abs=1e-10)

    def test_squeezed(self):
        psi, _ = ground_on_grid(hbar=1.0, z=2j)
        assert exact_width(psi) == pytest.approx(0.25 + 1.0, abs=1e-10)

    def test_boost_and_shift_invariant(self):
        psi, _ = ground_on_grid(hbar=1.0, p=1.5, q=2.0)
        assert exact_width(psi) == pytest.approx(1.0, abs=1e-9)


class TestFidelity:
    def test_self_overlap(self):
        psi, state = ground_on_grid(hbar=0.5)
        res = fidelity(psi, state)
        assert res.modulus == pytest.approx(1.0, abs=1e-9)
        assert abs(res.phase_mismatch) < 1e-9
        assert res.norm_error < 2e-5

    def test_distant_packets_orthogonal(self):
        psi, _ = ground_on_grid(hbar=1.0, q=-5.0)
        far = ground_state(hbar=1.0, q=5.0)  # 10 standard deviations away
        assert fidelity(psi, far).modulus < 1e-10

    def test_hbar_mismatch_rejected(self):
        psi, _ = ground_on_grid(hbar=1.0)
        with pytest.raises(ValidationError):
            fidelity(psi, ground_state(hbar=0.5))

    def test_l2_distance_of_phase_rotation(self):
        psi, state = ground_on_grid(hbar=1.0)
        rotated = GaussianState(1.0, state.center, state.shape, phase=1j)
        # ||psi - i psi|| = sqrt(2 - 2 Re(-i)) = sqrt(2)
        assert l2_distance(psi, rotated) == pytest.approx(np.sqrt(2.0), abs=1e-9)


class TestSplitStep:
    def test_free_momentum_density_static(self):
        model = make_model("free")
        psi0, _ = ground_on_grid(hbar=1.0, p=1.0)
        evo = split_step_evolve(model, psi0, t_end=5.0, dt_out=1.0)
        from scipy import fft as sfft
        first = np.abs(sfft.fft(np.asarray(evo.states[0].values)))
        last = np.abs(sfft.fft(np.asarray(evo.states[-1].values)))
        assert np.max(np.abs(first - last)) < 1e-10

    def test_free_split_is_exact(self):
        # V = 0: a single kinetic phase, no splitting error at any dt.
        # window sized for ~10 standard deviations of the spread state
        model = make_model("free")
        psi0, state0 = ground_on_grid(hbar=1.0, half_width=30.0, n=4096)
        evo = split_step_evolve(model, psi0, t_end=4.0, dt_out=4.0)
        traj = integrate_flow(model, [0.0, 0.0], 4.0, 0.5)
        prop = propagate_gaussian(traj, state0.shape, 1.0)
        assert l2_distance(evo.states[-1], prop.states[-1]) < 1e-9

    def test_harmonic_ground_state_revival(self):
        model = make_model("harmonic", omega=1.0)
        psi0, state0 = ground_on_grid(hbar=1.0, half_width=12.0, n=1024)
        # dt well below the validity cap: the phase is checked to 1e-6
        evo = split_step_evolve(model, psi0, t_end=2.0 * np.pi, dt_out=np.pi / 4,
                                dt=5e-4)
        res = fidelity(evo.states[-1], state0)
        assert res.modulus > 1.0 - 1e-8
        # ground-state energy phase: psi(T) = e^{-i omega T / 2} psi0 = -psi0
        assert abs(abs(res.phase_mismatch) - np.pi) < 1e-6

    def test_unitarity_drift(self):
        model = make_model("pendulum", v0=1.0)
        psi0, _ = ground_on_grid(hbar=0.1, half_width=8.0, n=1024)
        dt = 1e-3
        evo = split_step_evolve(model, psi0, t_end=10.0, dt_out=10.0, dt=dt)
        # 10^4 steps
        assert evo.norm_drift < 1e-10

    def test_strang_second_order(self):
        # consecutive-difference ratio within the dt, dt/2, dt/4 family -> 4;
        # pendulum keeps the potential range (and hence the dt cap) mild
        model = make_model("pendulum", v0=1.0)
        psi0, _ = ground_on_grid(hbar=0.1, q=0.0, half_width=8.0, n=1024)
        t = 1.0
        finals = {}
        for div in (1, 2, 4):
            evo = split_step_evolve(model, psi0, t_end=t, dt_out=t, dt=0.02 / div)
            finals[div] = np.asarray(evo.states[-1].values)
        dx = psi0.dx
        err_coarse = np.sqrt(np.sum(np.abs(finals[1] - finals[2]) ** 2) * dx)
        err_fine = np.sqrt(np.sum(np.abs(finals[2] - finals[4]) ** 2) * dx)
        assert 3.5 < err_coarse / err_fine < 4.5

    def test_step_guard_rejects_large_dt(self):
        model = make_model("quartic")
        psi0, _ = ground_on_grid(hbar=0.1, half_width=6.0, n=1024)
        cap = max_split_step(model, psi0)
        with pytest.raises(ValidationError):
            split_step_evolve(model, psi0, t_end=1.0, dt_out=0.5, dt=10.0 * cap)

    def test_non_split_model_rejected(self):
        model = make_model("aniso_harmonic_2d", omega1=1.0, omega2=2.0)
        psi0, _ = ground_on_grid(hbar=0.1)
        with pytest.raises(ValidationError):
            split_step_evolve(model, psi0, t_end=1.0, dt_out=0.5)

    def test_wannier_stark_absorber_active(self):
        model = make_model("wannier_stark", v=1.0, eps=0.1)
        psi0, _ = ground_on_grid(hbar=0.1, half_width=12.0, n=2048)
        evo = split_step_evolve(model, psi0, t_end=1.0, dt_out=0.5)
        assert evo.absorbed_mass < 1e-6  # monitored, negligible on this window


class TestQuadraticExactness:
    """Fidelity with the semiclassical stack where the quadratic expansion is exact."""

    HBAR = 0.1

    def run_compare(self, model, X0, t_end, dt_out, half_width, n, z=1j, refine=16.0):
        traj = integrate_flow(model, X0, t_end, dt_out)
        prop = propagate_gaussian(traj, SiegelForm([[z]]), self.HBAR)
        state0 = prop.states[0]
        q0 = float(state0.center.q[0])
        psi0 = from_gaussian(state0, GridSpec(q0 - half_width, 2 * half_width / n, n))
        # refine below the cap: global phase is validated at the 1e-6 level
        dt = max_split_step(model, psi0) / refine
        evo = split_step_evolve(model, psi0, t_end, dt_out, dt=dt)
        mods, phases = [], []
        for k in range(len(evo.times)):
            res = fidelity(evo.states[k], prop.states[k])
            mods.append(res.modulus)
            phases.append(res.phase_mismatch)
        return np.array(mods), np.array(phases)

    def test_harmonic_displaced(self):
        model = make_model("harmonic", omega=1.0)
        mods, phases = self.run_compare(model, [0.0, 1.0], 5.0, 0.25, 6.0, 2048)
        assert np.min(mods) > 1.0 - 1e-6
        assert np.max(np.abs(phases)) < 1e-6

    def test_free_moving(self):
        model = make_model("free")
        mods, phases = self.run_compare(model, [0.5, -1.0], 5.0, 0.25, 12.0, 2048)
        assert np.min(mods) > 1.0 - 1e-6
        assert np.max(np.abs(phases)) < 1e-6

    def test_inverted_stretched(self):
        # time window limited by grid cost: the state stretches like e^t
        # (by 150x in width over this run)
        model = make_model("inverted", lam=1.0)
        mods, phases = self.run_compare(model, [0.0, 0.0], 2.5, 0.125, 20.0, 4096,
                                        refine=4.0)
        assert np.min(mods) > 1.0 - 1e-6
        assert np.max(np.abs(phases)) < 1e-5

    def test_harmonic_squeezed_breathing(self):
        model = make_model("harmonic", omega=2.0)
        mods, phases = self.run_compare(model, [0.0, 0.5], 3.0, 0.125, 5.0, 2048, z=1j)
        assert np.min(mods) > 1.0 - 1e-6
        assert np.max(np.abs(phases)) < 1e-6


class TestPlanGrid:
    def test_plan_covers_free_spread(self):
        model = make_model("free")
        traj = integrate_flow(model, [0.0, 0.0], 10.0, 0.5)
        prop = propagate_gaussian(traj, SiegelForm([[1j]]), 0.1)
        spec = plan_grid(traj, prop.widths, 0.1)
        psi0 = from_gaussian(prop.states[0], spec)
        evo = split_step_evolve(model, psi0, 10.0, 0.5)
        assert abs(exact_width(evo.states[-1]) - prop.widths.sigma[-1]) < 1e-6

    def test_grid_doubling_stable_width(self):
        # same window, twice the points: reported widths move below 1e-8
        model = make_model("quartic")
        traj = integrate_flow(model, [0.0, 1.0], 1.0, 0.25)
        prop = propagate_gaussian(traj, SiegelForm([[1j]]), 0.1)
        spec = plan_grid(traj, prop.widths, 0.1)
        window = spec.dx * spec.n
        widths = []
        dt = 0.9 * max_split_step(model, from_gaussian(prop.states[0], spec))
        for n in (spec.n, 2 * spec.n):
            psi0 = from_gaussian(prop.states[0], GridSpec(spec.x0, window / n, n))
            evo = split_step_evolve(model, psi0, 1.0, 1.0, dt=dt)
            widths.append(exact_width(evo.states[-1]))
        assert abs(widths[0] - widths[1]) < 1e-8


class TestScalingStudy:
    def test_harmonic_flags_exact_regime(self):
        study = hbar_scaling_study(make_model("harmonic", omega=1.0),
                                   [0.0, 1.0], [[1j]], [0.1, 0.05, 0.025], 1.0)
        assert study.exact_regime
        assert np.all(study.errors < 1e-6)

    def test_quartic_sqrt_hbar(self):
        study = hbar_scaling_study(make_model("quartic"),
                                   [0.0, 1.0], [[1j]], [0.1, 0.05, 0.025], 1.0)
        assert not study.exact_regime
        assert 0.35 < study.slope < 0.65

    def test_validation(self):
        with pytest.raises(ValidationError):
            hbar_scaling_study(make_model("free"), [0.0, 0.0], [[1j]], [0.1, 0.05], 1.0)
        with pytest.raises(ValidationError):
            hbar_scaling_study(make_model("free"), [0.0, 0.0], [[1j]],
                               [0.5, 0.25, 0.125], 10.0)


class TestMidRunGuards:
    def test_tilted_potential_aliasing_abort(self):
        # strong tilt accelerates the packet; its momentum content reaches the
        # guard band mid-run and the evolution aborts naming the time
        model = make_model("wannier_stark", v=0.5, eps=4.0)
        psi0, _ = ground_on_grid(hbar=1.0, half_width=12.0, n=256)
        with pytest.raises(AliasingError) as excinfo:
            split_step_evolve(model, psi0, t_end=80.0, dt_out=0.5, absorber=False)
        assert "t=" in str(excinfo.value)

    def test_scaling_study_attaches_partial(self, monkeypatch):
        # an undersized grid on the second run aborts the study but keeps the
        # errors gathered so far attached to the exception
        import semigauss.oracle as oracle_mod
        from semigauss import CoverageError
        real_plan = oracle_mod.plan_grid
        calls = {"n": 0}

        def failing_plan(traj, widths, hbar, **kw):
            calls["n"] += 1
            if calls["n"] >= 2:
                return GridSpec(-0.5, 1.0 / 64, 64)   # cannot hold the packet
            return real_plan(traj, widths, hbar, **kw)

        monkeypatch.setattr(oracle_mod, "plan_grid", failing_plan)
        model = make_model("quartic")
        with pytest.raises((AliasingError, CoverageError, ValidationError)) as excinfo:
            oracle_mod.hbar_scaling_study(model, [0.0, 1.0], [[1j]],
                                          [0.1, 0.05, 0.025], t_probe=1.0)
        assert hasattr(excinfo.value, "partial")
        assert len(excinfo.value.partial.errors) == 1
