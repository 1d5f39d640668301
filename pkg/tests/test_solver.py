import math

import numpy as np
import pytest

from neutralflow.geometry import PsiProfile, StationaryCoeffs, stationary_profile
from neutralflow.solver import (
    DefinitenessError,
    FlowState,
    SolverConfig,
    apply_boundary,
    boundary_implied_u,
    initial_u_bounds,
    make_initial,
    monitors,
    reduced_rhs,
    run,
    step,
)

C0 = 2.0 * math.sin(0.3) ** 2


def quick_config(**kw):
    base = dict(theta0=0.3, c0=C0, c1=0.0, grid_n=100, initial_kind="perturbed",
                initial_amplitude=0.1 * C0, t_end=5.0)
    base.update(kw)
    return SolverConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(theta0=2.0).validate()
        with pytest.raises(ValueError):
            SolverConfig(c0=-1.0).validate()
        with pytest.raises(ValueError):
            SolverConfig(scheme="euler").validate()
        with pytest.raises(ValueError):
            SolverConfig(dt_safety=1.5).validate()

    def test_neumann_variants(self):
        c = SolverConfig(theta0=0.3, c0=1.0, c1=0.25)
        assert c.neumann_slope() == pytest.approx(2.0 / math.tan(0.3) - 0.25)
        lit = SolverConfig(theta0=0.3, c0=1.0, c1=0.25,
                           neumann_variant="paper-literal-cot-two-theta")
        assert lit.neumann_slope() == pytest.approx(2.0 / math.tan(0.6) + 0.25)


class TestMakeInitial:
    def test_limit_kind_is_steady(self):
        cfg = quick_config(initial_kind="limit", initial_amplitude=0.0)
        prof = make_initial(cfg)
        rhs = reduced_rhs(prof, cfg.k)
        assert np.max(np.abs(rhs)) <= 10.0 * cfg.h**2

    def test_zero_amplitude_equals_limit(self):
        a = make_initial(quick_config(initial_kind="limit"))
        b = make_initial(quick_config(initial_amplitude=0.0))
        assert np.array_equal(a.values, b.values)

    def test_perturbed_keeps_boundary_data(self):
        cfg = quick_config()
        prof = make_initial(cfg)
        assert prof.definite
        assert prof.values[0] == 0.0
        assert prof.values[-1] == pytest.approx(C0, rel=1e-14)
        c2, c3 = initial_u_bounds(prof)
        assert 0.0 < c2 < c3

    def test_inadmissible_rejected(self):
        cfg = quick_config(initial_amplitude=10.0 * C0)
        with pytest.raises(DefinitenessError):
            make_initial(cfg)

    def test_custom_initial(self):
        cfg = quick_config(initial_kind="custom")
        with pytest.raises(ValueError):
            make_initial(cfg)


class TestReducedRhs:
    def test_stationary_family_small_residual(self):
        for n in (100, 200, 400):
            grid = np.linspace(0.0, 0.3, n + 1)
            prof = stationary_profile(StationaryCoeffs(1.0, -1.0), grid)
            rhs = reduced_rhs(prof, k=2.0)
            assert np.max(np.abs(rhs)) <= 10.0 * (0.3 / n) ** 2

    def test_axis_regularization(self):
        # psi = 2 sin^2 theta ~ 2 theta^2: rhs(0) = sqrt(2)(2-k)/2
        grid = np.linspace(0.0, 0.3, 301)
        prof = stationary_profile(StationaryCoeffs(1.0, -1.0), grid)
        r1 = reduced_rhs(prof, k=1.0)
        assert r1[0] == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-5)
        r2 = reduced_rhs(prof, k=2.0)
        assert r2[0] == 0.0

    def test_definiteness_loss_aborts(self):
        grid = np.linspace(0.0, 0.3, 51)
        values = np.sin(grid) ** 2
        values[25] = values[27]  # local flat spot
        prof = PsiProfile(grid, values)
        with pytest.raises(DefinitenessError) as err:
            reduced_rhs(prof, k=2.0)
        assert err.value.node is not None

    def test_monotone_profile_finite(self):
        grid = np.linspace(0.0, 0.3, 101)
        prof = PsiProfile(grid, np.tan(grid) ** 2, axis_pinned=True)
        assert np.all(np.isfinite(reduced_rhs(prof, k=2.0)))


class TestApplyBoundary:
    def test_dirichlet_pinned_constant(self):
        cfg = quick_config()
        res = run(quick_config(t_end=0.01))
        for _, prof in res.snapshots:
            assert prof.values[-1] == C0

    def test_neumann_enforced_keeps_dirichlet_to_h2(self):
        cfg = quick_config(boundary_mode="neumann-enforced", initial_kind="limit",
                           initial_amplitude=0.0)
        prof = make_initial(cfg)
        vals = prof.values.copy()
        apply_boundary(vals, cfg)
        assert vals[-1] == pytest.approx(C0, abs=10.0 * cfg.h**2)

    def test_boundary_slope_converges_to_neumann_value(self):
        cfg = quick_config()
        res = run(cfg)
        target = cfg.neumann_slope()
        assert res.monitors[-1].boundary_slope == pytest.approx(target, abs=1e-4)


class TestStep:
    def test_limit_profile_is_fixed(self):
        # at the default resolution the discrete steady state sits ~6e-9 from
        # the sampled limit, so 1000 steps move stationary data by < 1e-9
        for scheme in ("explicit-rk2", "semi-implicit"):
            cfg = quick_config(scheme=scheme, grid_n=400, initial_kind="limit",
                               initial_amplitude=0.0)
            state = FlowState(t=0.0, profile=make_initial(cfg))
            first = state.profile.values.copy()
            for _ in range(1000):
                state = step(state, cfg)
            assert np.max(np.abs(state.profile.values - first)) <= 1e-9

    def test_semi_implicit_stable_at_ten_times_explicit_bound(self):
        cfg = quick_config(scheme="semi-implicit", dt_safety=1.0, semi_dt_factor=10.0)
        state = FlowState(t=0.0, profile=make_initial(cfg))
        for _ in range(2000):
            state = step(state, cfg)
        assert np.all(np.isfinite(state.profile.values))
        assert state.profile.definite

    def test_explicit_step_matches_richardson_pair(self):
        # Heun = Euler + O(dt^2): halving dt must shrink the defect by 4
        def defect(safety):
            cfg = quick_config(scheme="explicit-rk2", dt_safety=safety)
            state = FlowState(t=0.0, profile=make_initial(cfg))
            s1 = step(state, cfg)
            euler = state.profile.values + s1.dt_last * reduced_rhs(state.profile, cfg.k)
            apply_boundary(euler, cfg)
            return s1.dt_last, np.max(np.abs(s1.profile.values - euler))

        dt_a, d_a = defect(0.5)
        dt_b, d_b = defect(0.25)
        order = math.log(d_a / d_b) / math.log(dt_a / dt_b)
        assert order == pytest.approx(2.0, abs=0.1)

    def test_nan_aborts_with_state(self):
        cfg = quick_config()
        grid = cfg.grid
        values = np.tan(grid) ** 2
        values[50] = np.nan
        state = FlowState(t=0.0, profile=PsiProfile.__new__(PsiProfile))
        state.profile.theta_grid = grid
        state.profile.values = values
        state.profile.axis_pinned = True
        with pytest.raises(DefinitenessError):
            step(state, cfg)


class TestMonitors:
    def test_limit_profile_sigma_floor(self):
        cfg = quick_config(initial_kind="limit", initial_amplitude=0.0)
        rec = monitors(FlowState(t=0.0, profile=make_initial(cfg)), cfg)
        assert rec.sup_sigma <= 10.0 * cfg.h**2
        assert rec.axis_value == 0.0

    def test_u_constant_on_cosine_family(self):
        cfg = quick_config(c1=0.05, initial_kind="limit", initial_amplitude=0.0)
        rec = monitors(FlowState(t=0.0, profile=make_initial(cfg)), cfg)
        # psi' = -2b sin(2 theta): centered differences keep u exactly constant
        assert rec.u_max - rec.u_min <= 1e-10

    def test_B_finite_on_perturbed_data(self):
        cfg = quick_config()
        rec = monitors(FlowState(t=0.0, profile=make_initial(cfg)), cfg)
        assert math.isfinite(rec.B_min) and math.isfinite(rec.B_max)


class TestRun:
    def test_holomorphic_convergence(self):
        cfg = quick_config(grid_n=200)
        res = run(cfg)
        rep = res.report
        assert rep.converged
        assert rep.linf_error_to_limit <= 5e-6
        assert res.monitors[-1].sup_sigma <= 10.0 * cfg.h**2
        assert rep.limit.holomorphic

    def test_mixed_case_converges_to_limit_coefficients(self):
        cfg = quick_config(grid_n=200, c1=0.05)
        res = run(cfg)
        assert res.report.converged
        assert res.report.axis_compatible
        assert res.report.linf_error_to_limit <= 5e-6

    def test_infinite_tolerance_returns_immediately(self):
        cfg = quick_config(tol_steady=math.inf)
        res = run(cfg)
        assert res.report.converged
        assert res.report.t_converged == 0.0
        assert len(res.monitors) == 1

    def test_t_end_zero_not_converged(self):
        cfg = quick_config(t_end=0.0)
        res = run(cfg)
        assert not res.report.converged
        assert res.monitors[-1].steady_residual > cfg.tol_steady

    def test_axis_pinned_forever(self):
        res = run(quick_config(grid_n=100))
        assert all(abs(r.axis_value) <= 1e-10 for r in res.monitors)

    def test_maximum_principle_envelopes(self):
        cfg = quick_config(grid_n=100)
        res = run(cfg)
        u0_min, u0_max = res.monitors[0].u_min, res.monitors[0].u_max
        ub = boundary_implied_u(cfg)
        lo, hi = min(u0_min, ub) - 1e-8, max(u0_max, ub) + 1e-8
        for rec in res.monitors:
            assert lo <= rec.u_min and rec.u_max <= hi

    def test_scheme_consistency(self):
        a = run(quick_config(scheme="explicit-rk2"))
        b = run(quick_config(scheme="semi-implicit"))
        diff = np.max(np.abs(a.report.final_profile.values - b.report.final_profile.values))
        assert diff <= 1e-7

    def test_spatial_order_two(self):
        errs = []
        for n in (50, 100, 200):
            errs.append(run(quick_config(grid_n=n)).report.linf_error_to_limit)
        s1 = math.log(errs[0] / errs[1]) / math.log(2.0)
        s2 = math.log(errs[1] / errs[2]) / math.log(2.0)
        assert s1 == pytest.approx(2.0, abs=0.1)
        assert s2 == pytest.approx(2.0, abs=0.1)

    def test_paper_literal_k1_not_stationary_on_cosine_family(self):
        cfg = quick_config(k=1.0, initial_kind="limit", initial_amplitude=0.0, grid_n=100)
        prof = make_initial(cfg)
        rhs = reduced_rhs(prof, k=1.0)
        # mismatch is sqrt(psi) cot(2 theta), far above the k=2 floor
        mid = cfg.grid_n // 2
        expect = math.sqrt(prof.values[mid]) / math.tan(2.0 * cfg.grid[mid])
        assert abs(rhs[mid]) == pytest.approx(expect, rel=1e-3)
