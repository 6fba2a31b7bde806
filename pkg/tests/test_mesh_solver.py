import numpy as np
import pytest

import oracles
from conftest import assert_close
from rhd2d import physics, problems
from rhd2d.errors import (
    AdmissibilityError,
    CflViolationError,
    ConfigurationError,
    PcpAuditError,
)
from rhd2d.mesh_solver import (
    BoundarySpec,
    Field,
    Grid,
    Inflow,
    SolverConfig,
    assemble_fluxes,
    compute_dt,
    fill_ghosts,
    periodic_boundaries,
    run,
    step,
)
from rhd2d.recovery import recover_with_iterations


def uniform_field(grid, eos, prim=(1.0, 0.0, 0.0, 1.0)):
    return Field.from_primitives(grid, lambda x, y: np.broadcast_to(
        np.asarray(prim), np.broadcast_shapes(x.shape, y.shape) + (4,)), eos)


def smooth_periodic_field(grid, eos):
    def init(x, y):
        rho = 1.0 + 0.4 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        vx = 0.2 * np.cos(2 * np.pi * x)
        vy = -0.15 * np.sin(2 * np.pi * y)
        p = 0.8 + 0.3 * np.cos(2 * np.pi * (x + y))
        out = np.empty(rho.shape + (4,))
        out[..., 0], out[..., 1], out[..., 2], out[..., 3] = rho, vx, vy, p
        return out

    return Field.from_primitives(grid, init, eos)


class TestGrid:
    def test_spacing(self):
        grid = Grid(10, 20, 0.0, 1.0, 0.0, 4.0)
        assert grid.dx == 0.1 and grid.dy == 0.2
        assert_close(grid.centers_x()[0], 0.05, rel=1e-15)
        assert grid.centers_x(with_ghosts=True).shape == (12,)

    @pytest.mark.parametrize("args", [(0, 4, 0, 1, 0, 1), (4, 4, 1, 0, 0, 1)])
    def test_validation(self, args):
        with pytest.raises(ConfigurationError):
            Grid(*args)


class TestBoundarySpec:
    def test_periodic_pairing(self):
        with pytest.raises(ConfigurationError):
            BoundarySpec(left="periodic", right="outflow")

    def test_unknown_rule(self):
        with pytest.raises(ConfigurationError):
            BoundarySpec(left="bogus")

    def test_inflow_validation(self):
        with pytest.raises(ConfigurationError):
            Inflow(state=(1.0, 0.0, 0.0), span=(0.0, 1.0))
        with pytest.raises(ConfigurationError):
            Inflow(state=(1.0, 0.0, 0.0, 1.0), span=(1.0, 0.0))


class TestSolverConfig:
    @pytest.mark.parametrize("kwargs", [{"cfl_sigma": 1.5}, {"cfl_sigma": 0.0},
                                        {"alpha": 0.5}, {"mode": "bogus"}])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigurationError):
            SolverConfig(**kwargs)


class TestFillGhosts:
    def test_uniform_all_rules(self, eos53):
        grid = Grid(4, 4, 0.0, 1.0, 0.0, 1.0)
        for bcs in (periodic_boundaries(), BoundarySpec(),
                    BoundarySpec(left="reflect", right="reflect")):
            field = uniform_field(grid, eos53)
            fill_ghosts(field, bcs, eos53)
            inner = field.cells[1, 1]
            assert np.all(field.cells == inner)

    def test_reflect_negates_normal_momentum(self, eos53):
        grid = Grid(4, 4, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53, prim=(1.0, 0.3, 0.1, 1.0))
        fill_ghosts(field, BoundarySpec(left="reflect"), eos53)
        inner = field.cells[1, 1:-1]
        ghost = field.cells[0, 1:-1]
        assert np.array_equal(ghost[:, physics.MOMX], -inner[:, physics.MOMX])
        assert np.array_equal(ghost[:, physics.MOMY], inner[:, physics.MOMY])
        assert np.array_equal(ghost[:, physics.DEN], inner[:, physics.DEN])

    def test_periodic_wraps(self, eos53):
        grid = Grid(4, 4, 0.0, 1.0, 0.0, 1.0)
        field = smooth_periodic_field(grid, eos53)
        fill_ghosts(field, periodic_boundaries(), eos53)
        cells = field.cells
        assert np.array_equal(cells[0, 1:-1], cells[-2, 1:-1])
        assert np.array_equal(cells[-1, 1:-1], cells[1, 1:-1])
        assert np.array_equal(cells[:, 0], cells[:, -2])
        # corner ghost wraps diagonally
        assert np.array_equal(cells[0, 0], cells[-2, -2])

    def test_inflow_nozzle(self, eos53):
        grid = Grid(4, 4, 0.0, 2.0, 0.0, 2.0)
        beam = (0.01, 0.0, 0.9, 0.05)
        bcs = BoundarySpec(bottom=Inflow(state=beam, span=(0.0, 1.0)))
        field = uniform_field(grid, eos53)
        fill_ghosts(field, bcs, eos53)
        beam_cons = physics.prim_to_cons(physics.primitive(*beam), eos53)
        # centers 0.25, 0.75 lie inside the nozzle; 1.25, 1.75 outside
        assert np.array_equal(field.cells[1, 0], beam_cons)
        assert np.array_equal(field.cells[2, 0], beam_cons)
        assert np.array_equal(field.cells[3, 0], field.cells[3, 1])

    def test_jet_corner_ghost_carries_beam(self):
        """Behind a reflecting wall whose mirror image the nozzle covers, the
        corner ghost holds the beam too (zero wall-normal beam velocity)."""
        config, spec = problems.jet_setup("hot", 0.99, 1.72)
        grid = Grid(60, 150, 0.0, 12.0, 0.0, 30.0)
        field = Field.from_primitives(grid, spec.initial, spec.eos)
        fill_ghosts(field, spec.boundaries, spec.eos)
        beam_cons = physics.prim_to_cons(
            physics.primitive(config.beam_density, 0.0, config.v_beam, config.beam_pressure),
            spec.eos,
        )
        assert np.array_equal(field.cells[0, 0], beam_cons)   # corner ghost
        assert np.array_equal(field.cells[1, 0], beam_cons)   # first nozzle column
        assert np.array_equal(field.cells[-1, 0], field.cells[-1, 1])  # outside nozzle


class TestComputeDt:
    def test_uniform_rest_value(self, eos53):
        # sigma * dx / (alpha * c_s) with c_s = 0.6900655593423542
        grid = Grid(10, 10, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53)
        dt = compute_dt(field, eos53, 0.45, alpha=2.0)
        assert_close(dt, 0.45 * 0.1 / (2.0 * 0.6900655593423542178), rel=1e-14)

    def test_linear_in_sigma(self, eos53):
        grid = Grid(8, 8, 0.0, 1.0, 0.0, 1.0)
        field = smooth_periodic_field(grid, eos53)
        assert compute_dt(field, eos53, 0.9) == 2.0 * compute_dt(field, eos53, 0.45)

    def test_halves_under_refinement(self, eos53):
        coarse = smooth_periodic_field(Grid(8, 8, 0.0, 1.0, 0.0, 1.0), eos53)
        fine = smooth_periodic_field(Grid(16, 16, 0.0, 1.0, 0.0, 1.0), eos53)
        # frozen comparison on matching extrema: refine a uniform field instead
        cu = uniform_field(Grid(8, 8, 0.0, 1.0, 0.0, 1.0), eos53)
        fu = uniform_field(Grid(16, 16, 0.0, 1.0, 0.0, 1.0), eos53)
        assert compute_dt(fu, eos53, 0.45) == 0.5 * compute_dt(cu, eos53, 0.45)
        assert compute_dt(fine, eos53, 0.45) <= compute_dt(coarse, eos53, 0.45)

    def test_non_admissible_cell_identified(self, eos53):
        grid = Grid(4, 4, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53)
        field.interior[2, 3] = [1.0, 3.0, 0.0, 2.0]
        with pytest.raises(AdmissibilityError) as err:
            compute_dt(field, eos53, 0.45)
        assert err.value.index == (2, 3)


class TestAssembleFluxes:
    def test_uniform_field_gives_physical_fluxes(self, eos53):
        grid = Grid(6, 5, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53, prim=(1.0, 0.3, -0.2, 0.7))
        fill_ghosts(field, periodic_boundaries(), eos53)
        prim, _ = recover_with_iterations(field.cells, eos53)
        ref_x = physics.physical_flux(prim[1, 1], field.cells[1, 1], 0)
        ref_y = physics.physical_flux(prim[1, 1], field.cells[1, 1], 1)
        for dt in (1e-3, 2e-2):
            fhat, ghat = assemble_fluxes(field, dt, eos53, SolverConfig(), prim)
            assert np.all(fhat == ref_x)
            assert np.all(ghat == ref_y)

    def test_y_invariant_reduces_to_1d_bitwise(self, eos53):
        grid = Grid(8, 6, -1.0, 1.0, 0.0, 1.0)
        profile = np.array(
            [(1.0, 0.0, 0.0, 1.0)] * 4 + [(0.125, 0.0, 0.0, 0.1)] * 4
        )

        def init(x, y):
            idx = np.clip(((x + 1.0) / 0.25).astype(int), 0, 7)
            return profile[idx] * np.ones_like(y)[..., None]

        field = Field.from_primitives(grid, init, eos53)
        bcs = BoundarySpec(top="periodic", bottom="periodic")
        fill_ghosts(field, bcs, eos53)
        prim, _ = recover_with_iterations(field.cells, eos53)
        dt = 0.5 * compute_dt(field, eos53, 0.45, 2.0, prim)
        multi = assemble_fluxes(field, dt, eos53, SolverConfig(mode="multidimensional"), prim)
        split = assemble_fluxes(field, dt, eos53, SolverConfig(mode="dimension_split"), prim)
        # the x-face composite collapses onto the 1D flux of the face pair
        assert np.array_equal(multi[0], split[0])
        # the y-face flux keeps a transverse average, but its differences
        # vanish row to row, so the two modes update the field identically
        assert np.all(multi[1][:, 1:] == multi[1][:, :-1])
        assert np.all(split[1][:, 1:] == split[1][:, :-1])

    def test_matches_term_by_term_oracle_on_rp1(self, eos53):
        """First-step composite fluxes against a scalar recomposition."""
        spec = problems.problem_by_name("rp1")
        grid = Grid(4, 4, -1.0, 1.0, -1.0, 1.0)
        field = Field.from_primitives(grid, spec.initial, eos53)
        fill_ghosts(field, spec.boundaries, eos53)
        prim, _ = recover_with_iterations(field.cells, eos53)
        dt = compute_dt(field, eos53, 0.45, 2.0, prim)
        fhat, ghat = assemble_fluxes(field, dt, eos53, SolverConfig(), prim)

        cons = field.cells
        gamma = eos53.gamma_adiabatic
        lam_x = physics.eigenvalues(prim, eos53, 0)
        lam_y = physics.eigenvalues(prim, eos53, 1)
        flux_x = physics.physical_flux(prim, cons, 0)
        flux_y = physics.physical_flux(prim, cons, 1)

        def corner(i, j):
            """Corner data (vertex between cells i,i+1 x j,j+1, ghosted idx)."""
            keys = {"ld": (i, j), "rd": (i + 1, j), "lu": (i, j + 1), "ru": (i + 1, j + 1)}
            u = {k: cons[v] for k, v in keys.items()}
            fx = {k: flux_x[v] for k, v in keys.items()}
            fy = {k: flux_y[v] for k, v in keys.items()}
            cells = list(keys.values())
            s_l = 2.0 * min(lam_x.lam1[v] for v in cells)
            s_r = 2.0 * max(lam_x.lam4[v] for v in cells)
            s_d = 2.0 * min(lam_y.lam1[v] for v in cells)
            s_u = 2.0 * max(lam_y.lam4[v] for v in cells)
            return u, fx, fy, (s_l, s_r, s_d, s_u)

        def corner_flux(i, j):
            u, fx, fy, sp = corner(i, j)
            two_sided = sp[0] < 0.0 < sp[1] and sp[2] < 0.0 < sp[3]
            return oracles.corner_fluxes_from_states(u, fx, fy, sp), sp, two_sided

        nx, ny = grid.n_x, grid.n_y
        for i in range(nx + 1):          # x-faces (i+1/2, row j)
            for j in range(1, ny + 1):
                sm = 2.0 * min(lam_x.lam1[i, j], lam_x.lam1[i + 1, j])
                sp1 = 2.0 * max(lam_x.lam4[i, j], lam_x.lam4[i + 1, j])
                f1 = oracles.hll_flux_from_states(
                    cons[i, j], flux_x[i, j], cons[i + 1, j], flux_x[i + 1, j], sm, sp1
                )
                f1 = np.array([float(v) for v in f1])
                (below, _), sp_b, two_b = corner_flux(i, j - 1)
                (above, _), sp_a, two_a = corner_flux(i, j)
                sup_b = max(sp_b[3], 0.0)
                sdm_a = min(sp_a[2], 0.0)
                below = np.array([float(v) for v in below]) if two_b else f1
                above = np.array([float(v) for v in above]) if two_a else f1
                cx = dt / (2.0 * grid.dy)
                ref = f1 + cx * (sup_b * (below - f1) - sdm_a * (above - f1))
                got = fhat[i, j - 1]
                assert np.max(np.abs(got - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))

        for i in range(1, nx + 1):       # y-faces (column i, j+1/2)
            for j in range(ny + 1):
                sm = 2.0 * min(lam_y.lam1[i, j], lam_y.lam1[i, j + 1])
                sp1 = 2.0 * max(lam_y.lam4[i, j], lam_y.lam4[i, j + 1])
                g1 = oracles.hll_flux_from_states(
                    cons[i, j], flux_y[i, j], cons[i, j + 1], flux_y[i, j + 1], sm, sp1
                )
                g1 = np.array([float(v) for v in g1])
                (_, left), sp_l, two_l = corner_flux(i - 1, j)
                (_, right), sp_r, two_r = corner_flux(i, j)
                srp_l = max(sp_l[1], 0.0)
                slm_r = min(sp_r[0], 0.0)
                left = np.array([float(v) for v in left]) if two_l else g1
                right = np.array([float(v) for v in right]) if two_r else g1
                cy = dt / (2.0 * grid.dx)
                ref = g1 + cy * (srp_l * (left - g1) - slm_r * (right - g1))
                got = ghat[i - 1, j]
                assert np.max(np.abs(got - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))


class TestStep:
    def test_uniform_field_unchanged_100_steps(self, eos53):
        grid = Grid(8, 8, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53, prim=(1.0, 0.3, -0.2, 0.7))
        start = field.interior.copy()
        config = SolverConfig()
        for _ in range(100):
            fill_ghosts(field, periodic_boundaries(), eos53)
            prim, _ = recover_with_iterations(field.cells, eos53)
            dt = compute_dt(field, eos53, 0.45, 2.0, prim)
            step(field, dt, assemble_fluxes(field, dt, eos53, config, prim), config)
        assert np.array_equal(field.interior, start)

    def test_conservation_per_step_periodic(self, eos53):
        grid = Grid(32, 32, 0.0, 1.0, 0.0, 1.0)
        field = smooth_periodic_field(grid, eos53)
        config = SolverConfig()
        for _ in range(5):
            before = np.sum(field.interior, axis=(0, 1))
            fill_ghosts(field, periodic_boundaries(), eos53)
            prim, _ = recover_with_iterations(field.cells, eos53)
            dt = compute_dt(field, eos53, 0.45, 2.0, prim)
            step(field, dt, assemble_fluxes(field, dt, eos53, config, prim), config)
            after = np.sum(field.interior, axis=(0, 1))
            scale = np.maximum(np.abs(before), 1.0)
            assert np.all(np.abs(after - before) / scale <= 1e-12)

    def test_one_step_rp1_matches_flux_oracle(self, eos53):
        spec = problems.problem_by_name("rp1")
        grid = Grid(4, 4, -1.0, 1.0, -1.0, 1.0)
        field = Field.from_primitives(grid, spec.initial, eos53)
        fill_ghosts(field, spec.boundaries, eos53)
        prim, _ = recover_with_iterations(field.cells, eos53)
        dt = compute_dt(field, eos53, 0.45, 2.0, prim)
        fhat, ghat = assemble_fluxes(field, dt, eos53, SolverConfig(), prim)
        expected = field.interior.copy()
        expected -= (dt / grid.dx) * (fhat[1:, :] - fhat[:-1, :])
        expected -= (dt / grid.dy) * (ghat[:, 1:] - ghat[:, :-1])
        step(field, dt, (fhat, ghat), SolverConfig())
        assert np.array_equal(field.interior, expected)

    def test_pcp_audit_failure_carries_context(self, eos53):
        grid = Grid(4, 4, 0.0, 1.0, 0.0, 1.0)
        field = uniform_field(grid, eos53)
        bad_f = np.zeros((5, 4, 4))
        bad_f[2, 1] = [0.0, 0.0, 0.0, 1e4]  # drain energy from one cell
        bad_g = np.zeros((4, 5, 4))
        config = SolverConfig(cfl_sigma=0.4, alpha=2.0)
        with pytest.raises(PcpAuditError) as err:
            step(field, 0.05, (bad_f, bad_g), config)
        assert err.value.index == (1, 1)
        assert err.value.cfl_sigma == 0.4 and err.value.alpha == 2.0
        assert err.value.state is not None

    def test_cfl_violation_detected(self, eos53):
        spec = problems.problem_by_name("rp1")
        grid = Grid(8, 8, -1.0, 1.0, -1.0, 1.0)
        field = Field.from_primitives(grid, spec.initial, eos53)
        fill_ghosts(field, spec.boundaries, eos53)
        prim, _ = recover_with_iterations(field.cells, eos53)
        dt = compute_dt(field, eos53, 0.45, 2.0, prim)
        with pytest.raises(CflViolationError):
            assemble_fluxes(field, 50.0 * dt, eos53, SolverConfig(), prim)


class TestModes:
    def test_split_equals_multi_on_y_invariant_field(self, eos53):
        grid = Grid(24, 12, -1.0, 1.0, 0.0, 1.0)

        def init(x, y):
            rho = np.where(x < 0.0, 1.0, 0.125) * np.ones_like(y)
            p = np.where(x < 0.0, 1.0, 0.1) * np.ones_like(y)
            out = np.zeros(rho.shape + (4,))
            out[..., 0], out[..., 3] = rho, p
            out[..., 2] = 0.3  # transverse drift exercises the G fluxes
            return out

        bcs = BoundarySpec(top="periodic", bottom="periodic")
        fields = {}
        for mode in ("multidimensional", "dimension_split"):
            config = SolverConfig(mode=mode)
            field = Field.from_primitives(grid, init, eos53)
            for _ in range(10):
                fill_ghosts(field, bcs, eos53)
                prim, _ = recover_with_iterations(field.cells, eos53)
                dt = compute_dt(field, eos53, 0.45, 2.0, prim)
                step(field, dt, assemble_fluxes(field, dt, eos53, config, prim), config)
            fields[mode] = field.cells
        assert np.array_equal(fields["multidimensional"], fields["dimension_split"])

    def test_split_equals_multi_on_x_invariant_field(self, eos53):
        grid = Grid(12, 24, 0.0, 1.0, -1.0, 1.0)

        def init(x, y):
            rho = np.where(y < 0.0, 1.0, 0.125) * np.ones_like(x)
            p = np.where(y < 0.0, 1.0, 0.1) * np.ones_like(x)
            out = np.zeros(rho.shape + (4,))
            out[..., 0], out[..., 3] = rho, p
            out[..., 1] = 0.3
            return out

        bcs = BoundarySpec(left="periodic", right="periodic")
        fields = {}
        for mode in ("multidimensional", "dimension_split"):
            config = SolverConfig(mode=mode)
            field = Field.from_primitives(grid, init, eos53)
            for _ in range(10):
                fill_ghosts(field, bcs, eos53)
                prim, _ = recover_with_iterations(field.cells, eos53)
                dt = compute_dt(field, eos53, 0.45, 2.0, prim)
                step(field, dt, assemble_fluxes(field, dt, eos53, config, prim), config)
            fields[mode] = field.cells
        assert np.array_equal(fields["multidimensional"], fields["dimension_split"])


class TestRun:
    def test_zero_time_returns_initial_field(self, eos53):
        spec = problems.problem_by_name("rp1")
        grid = Grid(8, 8, -1.0, 1.0, -1.0, 1.0)
        result = run(spec, grid, SolverConfig(), t_end=0.0)
        reference = Field.from_primitives(grid, spec.initial, spec.eos)
        assert result.diagnostics.steps == 0
        assert np.array_equal(result.field.interior, reference.interior)

    def test_lands_exactly_on_snapshots_and_t_end(self):
        spec = problems.sine_wave_problem()
        seen = []
        result = run(
            spec,
            spec.default_grid(10),
            SolverConfig(),
            t_end=0.05,
            snapshot_times=[0.013, 0.04],
            on_snapshot=lambda field: seen.append(field.time),
        )
        assert seen == [0.013, 0.04, 0.05]
        assert result.field.time == 0.05
        assert result.diagnostics.dt_clamped_steps >= 3

    def test_deterministic(self):
        spec = problems.problem_by_name("rp2")
        grid = Grid(16, 16, -1.0, 1.0, -1.0, 1.0)
        a = run(spec, grid, SolverConfig(), t_end=0.1)
        b = run(spec, grid, SolverConfig(), t_end=0.1)
        assert np.array_equal(a.field.cells, b.field.cells)
        assert a.diagnostics.steps == b.diagnostics.steps

    def test_diagnostics_track_extremes(self):
        spec = problems.problem_by_name("rp2")
        grid = Grid(20, 20, -1.0, 1.0, -1.0, 1.0)
        result = run(spec, grid, SolverConfig(), t_end=0.2)
        diag = result.diagnostics
        assert diag.steps > 0
        assert 0.0 < diag.min_pressure <= 0.05
        assert diag.max_lorentz >= 1.0 / np.sqrt(1.0 - problems.RP2_VEL**2) - 0.2
        assert diag.recovery_sweeps_max >= 1
        assert diag.pcp_audit_passed
