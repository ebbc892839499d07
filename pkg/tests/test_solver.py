import numpy as np
import pytest
from scipy import sparse

from semifem.assembly import (apply_dirichlet, assemble_load, assemble_mass,
                              assemble_nonlinear_residual, assemble_stiffness)
from semifem.femfunction import FemFunction, interpolate
from semifem.mesh import preset_polygon, refine_uniform, triangulate_convex_polygon
from semifem.nonlinearity import PowerLaw, cut
from semifem.quadrature import edge_midpoint_rule, rule_of_degree
from semifem.solver import (CgError, IndefiniteSystemError, NewtonError,
                            SolverConfig, cg_solve, solve_semilinear,
                            verify_uniform_bound)


def square_mesh(level):
    mesh = triangulate_convex_polygon(preset_polygon("unit-square"))
    for _ in range(level):
        mesh = refine_uniform(mesh)
    return mesh


def pentagon_mesh(level):
    mesh = triangulate_convex_polygon(preset_polygon("pentagon"))
    for _ in range(level):
        mesh = refine_uniform(mesh)
    return mesh


def kink_term():
    return PowerLaw(scale=50.0, exponent=1 / 3, shift=-1.0)


ONE = lambda x, y: np.ones_like(x)


class TestCg:
    def test_identity_converges_immediately(self):
        matrix = sparse.identity(6, format="csr")
        rhs = np.arange(1.0, 7.0)
        x, iters = cg_solve(matrix, rhs, tol=1e-12)
        np.testing.assert_allclose(x, rhs, rtol=1e-14)
        assert iters <= 1

    def test_two_by_two_oracle(self):
        matrix = sparse.csr_matrix(np.array([[4.0, 1.0], [1.0, 3.0]]))
        x, _ = cg_solve(matrix, np.array([1.0, 2.0]), tol=1e-14)
        np.testing.assert_allclose(x, [1.0 / 11.0, 7.0 / 11.0], atol=1e-13)

    def test_zero_rhs(self):
        matrix = sparse.csr_matrix(np.array([[4.0, 1.0], [1.0, 3.0]]))
        x, iters = cg_solve(matrix, np.zeros(2))
        assert not np.any(x)
        assert iters == 0

    def test_residual_bound_honored(self):
        mesh = square_mesh(3)
        lhs, rhs = apply_dirichlet(assemble_stiffness(mesh),
                                   assemble_load(mesh, ONE, edge_midpoint_rule()),
                                   mesh)
        tol = 1e-11
        x, _ = cg_solve(lhs, rhs, tol=tol)
        assert np.linalg.norm(lhs @ x - rhs) <= tol * np.linalg.norm(rhs)

    def test_indefinite_detected(self):
        matrix = sparse.csr_matrix(np.diag([1.0, -1.0]))
        with pytest.raises(IndefiniteSystemError):
            cg_solve(matrix, np.array([1.0, 1.0]))

    def test_nonconvergence_raises_with_history(self):
        mesh = square_mesh(3)
        lhs, rhs = apply_dirichlet(assemble_stiffness(mesh),
                                   assemble_load(mesh, ONE, edge_midpoint_rule()),
                                   mesh)
        with pytest.raises(CgError) as err:
            cg_solve(lhs, rhs, tol=1e-14, maxit=3)
        assert len(err.value.residual_history) == 3


class TestSolve:
    def test_trivial_problem_one_step(self):
        mesh = square_mesh(2)
        u, stats = solve_semilinear(mesh, PowerLaw(weight=0.0),
                                    lambda x, y: np.zeros_like(x))
        assert not np.any(u.coeffs)
        assert stats.newton_iterations == 1
        assert stats.final_residual_norm == 0.0

    def test_linear_reaction_matches_dense_oracle(self):
        # d(x, u) = u with f = 1: the fixed point solves (A + M) u = F;
        # oracle is a dense direct solve of the closed-form matrices.
        mesh = square_mesh(3)
        u, _ = solve_semilinear(mesh, PowerLaw(), ONE)
        lhs, rhs = apply_dirichlet(
            (assemble_stiffness(mesh) + assemble_mass(mesh)).tocsr(),
            assemble_load(mesh, ONE, edge_midpoint_rule()), mesh)
        dense = np.linalg.solve(lhs.toarray(), rhs)
        assert np.max(np.abs(u.coeffs - dense)) <= 1e-9

    def test_linear_consistency_single_newton_step(self):
        # With an exact slope matrix, one step from zero lands on the
        # solution up to the inner CG tolerance.
        mesh = square_mesh(3)
        d = PowerLaw(scale=2.0)
        u, stats = solve_semilinear(mesh, d, ONE, initial=FemFunction.zeros(mesh))
        assert stats.newton_iterations == 1
        lhs, rhs = apply_dirichlet(
            (assemble_stiffness(mesh) + 2.0 * assemble_mass(mesh)).tocsr(),
            assemble_load(mesh, ONE, edge_midpoint_rule()), mesh)
        dense = np.linalg.solve(lhs.toarray(), rhs)
        assert np.max(np.abs(u.coeffs - dense)) <= 1e-9

    def test_solution_in_dirichlet_space(self):
        mesh = pentagon_mesh(2)
        u, _ = solve_semilinear(mesh, kink_term(), ONE)
        assert u.in_dirichlet_space()

    def test_uniqueness_from_two_guesses(self):
        cfg = SolverConfig()
        mesh = pentagon_mesh(3)
        u1, _ = solve_semilinear(mesh, kink_term(), ONE, cfg)
        guess = interpolate(mesh, lambda x, y: 0.1 * x * y)
        u2, _ = solve_semilinear(mesh, kink_term(), ONE, cfg, initial=guess)
        assert np.max(np.abs(u1.coeffs - u2.coeffs)) <= 10 * cfg.residual_tol

    def test_residual_certificate(self):
        mesh = pentagon_mesh(3)
        d = kink_term()
        u, stats = solve_semilinear(mesh, d, ONE)
        fresh = np.where(
            ~mesh.boundary_vertex,
            assemble_stiffness(mesh) @ u.coeffs
            + assemble_nonlinear_residual(mesh, d, u, rule_of_degree(5))
            - assemble_load(mesh, ONE, edge_midpoint_rule()),
            0.0)
        norm = np.linalg.norm(fresh) / np.sqrt(mesh.num_vertices)
        assert abs(norm - stats.final_residual_norm) <= 1e-13 * max(norm, 1e-300)

    def test_cut_consistency(self):
        cfg = SolverConfig()
        mesh = pentagon_mesh(3)
        d = kink_term()
        u, _ = solve_semilinear(mesh, d, ONE, cfg)
        bound = 2.0 * u.max_norm() + 1.0
        v, _ = solve_semilinear(mesh, cut(d, bound), ONE, cfg)
        assert np.max(np.abs(u.coeffs - v.coeffs)) <= 10 * cfg.residual_tol

    def test_newton_failure_carries_best_iterate(self):
        cfg = SolverConfig(max_newton=1)
        mesh = pentagon_mesh(2)
        with pytest.raises(NewtonError) as err:
            solve_semilinear(mesh, kink_term(), ONE, cfg)
        assert err.value.best is not None
        assert len(err.value.residual_history) >= 2

    def test_restart_from_converged_solution(self):
        # Re-solving from the converged iterate must succeed quietly even
        # though the residual cannot decrease further.
        mesh = pentagon_mesh(2)
        u, _ = solve_semilinear(mesh, kink_term(), ONE)
        again, stats = solve_semilinear(mesh, kink_term(), ONE, initial=u)
        assert stats.newton_iterations == 1
        assert np.max(np.abs(again.coeffs - u.coeffs)) <= 1e-10

    def test_initial_guess_must_share_mesh(self):
        mesh = pentagon_mesh(1)
        other = pentagon_mesh(2)
        with pytest.raises(ValueError, match="mesh"):
            solve_semilinear(mesh, PowerLaw(), ONE,
                             initial=FemFunction.zeros(other))

    def test_stats_counts(self):
        mesh = pentagon_mesh(2)
        _, stats = solve_semilinear(mesh, kink_term(), ONE)
        assert stats.newton_iterations >= 1
        assert stats.total_cg_iterations > 0
        assert stats.final_residual_norm <= SolverConfig().residual_tol
        assert stats.residual_history[-1] == stats.final_residual_norm

    def test_random_convex_domains(self):
        # Robustness sweep over non-preset geometry: the certificate and
        # the Dirichlet constraint hold on arbitrary convex polygons.
        from semifem.mesh import Polygon
        rng = np.random.default_rng(23)
        cfg = SolverConfig()
        for n in (4, 6, 9):
            angles = np.sort(rng.uniform(0, 2 * np.pi, n))
            while np.min(np.diff(angles)) < 0.15:
                angles = np.sort(rng.uniform(0, 2 * np.pi, n))
            poly = Polygon(np.column_stack([1.3 * np.cos(angles),
                                            0.8 * np.sin(angles)]))
            mesh = refine_uniform(refine_uniform(triangulate_convex_polygon(poly)))
            d = PowerLaw(scale=5.0, exponent=0.5, shift=-0.5)
            u, stats = solve_semilinear(mesh, d, ONE, cfg)
            assert u.in_dirichlet_space()
            assert stats.final_residual_norm <= cfg.residual_tol


class TestUniformBound:
    def test_same_function(self):
        mesh = square_mesh(2)
        u = interpolate(mesh, lambda x, y: x * (1 - x) * y)
        passed, ratio = verify_uniform_bound(u, u)
        assert passed and ratio == pytest.approx(1.0)

    def test_zero_passes(self):
        mesh = square_mesh(1)
        passed, _ = verify_uniform_bound(FemFunction.zeros(mesh),
                                         interpolate(mesh, lambda x, y: x))
        assert passed

    def test_inflated_fails(self):
        mesh = square_mesh(1)
        ref = interpolate(mesh, lambda x, y: x)
        big = FemFunction(mesh, 3.0 * ref.coeffs)
        passed, ratio = verify_uniform_bound(big, ref)
        assert not passed and ratio == pytest.approx(3.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(residual_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_newton=0)
    with pytest.raises(ValueError):
        SolverConfig(armijo_beta=1.0)
