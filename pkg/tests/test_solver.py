import numpy as np
import numpy.testing as npt
import pytest

from expspline_ade.assembly import assemble_global, reference_element_matrices
from expspline_ade.basis import Mesh, derive_constants, eval_basis
from expspline_ade.linalg import BandedMatrix
from expspline_ade.problems import (
    exact_gaussian_pulse,
    exact_pure_advection,
    gaussian_pulse_problem,
    linf_error,
    pure_advection_problem,
)
from expspline_ade.solver import (
    CoefficientVector,
    ProblemSpec,
    Stepper,
    apply_dirichlet,
    build_crank_nicolson,
    evaluate,
    fit_initial,
    knot_values,
    one_sided_derivative,
    run,
    step,
)


def spec(**kw):
    base = dict(xi=0.3, lam=0.02, a=0.0, b=2.0, n=10, p=1.5, dt=0.05, t_final=0.5, u0=np.sin)
    base.update(kw)
    return ProblemSpec(**base)


def matrices(n=8, h=0.25, p=2.0):
    mesh = Mesh(0.0, n * h, n)
    k = derive_constants(p, h)
    return mesh, k, assemble_global(mesh, reference_element_matrices(k))


class TestProblemSpec:
    @pytest.mark.parametrize(
        "kw",
        [
            {"lam": -1e-3},
            {"dt": 0.0},
            {"dt": -0.1},
            {"t_final": -1.0},
            {"t_final": 0.52},
            {"xi": np.inf},
            {"dt": 1e-9, "t_final": 1.0},  # 1e9 steps
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            spec(**kw)

    def test_step_count(self):
        assert spec(dt=0.1, t_final=0.3).n_steps == 3
        assert spec(t_final=0.0).n_steps == 0

    def test_slope_fallback(self):
        problem = spec(n=20)
        left, right = problem.initial_slopes()
        assert left == pytest.approx(np.cos(0.0), abs=1e-7)
        assert right == pytest.approx(np.cos(2.0), abs=1e-7)

    @pytest.mark.parametrize("direction", [1, -1])
    def test_one_sided_exact_on_quartics(self, direction):
        f = lambda x: 3 * x**4 - x**3 + 2 * x
        df = lambda x: 12 * x**3 - 3 * x**2 + 2
        assert one_sided_derivative(f, 0.7, 0.01, direction) == pytest.approx(df(0.7), rel=1e-9)


class TestFitInitial:
    def test_constant(self):
        problem = spec(u0=lambda x: np.full_like(x, 5.0), du0_a=0.0, du0_b=0.0)
        k = derive_constants(problem.p, problem.mesh.h)
        state = fit_initial(problem, k)
        npt.assert_allclose(state.values, 5.0 / (1 + 2 * k.alpha1), rtol=1e-13)
        npt.assert_allclose(knot_values(state, k), 5.0, rtol=1e-13)

    def test_hump_on_coarse_channel(self):
        problem = pure_advection_problem(90, 50.0, 6.8e-6, 0.0)
        k = derive_constants(problem.p, problem.mesh.h)
        knots = problem.mesh.knots
        got = knot_values(fit_initial(problem, k), k)
        assert np.max(np.abs(got - exact_pure_advection(knots, 0.0))) < 1e-10

    @pytest.mark.parametrize("n,u0,du", [(3, lambda x: x, 1.0), (7, np.cos, None)])
    def test_dense_oracle(self, n, u0, du):
        mesh = Mesh(0.0, 1.5, n)
        k = derive_constants(0.8, mesh.h)
        problem = ProblemSpec(
            xi=0, lam=0, a=mesh.a, b=mesh.b, n=n, p=0.8, dt=1, t_final=0, u0=u0,
            du0_a=du if du is not None else -np.sin(mesh.a),
            du0_b=du if du is not None else -np.sin(mesh.b),
        )
        # rows: U'(a), U(x_0..x_N), U'(b), built from the basis functions themselves
        idx = np.arange(-1, n + 2)
        rows = [[eval_basis(mesh, k, i, mesh.a, 1) for i in idx]]
        rows += [[eval_basis(mesh, k, i, x) for i in idx] for x in mesh.knots]
        rows += [[eval_basis(mesh, k, i, mesh.b, 1) for i in idx]]
        rhs = np.concatenate([[problem.du0_a], u0(mesh.knots), [problem.du0_b]])
        oracle = np.linalg.solve(np.array(rows, dtype=float), rhs)
        npt.assert_allclose(fit_initial(problem, k).values, oracle, rtol=1e-11, atol=1e-12)


class TestCrankNicolson:
    def test_degenerate_operator(self):
        _, _, (A, B, C) = matrices()
        for xi, lam, dt in ((0.0, 0.0, 0.3), (0.7, 0.1, 0.0)):
            lhs, rhs = build_crank_nicolson(A, B, C, xi, lam, dt)
            npt.assert_array_equal(lhs.data, A.data)
            npt.assert_array_equal(rhs.data, A.data)

    def test_dense_arithmetic(self):
        _, _, (A, B, C) = matrices()
        xi, lam, dt = 0.8, 0.005, 0.0125
        lhs, rhs = build_crank_nicolson(A, B, C, xi, lam, dt)
        a, b, c = A.to_dense(), B.to_dense(), C.to_dense()
        npt.assert_allclose(lhs.to_dense(), a + dt / 2 * (xi * b - lam * c), rtol=1e-14, atol=1e-16)
        npt.assert_allclose(rhs.to_dense(), a - dt / 2 * (xi * b - lam * c), rtol=1e-14, atol=1e-16)
        assert lhs.bandwidth == rhs.bandwidth == 3

    def test_shape_mismatch(self):
        _, _, (A, B, C) = matrices()
        with pytest.raises(ValueError):
            build_crank_nicolson(A, B, BandedMatrix.zeros(A.n + 1, 3), 1, 1, 1)

    def test_operator_annihilates_constants(self):
        # the splines sum to a constant on [a, b]; its derivatives vanish there
        _, _, (_, B, C) = matrices(n=12, p=3.0)
        ones = np.ones(B.n)
        for m in (B, C):
            assert np.max(np.abs(m.matvec(ones))) < 1e-12 * np.max(np.abs(m.data))


class TestApplyDirichlet:
    def test_dimension_and_band(self):
        mesh, k, (A, B, C) = matrices(n=9)
        lhs, rhs = build_crank_nicolson(A, B, C, 0.5, 0.01, 0.1)
        reduced, record = apply_dirichlet(lhs, rhs, k)
        assert reduced.n == mesh.n + 1
        assert reduced.bandwidth <= 3
        assert record.left.shape == record.right.shape == (mesh.n + 1,)
        # nothing leaks outside the matrix through the storage corners
        npt.assert_array_equal(BandedMatrix.from_dense(reduced.to_dense(), 3).data, reduced.data)

    @pytest.mark.parametrize("beta", [(0.0, 0.0), (0.4, -1.3)])
    def test_dense_constrained_oracle(self, beta):
        n = 4
        mesh, k, (A, B, C) = matrices(n=n)
        lhs, rhs = build_crank_nicolson(A, B, C, 0.9, 0.05, 0.2)
        g = np.random.default_rng(4).normal(size=n + 1)
        full = lhs.to_dense()
        a1 = k.alpha1
        # Galerkin rows for weights 0..N, then the two boundary constraints
        dense = np.vstack([full[1:-1], np.zeros((2, n + 3))])
        dense[-2, :3] = (a1, 1.0, a1)
        dense[-1, -3:] = (a1, 1.0, a1)
        oracle = np.linalg.solve(dense, np.concatenate([g, beta]))
        reduced, record = apply_dirichlet(lhs, rhs, k)
        inner = np.linalg.solve(reduced.to_dense(), g + record.boundary_rhs(*beta))
        npt.assert_allclose(record.rebuild(inner, *beta), oracle, rtol=1e-11, atol=1e-12)


class TestStep:
    def test_identity_scheme(self):
        problem = spec(xi=0.0, lam=0.0, n=12)
        k = derive_constants(problem.p, problem.mesh.h)
        machinery = Stepper.build(problem, k)
        state = CoefficientVector(np.random.default_rng(0).normal(size=problem.n + 3), 0.0)
        u = knot_values(state, k)
        beta = (u[0], u[-1])
        nxt = step(state, machinery, beta)
        npt.assert_allclose(nxt.values, state.values, rtol=0, atol=1e-12)
        assert nxt.t == pytest.approx(problem.dt)
        n_steps = problem.n
        cur = state
        for _ in range(n_steps):
            cur = step(cur, machinery, beta)
        assert np.max(np.abs(cur.values - state.values)) <= 1e-12 * n_steps

    @pytest.mark.parametrize("xi,lam", [(0.5, 0.0), (0.8, 0.005), (-2.0, 0.3)])
    def test_constant_state_preserved(self, xi, lam):
        beta = 2.5
        problem = spec(
            xi=xi, lam=lam, dt=0.01, t_final=1.0,
            u0=lambda x: np.full_like(x, beta), du0_a=0.0, du0_b=0.0,
            f0=lambda t: beta, fl=lambda t: beta,
        )
        history = run(problem, np.linspace(0, 1.0, 101))
        ref = history.snapshots[0].values
        assert len(history.snapshots) == 101
        for snap in history.snapshots:
            npt.assert_allclose(snap.values, ref, rtol=0, atol=1e-10)

    def test_time_dependent_boundary(self):
        # U(a), U(b) follow f0(t), fL(t) at every accepted level
        problem = spec(f0=lambda t: np.sin(3 * t), fl=lambda t: 1 + t, u0=lambda x: x / 2,
                       du0_a=0.5, du0_b=0.5, t_final=1.0)
        history = run(problem, np.arange(1, 21) * problem.dt)
        for snap in history.snapshots[1:]:
            u = knot_values(snap, history.constants)
            assert abs(u[0] - np.sin(3 * snap.t)) <= 1e-9
            assert abs(u[-1] - (1 + snap.t)) <= 1e-9 * (1 + snap.t)

    def test_one_pulse_step(self):
        # stated bound: L-inf below 1e-4 after one step on the h = 0.1 mesh
        problem = gaussian_pulse_problem(90, 0.0125, 0.05286, 0.0125)
        history = run(problem)
        err = linf_error(history.knot_values(), exact_gaussian_pulse(history.mesh.knots, 0.0125))
        assert err < 1e-4

    def test_one_pulse_step_near_best_approximation(self):
        # independent oracle: L2 projection of the exact u(dt) onto the same spline space
        problem = gaussian_pulse_problem(90, 0.0125, 0.05286, 0.0125)
        history = run(problem)
        mesh, k = history.mesh, history.constants
        x = np.linspace(mesh.a, mesh.b, 90 * 400 + 1)
        w = np.full(x.size, x[1] - x[0])
        w[[0, -1]] /= 2
        phi = np.array([eval_basis(mesh, k, i, x) for i in range(-1, mesh.n + 2)])
        coeffs = np.linalg.solve((phi * w) @ phi.T, (phi * w) @ exact_gaussian_pulse(x, 0.0125))
        exact = exact_gaussian_pulse(mesh.knots, 0.0125)
        best = linf_error(knot_values(CoefficientVector(coeffs), k), exact)
        err = linf_error(history.knot_values(), exact)
        assert best < err < 1.2 * best


class TestRun:
    def test_homogeneous_boundary_adherence(self):
        problem = gaussian_pulse_problem(45, 0.025, 0.05286, 2.0)
        history = run(problem, np.arange(1, 81) * problem.dt)
        assert len(history.snapshots) == 81
        worst = max(
            max(abs(u[0]), abs(u[-1]))
            for u in (knot_values(s, history.constants) for s in history.snapshots)
        )
        assert worst <= 1e-9

    def test_snapshot_times(self):
        problem = spec(dt=0.1, t_final=1.0)
        history = run(problem, [0.5, 0.24, 0.5, 1.0])
        npt.assert_allclose(history.times, [0.0, 0.2, 0.5, 1.0])
        assert np.all(np.diff(history.times) > 0)
        assert history.final.t == 1.0

    def test_snapshot_out_of_range(self):
        with pytest.raises(ValueError):
            run(spec(dt=0.1, t_final=1.0), [1.5])

    def test_zero_steps_returns_fit(self):
        problem = spec(t_final=0.0)
        history = run(problem)
        k = history.constants
        assert len(history.snapshots) == 1
        npt.assert_array_equal(history.final.values, fit_initial(problem, k).values)

    def test_second_order_in_time(self):
        # h = 0.025 makes the spatial error negligible; the rest is the time error
        errors = []
        for dt in (0.025, 0.0125, 0.00625):
            problem = gaussian_pulse_problem(360, dt, 0.05286, 1.0)
            history = run(problem)
            errors.append(linf_error(history.knot_values(), exact_gaussian_pulse(history.mesh.knots, 1.0)))
        ratios = np.array(errors[:-1]) / np.array(errors[1:])
        assert np.all((3.8 < ratios) & (ratios < 4.3)), ratios


class TestEvaluate:
    def setup_method(self):
        self.mesh = Mesh(-1.0, 2.0, 12)
        self.k = derive_constants(1.7, self.mesh.h)
        self.state = CoefficientVector(np.random.default_rng(11).normal(size=15))

    def test_knots_match_three_term_formula(self):
        got = evaluate(self.state, self.mesh, self.k, self.mesh.knots)
        npt.assert_allclose(got, knot_values(self.state, self.k), rtol=0, atol=1e-13)

    def test_uniform_coefficients(self):
        state = CoefficientVector(np.full(15, 3.0))
        got = evaluate(state, self.mesh, self.k, self.mesh.knots)
        npt.assert_allclose(got, 3.0 * (1 + 2 * self.k.alpha1), rtol=1e-14)

    def test_against_basis_summation(self):
        mid = self.mesh.knots[:-1] + 0.37 * self.mesh.h
        direct = sum(
            self.state.values[i + 1] * eval_basis(self.mesh, self.k, i, mid)
            for i in range(-1, self.mesh.n + 2)
        )
        npt.assert_allclose(evaluate(self.state, self.mesh, self.k, mid), direct, rtol=1e-13, atol=1e-14)

    def test_scalar(self):
        value = evaluate(self.state, self.mesh, self.k, 0.5)
        assert np.ndim(value) == 0

    @pytest.mark.parametrize("x", [-1.0001, 2.5, [0.0, 3.0]])
    def test_outside_domain(self, x):
        with pytest.raises(ValueError):
            evaluate(self.state, self.mesh, self.k, x)
