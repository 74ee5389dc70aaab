import numpy as np
import pytest

from pncsim import (
    BqpInstance,
    InfeasibleProgramError,
    solve,
    solve_by_enumeration,
    solve_linear,
)
from pncsim.solver import PreparedSolver, _bnb_core, _bnb_compiled
from oracles import enumerate_bqp


def test_nonnegative_costs_pick_idle():
    sol = solve(BqpInstance(c=np.array([1.0, 1.0])))
    assert sol.u_star.tolist() == [0, 0]
    assert sol.value == 0.0


def test_mutual_exclusion_picks_most_negative():
    inst = BqpInstance(c=np.array([-3.0, -1.0]), A=np.array([[1.0, 1.0]]), b=np.array([1.0]))
    sol = solve(inst)
    assert sol.u_star.tolist() == [1, 0]
    assert sol.value == -3.0


def test_tie_break_is_lexicographic():
    inst = BqpInstance(c=np.array([-1.0, -1.0]), A=np.array([[1.0, 1.0]]), b=np.array([1.0]))
    assert solve(inst).u_star.tolist() == [0, 1]
    inst = BqpInstance(c=np.array([-2.0, -1.0, -1.0]),
                       A=np.array([[0.0, 1.0, 1.0]]), b=np.array([1.0]))
    assert solve(inst).u_star.tolist() == [1, 0, 1]
    assert solve_linear(BqpInstance(c=np.zeros(3))).u_star.tolist() == [0, 0, 0]


def test_random_instances_match_enumeration():
    rng = np.random.default_rng(100)
    for _ in range(60):
        N = int(rng.integers(2, 13))
        c = rng.uniform(-5, 5, N)
        Hq = rng.uniform(-5, 5, (N, N))
        Hq = (Hq + Hq.T) / 2
        K = int(rng.integers(0, 4))
        A = (rng.random((K, N)) < 0.5).astype(float) if K else None
        b = np.ones(K) if K else None
        inst = BqpInstance(c=c, quad=Hq, A=A, b=b)
        got = solve(inst)
        want_val, want_u = enumerate_bqp(c, Hq, A, b)
        assert got.value == want_val
        assert np.array_equal(got.u_star, want_u)
        internal = solve_by_enumeration(inst)
        assert internal.value == got.value
        assert np.array_equal(internal.u_star, got.u_star)


def test_linear_agrees_with_quadratic_path():
    rng = np.random.default_rng(101)
    for _ in range(30):
        N = int(rng.integers(2, 11))
        c = rng.uniform(-4, 4, N)
        A = (rng.random((2, N)) < 0.6).astype(float)
        b = np.ones(2)
        lin = solve_linear(BqpInstance(c=c, A=A, b=b))
        quad = solve(BqpInstance(c=c, quad=np.zeros((N, N)), A=A, b=b))
        assert lin.value == quad.value
        assert np.array_equal(lin.u_star, quad.u_star)


def test_solve_linear_rejects_nonzero_quad():
    with pytest.raises(ValueError):
        solve_linear(BqpInstance(c=np.zeros(2), quad=np.eye(2)))


def test_determinism():
    rng = np.random.default_rng(102)
    c = rng.uniform(-3, 3, 8)
    Hq = rng.uniform(-2, 2, (8, 8))
    Hq = (Hq + Hq.T) / 2
    A = (rng.random((3, 8)) < 0.5).astype(float)
    b = np.ones(3)
    sols = [solve(BqpInstance(c=c, quad=Hq, A=A, b=b)) for _ in range(3)]
    for s in sols[1:]:
        assert s.value == sols[0].value
        assert np.array_equal(s.u_star, sols[0].u_star)


def test_solution_feasibility_certified():
    rng = np.random.default_rng(103)
    for _ in range(20):
        N = int(rng.integers(2, 9))
        c = rng.uniform(-5, 5, N)
        A = rng.uniform(-1, 2, (3, N))
        b = rng.uniform(0.5, 3.0, 3)
        try:
            sol = solve(BqpInstance(c=c, A=A, b=b))
        except InfeasibleProgramError:
            continue
        assert np.all(A @ sol.u_star <= b + 1e-9)
        assert sol.value == pytest.approx(float(c @ sol.u_star), abs=1e-9)


def test_infeasible_raises():
    inst = BqpInstance(c=np.array([0.0]), A=np.array([[1.0], [-1.0]]),
                       b=np.array([-0.5, -0.5]))
    with pytest.raises(InfeasibleProgramError):
        solve(inst)
    with pytest.raises(InfeasibleProgramError):
        solve_by_enumeration(inst)


def test_variable_limit_enforced():
    with pytest.raises(ValueError):
        BqpInstance(c=np.zeros(31))


def test_quad_must_be_symmetric():
    with pytest.raises(ValueError):
        BqpInstance(c=np.zeros(2), quad=np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_prepared_solver_matches_public_solve():
    rng = np.random.default_rng(104)
    for _ in range(25):
        N = int(rng.integers(2, 10))
        quad = rng.uniform(-3, 3, (N, N))
        quad = (quad + quad.T) / 2
        A = (rng.random((3, N)) < 0.5).astype(float)
        prepared = PreparedSolver(quad, A)
        for _ in range(3):
            c = rng.uniform(-5, 5, N)
            b = rng.uniform(0.5, 2.0, 3)
            a = prepared.solve(c, b)
            ref = solve(BqpInstance(c=c, quad=quad, A=A, b=b))
            assert a.value == ref.value
            assert np.array_equal(a.u_star, ref.u_star)


def test_python_and_compiled_kernels_agree():
    if _bnb_compiled is _bnb_core:
        pytest.skip("compiled kernel unavailable")
    rng = np.random.default_rng(105)
    for _ in range(20):
        N = int(rng.integers(2, 9))
        c = rng.uniform(-5, 5, N)
        Hq = rng.uniform(-3, 3, (N, N))
        Hq = (Hq + Hq.T) / 2
        S = Hq + Hq.T
        np.fill_diagonal(S, 0.0)
        lin0 = c + np.diag(Hq)
        A = (rng.random((2, N)) < 0.5).astype(float)
        b = np.ones(2)
        f1, u1, _ = _bnb_core(lin0.copy(), S, A, b, 1e-9)
        f2, u2, _ = _bnb_compiled(lin0.copy(), S, A, b, 1e-9)
        assert f1 == f2
        assert np.array_equal(u1, u2)
