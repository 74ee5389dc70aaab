"""Exact solver for small binary programs with quadratic or linear cost.

Minimizes ``c @ u + u @ quad @ u`` over ``u in {0,1}^N`` subject to
``A @ u <= b``.  Problem sizes stay tiny here (N = links times horizon), so
the solver is an exact depth-first branch and bound with a simple additive
lower bound; an exhaustive-enumeration routine is provided as an independent
cross-check for N <= 20.

Ties are broken toward the lexicographically smallest control vector
(coordinate 0 most significant, 0 before 1), which the search order yields
for free: assignments are visited in lexicographic order and the incumbent
only improves strictly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BqpInstance",
    "BqpSolution",
    "InfeasibleProgramError",
    "PreparedSolver",
    "solve",
    "solve_by_enumeration",
    "solve_linear",
]

MAX_VARIABLES = 30
FEASIBILITY_TOL = 1e-9
_SYM_TOL = 1e-10


class InfeasibleProgramError(RuntimeError):
    """No binary point satisfies the constraints."""


@dataclass(frozen=True)
class BqpInstance:
    """One minimization instance.

    ``quad`` may be None for a purely linear cost; when present it must be
    symmetric.  ``A`` and ``b`` may be None for an unconstrained instance.
    """

    c: np.ndarray
    quad: np.ndarray | None = None
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("c must be a vector")
        N = c.size
        if N > MAX_VARIABLES:
            raise ValueError(f"instance has {N} variables, limit is {MAX_VARIABLES}")
        object.__setattr__(self, "c", c)

        if self.quad is not None:
            quad = np.ascontiguousarray(self.quad, dtype=np.float64)
            if quad.shape != (N, N):
                raise ValueError(f"quad must be {N} x {N}")
            if np.abs(quad - quad.T).max(initial=0.0) > _SYM_TOL:
                raise ValueError("quad must be symmetric")
            object.__setattr__(self, "quad", quad)

        if (self.A is None) != (self.b is None):
            raise ValueError("A and b must be given together")
        if self.A is not None:
            A = np.ascontiguousarray(self.A, dtype=np.float64)
            b = np.ascontiguousarray(self.b, dtype=np.float64)
            if A.ndim != 2 or A.shape[1] != N:
                raise ValueError(f"A must have {N} columns")
            if b.shape != (A.shape[0],):
                raise ValueError("b length must match the rows of A")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "b", b)

    @property
    def size(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class BqpSolution:
    u_star: np.ndarray
    value: float
    nodes_explored: int


def _bnb_core(lin0, S, A, b, feastol):
    # lin0: linear cost with the quadratic diagonal folded in; S: symmetric
    # pair costs, added once per active pair; A u <= b feasibility rows.
    N = lin0.shape[0]
    K = b.shape[0]

    pair_suffix = np.zeros(N + 1)
    for j in range(N - 1, -1, -1):
        acc0 = pair_suffix[j + 1]
        for k in range(j + 1, N):
            v = S[j, k]
            if v < 0.0:
                acc0 += v
        pair_suffix[j] = acc0

    rowneg = np.zeros((K, N + 1))
    for r in range(K):
        for j in range(N - 1, -1, -1):
            v = A[r, j]
            rowneg[r, j] = rowneg[r, j + 1] + (v if v < 0.0 else 0.0)

    lin = lin0.copy()
    acc = np.zeros(K)
    u = np.zeros(N, dtype=np.int8)
    best_u = np.zeros(N, dtype=np.int8)
    phase = np.zeros(N, dtype=np.int8)
    best = np.inf
    found = False
    g = 0.0
    nodes = 0
    depth = 0

    while depth >= 0:
        if depth == N:
            if g < best:
                best = g
                for i in range(N):
                    best_u[i] = u[i]
                found = True
            depth -= 1
            continue
        ph = phase[depth]
        if ph == 0:
            nodes += 1
            lb = g + pair_suffix[depth]
            for k in range(depth, N):
                v = lin[k]
                if v < 0.0:
                    lb += v
            if lb >= best:
                depth -= 1  # subtree cannot strictly improve; nothing fixed here
                continue
            phase[depth] = 1
            u[depth] = 0
            ok = True
            for r in range(K):
                if acc[r] + rowneg[r, depth + 1] > b[r] + feastol:
                    ok = False
                    break
            if ok:
                depth += 1
                if depth < N:
                    phase[depth] = 0
            continue
        if ph == 1:
            phase[depth] = 2
            u[depth] = 1
            g += lin[depth]
            for k in range(depth + 1, N):
                lin[k] += S[depth, k]
            ok = True
            for r in range(K):
                acc[r] += A[r, depth]
                if acc[r] + rowneg[r, depth + 1] > b[r] + feastol:
                    ok = False
            if ok:
                depth += 1
                if depth < N:
                    phase[depth] = 0
            continue
        # ph == 2: undo the one-branch if it is live, then back up
        if u[depth] == 1:
            for r in range(K):
                acc[r] -= A[r, depth]
            for k in range(depth + 1, N):
                lin[k] -= S[depth, k]
            g -= lin[depth]
            u[depth] = 0
        depth -= 1

    return found, best_u, nodes


try:  # pragma: no cover - exercised indirectly
    from numba import njit

    _bnb_compiled = njit(cache=True)(_bnb_core)
except ImportError:  # pragma: no cover
    _bnb_compiled = _bnb_core


def _certify(c, quad, A, b, u8: np.ndarray, nodes: int) -> BqpSolution:
    uf = u8.astype(np.float64)
    value = float(c @ uf)
    if quad is not None:
        value += float(uf @ quad @ uf)
    if A is not None and A.shape[0]:
        slack = A @ uf - b
        if np.any(slack > FEASIBILITY_TOL):
            raise AssertionError(f"solver returned an infeasible point, residual {slack.max()}")
    u = u8.astype(np.int64)
    u.setflags(write=False)
    return BqpSolution(u_star=u, value=value, nodes_explored=int(nodes))


def _pair_costs(quad: np.ndarray | None, N: int) -> np.ndarray:
    if quad is None:
        return np.zeros((N, N))
    S = quad + quad.T
    np.fill_diagonal(S, 0.0)
    return S


def _run_bnb(inst: BqpInstance, S: np.ndarray) -> BqpSolution:
    N = inst.size
    if inst.A is None:
        A = np.zeros((0, N))
        b = np.zeros(0)
    else:
        A, b = inst.A, inst.b
    lin0 = inst.c.copy()
    if inst.quad is not None:
        lin0 += np.diag(inst.quad)
    found, best_u, nodes = _bnb_compiled(lin0, S, A, b, FEASIBILITY_TOL)
    if not found:
        raise InfeasibleProgramError("no feasible binary point")
    return _certify(inst.c, inst.quad, inst.A, inst.b, best_u, nodes)


class PreparedSolver:
    """Branch and bound with the control-independent parts staged once.

    For receding-horizon use the quadratic matrix and the constraint matrix
    are fixed per channel state while the linear cost and right-hand side
    change every slot; staging the derived arrays up front avoids repeating
    that work.  Results are identical to :func:`solve` on the corresponding
    instance.
    """

    def __init__(self, quad: np.ndarray | None, A: np.ndarray):
        self.quad = quad
        self.A = np.ascontiguousarray(A, dtype=np.float64)
        N = self.A.shape[1]
        if N > MAX_VARIABLES:
            raise ValueError(f"instance has {N} variables, limit is {MAX_VARIABLES}")
        self._S = _pair_costs(quad, N)
        self._diag = None if quad is None else np.diag(quad).copy()

    def solve(self, c: np.ndarray, b: np.ndarray) -> BqpSolution:
        lin0 = c.copy()
        if self._diag is not None:
            lin0 += self._diag
        found, best_u, nodes = _bnb_compiled(lin0, self._S, self.A, b, FEASIBILITY_TOL)
        if not found:
            raise InfeasibleProgramError("no feasible binary point")
        return _certify(c, self.quad, self.A, b, best_u, nodes)


def solve(inst: BqpInstance) -> BqpSolution:
    """Global minimizer by depth-first branch and bound.

    Exact: the additive bound only ever prunes subtrees that cannot strictly
    improve on the incumbent, so the first optimum found in lexicographic
    visiting order is returned.  Infeasible instances raise
    :class:`InfeasibleProgramError`.
    """
    return _run_bnb(inst, _pair_costs(inst.quad, inst.size))


def solve_linear(inst: BqpInstance) -> BqpSolution:
    """Specialized path for instances without a quadratic term.

    Skips the quadratic bookkeeping entirely (the pair-cost matrix is zero,
    so the bound reduces to the sum of negative remaining coefficients) and
    agrees with :func:`solve` on any quad-free instance.
    """
    if inst.quad is not None and np.any(inst.quad != 0.0):
        raise ValueError("solve_linear requires a zero quadratic term")
    return _run_bnb(inst, np.zeros((inst.size, inst.size)))


def solve_by_enumeration(inst: BqpInstance, chunk: int = 1 << 14) -> BqpSolution:
    """Exhaustive check over all 2^N points; independent of the search path.

    Candidates are scanned in lexicographic order with a strictly improving
    incumbent, so the tie-break matches :func:`solve`.  Limited to N <= 20.
    """
    N = inst.size
    if N > 20:
        raise ValueError(f"enumeration limited to 20 variables, got {N}")
    shifts = np.arange(N - 1, -1, -1, dtype=np.uint64)
    best_val = np.inf
    best_u = None
    total = 1 << N
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        U = ((idx[:, np.newaxis] >> shifts[np.newaxis, :]) & 1).astype(np.float64)
        vals = U @ inst.c
        if inst.quad is not None:
            vals = vals + np.einsum("ij,jk,ik->i", U, inst.quad, U)
        if inst.A is not None:
            feas = np.all(inst.A @ U.T <= inst.b[:, np.newaxis] + FEASIBILITY_TOL, axis=0)
            if not feas.any():
                continue
            vals = np.where(feas, vals, np.inf)
        pos = int(np.argmin(vals))
        if vals[pos] < best_val:
            best_val = float(vals[pos])
            best_u = U[pos].astype(np.int8)
    if best_u is None:
        raise InfeasibleProgramError("no feasible binary point")
    return _certify(inst.c, inst.quad, inst.A, inst.b, best_u, total)
