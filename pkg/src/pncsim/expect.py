"""Channel-chain expectation algebra and per-slot program assembly.

Builds the data of the receding-horizon decision problem: expected link
matrices under the channel chain, the linear and quadratic cost of a stacked
binary control trajectory, and the inequality system that keeps every future
queue vector nonnegative.

Trajectories are flat vectors of length m*H in slot-major block order: entries
``[j*m : (j+1)*m]`` form the control of planning slot j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkSpec

__all__ = [
    "AssembledProgram",
    "ExpandedModel",
    "ProgramBuilder",
    "assemble_constraints",
    "assemble_costs",
    "clamp_minus",
    "expected_B",
    "expected_cross",
    "expected_queue",
    "markov_dist",
]

_SYM_TOL = 1e-10


def clamp_minus(A) -> np.ndarray:
    """Element-wise minimum with zero (keeps only nonpositive entries)."""
    return np.minimum(np.asarray(A), 0)


def _check_sigma(spec: NetworkSpec, sigma: int) -> None:
    if not 1 <= sigma <= spec.p:
        raise ValueError(f"channel state {sigma} out of range 1..{spec.p}")


def _check_symmetric(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(M, M.T, atol=_SYM_TOL, rtol=0.0):
        raise ValueError(f"{name} must be symmetric")
    return M


def markov_dist(spec: NetworkSpec, sigma0: int, t: int) -> np.ndarray:
    """Distribution of the channel state t slots after starting in sigma0."""
    _check_sigma(spec, sigma0)
    if t < 0:
        raise ValueError("t must be nonnegative")
    e = np.zeros(spec.p)
    e[sigma0 - 1] = 1.0
    if t == 0:
        return e
    return np.linalg.matrix_power(spec.transition, t) @ e


def expected_B(spec: NetworkSpec, sigma0: int, t: int) -> np.ndarray:
    """Expected realized link matrix t slots ahead, given the current state.

    Mixture over channel states of the link matrix scaled by each state's
    success diagonal.  Equals the Kronecker-expanded form computed by
    :class:`ExpandedModel`.
    """
    dist = markov_dist(spec, sigma0, t)
    mix = spec.success_weights.T @ dist
    return spec.link_matrix * mix[np.newaxis, :]


class ExpandedModel:
    """Kronecker-expanded chain quantities for a network.

    Stacks the per-state weighted link matrices into one tall matrix and lifts
    the transition matrix by a Kronecker product, so expectations over the
    chain become ordinary matrix products.  Used as an independent route to
    the mixture computations; read-only after construction.
    """

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        n, p = spec.n, spec.p
        self.P_hat = np.kron(spec.transition, np.eye(n))
        blocks = [spec.link_matrix * spec.success_weights[i][np.newaxis, :] for i in range(p)]
        self.B_hat = np.vstack(blocks)
        self.P_hat.setflags(write=False)
        self.B_hat.setflags(write=False)

    def e_hat(self, sigma: int) -> np.ndarray:
        """Selector of state sigma's block row: e_sigma Kronecker identity."""
        _check_sigma(self.spec, sigma)
        e = np.zeros(self.spec.p)
        e[sigma - 1] = 1.0
        return np.kron(e, np.eye(self.spec.n)).T

    def expected_system_matrix(self, sigma0: int, t: int) -> np.ndarray:
        """Expected link matrix t slots ahead via the expanded product form."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        sel = np.linalg.matrix_power(self.P_hat, t) @ self.e_hat(sigma0)
        return sel.T @ self.B_hat


def _as_blocks(controls, m: int, horizon: int) -> np.ndarray:
    u = np.asarray(controls)
    if u.shape == (horizon, m):
        return u
    if u.shape == (horizon * m,):
        return u.reshape(horizon, m)
    raise ValueError(f"controls must have shape ({horizon}, {m}) or ({horizon * m},), got {u.shape}")


def expected_queue(q0, sigma0: int, controls, spec: NetworkSpec, t: int,
                   abar: np.ndarray | None = None) -> np.ndarray:
    """Expected queue vector t slots ahead under a planned control trajectory.

    ``controls`` holds at least t slot-blocks; `abar` defaults to the
    long-run arrival rates.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    q0 = np.asarray(q0, dtype=np.float64)
    if abar is None:
        abar = spec.mean_rates()
    u = np.asarray(controls)
    blocks = _as_blocks(u, spec.m, u.size // spec.m)
    if blocks.shape[0] < t:
        raise ValueError(f"need at least {t} control blocks, got {blocks.shape[0]}")
    q = q0 + t * np.asarray(abar, dtype=np.float64)
    for i in range(t):
        q = q + expected_B(spec, sigma0, i) @ blocks[i]
    return q


def expected_cross(spec: NetworkSpec, sigma0: int, k: int, l: int, Q) -> np.ndarray:
    """Expected weighted cross product of the realized link matrices at slots k and l.

    For k >= l this is the mixture over the state at slot l of
    ``E[B_k | state]^T Q (B M_state)``; for k < l it is the transpose of the
    swapped call, which is valid because Q is symmetric.  The diagonal k == l
    uses the same product of per-state means, i.e. the success trials enter
    through their means only.
    """
    Q = _check_symmetric(Q, "Q")
    if k < 0 or l < 0:
        raise ValueError("k and l must be nonnegative")
    if k < l:
        return expected_cross(spec, sigma0, l, k, Q).T
    dist_l = markov_dist(spec, sigma0, l)
    G = np.zeros((spec.m, spec.m))
    for j in range(spec.p):
        if dist_l[j] == 0.0:
            continue
        ahead = expected_B(spec, j + 1, k - l)
        own = spec.link_matrix * spec.success_weights[j][np.newaxis, :]
        G += dist_l[j] * (ahead.T @ Q @ own)
    return G


@dataclass(frozen=True)
class AssembledProgram:
    """One slot's decision problem over a stacked binary trajectory.

    ``constant + linear @ u + u @ quad @ u`` is the expected cost of trajectory
    u; ``ineq @ u <= rhs`` keeps every planned queue vector nonnegative
    (worst case for hard rows, in expectation with arrival credit for soft
    rows).  Constituency constraints are not included here.
    """

    constant: float
    linear: np.ndarray
    quad: np.ndarray
    ineq: np.ndarray
    rhs: np.ndarray
    horizon: int
    tau_hard: int


class ProgramBuilder:
    """Caches the state-dependent blocks of the per-slot decision problem.

    All quantities that depend only on the network, horizon, cost weights and
    hard-constraint depth are computed once per channel state; assembling the
    program for a concrete queue vector is then a handful of small matrix
    products.  Instances are read-only after construction and safe to share.
    """

    def __init__(self, spec: NetworkSpec, horizon: int, Q=None, R=None,
                 tau_hard: int | None = None):
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        n, m, p = spec.n, spec.m, spec.p
        Q = np.eye(n) if Q is None else _check_symmetric(Q, "Q")
        R = np.zeros((m, m)) if R is None else _check_symmetric(R, "R")
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n} x {n}")
        if R.shape != (m, m):
            raise ValueError(f"R must be {m} x {m}")
        tau_hard = min(2, horizon) if tau_hard is None else tau_hard
        if not 1 <= tau_hard <= horizon:
            raise ValueError(f"tau_hard {tau_hard} out of range 1..{horizon}")

        self.spec = spec
        self.horizon = horizon
        self.Q = Q
        self.R = R
        self.tau_hard = tau_hard

        H = horizon
        # success mixes from every start state: mix_all[s][:, j] is the expected
        # success diagonal s slots after starting in state j+1
        P = spec.transition
        powers = [np.eye(p)]
        for _ in range(1, H):
            powers.append(P @ powers[-1])
        mix_all = [spec.success_weights.T @ Pw for Pw in powers]
        B = spec.link_matrix.astype(np.float64)
        G = B.T @ Q @ B  # weighted link Gram matrix, shared by all cross moments

        self._ebar: list[list[np.ndarray]] = []    # per sigma, per slot offset
        self._lin_q: list[np.ndarray] = []         # multiplies q0 in the linear cost
        self._lin_a: list[np.ndarray] = []         # multiplies abar in the linear cost
        self._quad: list[np.ndarray] = []
        self._ineq: list[np.ndarray] = []
        for s0 in range(p):
            dists = [powers[s][:, s0] for s in range(H)]
            ebars = [B * mix_all[s][:, s0][np.newaxis, :] for s in range(H)]
            self._ebar.append(ebars)

            lin_q = np.vstack([2.0 * (H - j) * (ebars[j].T @ Q) for j in range(H)])
            lin_a = np.vstack([float((H + 1 + j) * (H - j)) * (ebars[j].T @ Q) for j in range(H)])
            self._lin_q.append(lin_q)
            self._lin_a.append(lin_a)

            quad = np.zeros((m * H, m * H))
            for k in range(H):
                for l in range(k + 1):
                    # cross moment: mixture over the state at slot l, each term a
                    # column scaling of the shared Gram matrix
                    scale = np.zeros((m, m))
                    for j in range(p):
                        w = dists[l][j]
                        if w == 0.0:
                            continue
                        scale += w * np.outer(mix_all[k - l][:, j], spec.success_weights[j])
                    block = float(H - k) * (G * scale)
                    quad[k * m:(k + 1) * m, l * m:(l + 1) * m] = block
                    if k != l:
                        quad[l * m:(l + 1) * m, k * m:(k + 1) * m] = block.T
            quad += np.kron(np.eye(H), R)
            self._quad.append(quad)

            ineq = np.zeros((n * H, m * H))
            B_minus = clamp_minus(B)
            for t in range(1, H + 1):
                hard = t <= tau_hard
                for j in range(t):
                    if j == t - 1:
                        blk = B_minus if hard else clamp_minus(ebars[j])
                    else:
                        blk = B if hard else ebars[j]
                    ineq[(t - 1) * n:t * n, j * m:(j + 1) * m] = -blk
            self._ineq.append(ineq)

        # arrival credit per constraint block row: none while hard, t afterwards
        self._rhs_coef = np.array(
            [0.0 if t <= tau_hard else float(t) for t in range(1, H + 1)]
        )
        for arrays in (self._lin_q, self._lin_a, self._quad, self._ineq):
            for a in arrays:
                a.setflags(write=False)

    def _abar(self, abar) -> np.ndarray:
        if abar is None:
            return self.spec.mean_rates()
        abar = np.asarray(abar, dtype=np.float64)
        if abar.shape != (self.spec.n,):
            raise ValueError(f"abar must have shape ({self.spec.n},)")
        return abar

    def expected_link_matrix(self, sigma: int, t: int) -> np.ndarray:
        _check_sigma(self.spec, sigma)
        return self._ebar[sigma - 1][t]

    def linear_cost(self, q0, sigma: int, abar=None) -> np.ndarray:
        _check_sigma(self.spec, sigma)
        q0 = np.asarray(q0, dtype=np.float64)
        abar = self._abar(abar)
        return self._lin_q[sigma - 1] @ q0 + self._lin_a[sigma - 1] @ abar

    def quadratic_cost(self, sigma: int) -> np.ndarray:
        _check_sigma(self.spec, sigma)
        return self._quad[sigma - 1]

    def constant_cost(self, q0, abar=None) -> float:
        q0 = np.asarray(q0, dtype=np.float64)
        abar = self._abar(abar)
        total = 0.0
        for t in range(1, self.horizon + 1):
            v = q0 + t * abar
            total += float(v @ self.Q @ v)
        return total

    def constraints(self, q0, sigma: int, abar=None) -> tuple[np.ndarray, np.ndarray]:
        _check_sigma(self.spec, sigma)
        q0 = np.asarray(q0, dtype=np.float64)
        abar = self._abar(abar)
        rhs = (q0[np.newaxis, :] + self._rhs_coef[:, np.newaxis] * abar[np.newaxis, :]).ravel()
        return self._ineq[sigma - 1], rhs

    def program(self, q0, sigma: int, abar=None) -> AssembledProgram:
        ineq, rhs = self.constraints(q0, sigma, abar)
        return AssembledProgram(
            constant=self.constant_cost(q0, abar),
            linear=self.linear_cost(q0, sigma, abar),
            quad=self.quadratic_cost(sigma),
            ineq=ineq,
            rhs=rhs,
            horizon=self.horizon,
            tau_hard=self.tau_hard,
        )


def assemble_costs(q0, sigma0: int, spec: NetworkSpec, horizon: int, Q=None, R=None,
                   abar=None) -> tuple[np.ndarray, np.ndarray]:
    """Linear row and quadratic matrix of the horizon cost at one state."""
    builder = ProgramBuilder(spec, horizon, Q=Q, R=R, tau_hard=horizon)
    return builder.linear_cost(q0, sigma0, abar), builder.quadratic_cost(sigma0)


def assemble_constraints(q0, sigma0: int, spec: NetworkSpec, horizon: int, tau_hard: int,
                         abar=None) -> tuple[np.ndarray, np.ndarray]:
    """Queue-nonnegativity system ``ineq @ u <= rhs`` for a stacked trajectory.

    Block row t enforces nonnegativity of the queue vector after t planned
    slots: against the worst-case link matrix with no arrival credit for
    t <= tau_hard, in expectation with credit ``t * abar`` afterwards.  The
    newest control in each row enters through the minus-clamped matrix so a
    packet cannot traverse two queues within one slot.
    """
    builder = ProgramBuilder(spec, horizon, tau_hard=tau_hard)
    return builder.constraints(q0, sigma0, abar)
