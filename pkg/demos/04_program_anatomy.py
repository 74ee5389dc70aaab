"""What one slot's decision problem looks like, piece by piece.

Takes the relay network in the good channel state with a loaded queue and
walks through the quantities the controller assembles: the expected link
matrices along the horizon, the linear and quadratic cost of a stacked
two-slot plan, the queue-nonnegativity system, and finally the exact
minimizer and the control actually applied.
"""

import numpy as np

from pncsim import (
    BqpInstance,
    PolicyConfig,
    ProgramBuilder,
    QueueState,
    decide,
    expected_B,
    markov_dist,
    natural_scenario,
    solve,
)

np.set_printoptions(precision=3, suppress=True)

spec = natural_scenario().spec
H = 2
q0 = np.array([6, 1, 4])
sigma0 = 1  # good state

print("channel-state distribution ahead of the current slot:")
for t in range(H + 1):
    print(f"  t={t}: {markov_dist(spec, sigma0, t)}")

print("\nexpected link matrices (columns fade as the bad state takes over):")
for t in range(H):
    print(f"  t={t}:\n{expected_B(spec, sigma0, t)}")

builder = ProgramBuilder(spec, H, tau_hard=1)
abar = spec.mean_rates()
J_l = builder.linear_cost(q0, sigma0, abar)
J_q = builder.quadratic_cost(sigma0)
D, d = builder.constraints(q0, sigma0, abar)

print(f"\nlinear cost of the stacked plan (length m*H = {J_l.size}):\n  {J_l}")
print(f"quadratic cost matrix ({J_q.shape[0]}x{J_q.shape[1]}), symmetric:\n{J_q}")
print(f"\nqueue-nonnegativity system D u <= d with d = {d}")
print(D)

cons = np.kron(np.eye(H), spec.constituency.astype(float))
inst = BqpInstance(c=J_l, quad=J_q,
                   A=np.vstack([cons, D]),
                   b=np.concatenate([np.ones(cons.shape[0]), d]))
sol = solve(inst)
plan = sol.u_star.reshape(H, spec.m)
print(f"\noptimal stacked plan (rows are slots): {plan.tolist()}, "
      f"cost {sol.value:.3f}, {sol.nodes_explored} nodes")

u = decide(QueueState(q=q0, sigma=sigma0), spec, PolicyConfig(kind="qpnc", horizon=H, tau_hard=1))
print(f"control applied this slot (first row only): {u.tolist()}")
print("next slot the whole program is rebuilt from the new state")
