"""The three-buffer relay behind a flaky channel: prediction pays off.

A game master pushes information to two players over channel 1 (three
packets per send), the players' interactions drain buffers 2 and 3 together
over channel 2, and the two channels cannot run in the same slot.  Channel 1
only works in the good network state; the chain spends most of its time in
the bad one.  A predictive policy keeps buffer 2 stocked ahead of bad
stretches, so the processing link never starves; the myopic policy spends
buffer 2 as soon as it can.
"""

import numpy as np

from pncsim import PolicyConfig, compare_policies, natural_scenario

MW = PolicyConfig(kind="maxweight")


def table(rows, kinds):
    print(f"  {'policy':12s} {'mean q1':>9s} {'mean q2':>9s} {'mean q3':>9s}")
    for kind, horizon in kinds:
        vals = [r["avg_queue"] for r in rows
                if r["policy"] == kind and r["horizon"] == horizon]
        print(f"  {kind + ':' + str(horizon):12s} "
              + " ".join(f"{v:9.2f}" for v in vals))


print("overloaded stationary arrivals (rates 0.5 / 0 / 0.9), 2000 slots, 10 seeds")
sc = natural_scenario()
rows = compare_policies(
    sc.spec,
    [MW,
     PolicyConfig(kind="qpnc", horizon=2, tau_hard=1),
     PolicyConfig(kind="qpnc", horizon=3, tau_hard=1)],
    2_000, range(10), q0=sc.initial_queue, sigma0=sc.initial_sigma)
table(rows, [("maxweight", 1), ("qpnc", 2), ("qpnc", 3)])
print("  no policy can stabilize this load; longer horizons still hold q1 lower,")
print("  and the predictive policies keep more in the q2 store\n")

print("alternating high/low arrivals (stabilizable), 3000 slots, 20 seeds")
sc = natural_scenario(alternating=True)
rows = compare_policies(
    sc.spec,
    [MW, PolicyConfig(kind="qpnc", horizon=3, tau_hard=1)],
    3_000, range(20), q0=sc.initial_queue, sigma0=sc.initial_sigma)
table(rows, [("maxweight", 1), ("qpnc", 3)])

mw_load = sum(r["avg_queue"] for r in rows
              if r["policy"] == "maxweight" and r["buffer"] in (1, 3))
h3_load = sum(r["avg_queue"] for r in rows
              if r["policy"] == "qpnc" and r["buffer"] in (1, 3))
print(f"  q1+q3 load: maxweight {mw_load:.2f} vs qpnc:3 {h3_load:.2f} "
      f"({(1 - h3_load / mw_load) * 100:.1f}% lower)")
