"""Arrival-rate stability regions of the one-step and two-step policies.

Sweeps a grid of mean arrival-rate pairs for the two-buffer network and
classifies each simulated point by the drift of the total queue.  On the
a2 = 0 axis the one-step boundary sits at rate 2 and the two-step boundary
at rate 3; the short runs used here may classify the zero-drift point right
at a boundary conservatively (longer sweeps sharpen it).  Off the axis
buffer 2 fills exogenously and can only drain through link 3, which needs
5 packets in buffer 1, so points with small a1 and positive a2 are
unstable for every policy.
"""

from pncsim import PolicyConfig, generic_scenario, sweep_region

T = 4_000
SEEDS = range(3)
A1 = [0.25 * k for k in range(13)]
A2 = [0.25 * k for k in range(5)]

scenario = generic_scenario()
grid = [(a1, a2) for a1 in A1 for a2 in A2]

maps = {}
for cfg in (PolicyConfig(kind="maxweight"),
            PolicyConfig(kind="qpnc", horizon=2, tau_hard=2)):
    print(f"sweeping {cfg.label} over {len(grid)} points x {len(list(SEEDS))} seeds ...")
    maps[cfg.label] = sweep_region(scenario.spec, cfg, grid, T, SEEDS)

for label, points in maps.items():
    print(f"\n{label}  ('#' stable, '.' unstable)")
    for a2 in reversed(A2):
        row = "".join("#" if points[(a1, a2)].stable else "." for a1 in A1)
        print(f"  a2={a2:4.2f}  {row}")
    axis = [a1 for a1 in A1 if points[(a1, 0.0)].stable]
    print(f"  a2=0 axis stable up to a1 = {max(axis)}")

print("\na1 grid:", ", ".join(f"{v:g}" for v in A1))
