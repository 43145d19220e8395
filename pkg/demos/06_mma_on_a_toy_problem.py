"""
The MMA update on a problem you can solve by hand
=================================================

Minimize sum((x - 1)^2) subject to mean(x) <= 0.4 over the box [0,1].
Pulling every variable toward 1 while capping the mean forces the
constraint active, and symmetry puts every component at exactly 0.4.
Watching the iterates shows the optimizer's two safeguards: the move
limit caps each step, and the asymptotes widen while progress is
monotone, then shrink wherever the iterate starts to oscillate.
"""

import numpy as np

from amtopo.mma import MMAParams, MMAState, mma_step

n = 8
x = np.full(n, 0.9)
state = MMAState.fresh(n)
params = MMAParams()  # move limit 0.2, asymptote grow 1.2 / shrink 0.7

print(" it   mean(x)   constraint   asymptote width")
for it in range(1, 31):
    df0 = 2.0 * (x - 1.0)
    g = np.atleast_1d(x.mean() - 0.4)
    dg = np.full((1, n), 1.0 / n)
    x = mma_step(x, df0, g, dg, state, params)
    if it <= 6 or it % 5 == 0:
        width = float(np.mean(state.upp - state.low))
        print(f"{it:3d} {x.mean():9.5f} {g[0]:+12.6f} {width:12.4f}")

print(f"\nfinal x (all should sit at 0.4): {np.round(x, 5)}")
assert abs(x.mean() - 0.4) < 1e-4

# The move limit in action: from a feasible corner, one step can move
# each variable at most 0.2 regardless of how steep the objective is.
x0 = np.zeros(4)
x1 = mma_step(x0, np.full(4, -1e6), np.atleast_1d(-1.0),
              np.zeros((1, 4)), MMAState.fresh(4))
print(f"\nstep from 0 under a huge pull toward 1: {x1} (move limit 0.2)")
