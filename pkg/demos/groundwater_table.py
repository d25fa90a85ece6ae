"""March a groundwater table to its steady profile.

The free-surface height w(x, t) of an unconfined aquifer follows the
Boussinesq equation dw/dt - (K/2) Lap(w^2) + N = 0. With Dirichlet ends and
constant infiltration -N the steady state is known in closed form: w^2 is
the quadratic with (w^2)'' = 2N/K matching the squared boundary heights.
The semi-implicit scheme (w^2 linearized as w_old * w_new) reaches it from a
straight-line start; the interface y = w(x) it defines is the kind of
slightly skewed internal layer the reduction machinery targets.

Run:  python demos/groundwater_table.py
"""

import numpy as np

from skewlift.interface import (
    WaterTable,
    boussinesq_steady_profile,
    solve_boussinesq,
)
from skewlift.mesh import build_uniform_partition


def main():
    part = build_uniform_partition(0.0, 1.0, 100)
    K, N, bc = 1.2, 0.1, (1.0, 0.7)
    w0 = np.full(part.n + 1, bc[0])  # flat table, right end then drains
    wt = WaterTable(part, w0, K, N)

    times, W = solve_boussinesq(wt, dt=0.02, t_end=30.0, bc=bc)
    steady = boussinesq_steady_profile(part, K, N, bc)

    stations = np.linspace(0, part.n, 6).astype(int)
    print(f"K = {K}, N = {N}, ends {bc}, dt = 0.02, 100 cells\n")
    header = "    t    " + "".join(f"w({part.nodes[i]:.1f})  "
                                   for i in stations)
    print(header)
    for target in (0.0, 0.1, 0.5, 2.0, 10.0, 30.0):
        n = int(np.argmin(np.abs(times - target)))
        vals = "".join(f"{W[n][i]:.4f}  " for i in stations)
        print(f"  {times[n]:5.1f}  {vals}")
    vals = "".join(f"{steady[i]:.4f}  " for i in stations)
    print(f"  exact  {vals}")

    dev = np.abs(W[-1] - steady).max()
    print(f"\nmax nodal deviation from the closed-form steady state at "
          f"t = 30: {dev:.2e}")
    print("halving dt moves the t = 30 profile by O(dt): first-order "
          "semi-implicit stepping.")


if __name__ == "__main__":
    main()
