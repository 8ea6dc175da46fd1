"""Reading off dimension from ball masses.

A Bishop-type fit looks for the exponent p with mu(B(x, eta)) >= beta * eta**p
over a window of radii. On a random circle it should find p close to 1 and on
a flat torus grid close to 2. The fitted constants then predict packing
numbers, and the prediction is checked against the packings themselves.

Run: python demos/bishop_dimension.py
"""

import numpy as np

from ghcert import bishop_fit, cap_bounds_check
from ghcert.metric import fill_radius
from ghcert.spaces import circle, flat_torus_grid


def report(name, space, **fit_kwargs):
    fit = bishop_fit(space, **fit_kwargs)
    floor = 2 * fill_radius(space)
    print(f"{name}: n = {space.n}, p_hat = {fit.p_hat:.3f}, C = {fit.C_derived:.2f}, theta = {fit.theta_derived:.4f}")
    radii = np.geomspace(floor * 1.01, fit.theta_derived * 0.99, 5)
    for row in cap_bounds_check(space, fit, r_grid=list(radii)):
        scaling = ", ".join(f"alpha={s['alpha']:g}: {s['status']}" for s in row["scaling"])
        print(f"  r = {row['r']:.4f}  Cap in [{row['cap_lower']}, {row['cap_upper']}]  "
              f"bounds hold: {row['lower_ok'] and row['upper_ok']}  ({scaling})")


def main():
    report("circle", circle(2000, seed=0))
    torus = flat_torus_grid(45)
    # a wider fit range leaves room for radii r and 2r inside the window
    report("torus grid", torus, eta_max=torus.diameter / 2)


if __name__ == "__main__":
    main()
