"""
Cat states versus product states
================================

Two many-coordinate states with the same single-coordinate marginal can have
very different centroid spreads. For a "cat" all N coordinates sit together
at +R or -R, so the centroid variance stays near R^2. For a product of
independent two-packet superpositions the spreads average out as 1/N.

The closed forms are checked against grid moments for N = 1, 2, 3, then
extrapolated to a macroscopic N.
"""
import numpy as np

from nlqm import GridSpec, cat_state, moments, product_superposition_state
from nlqm.scenarios import scaling_table

r, R = 0.1, 2.0

print("N   D_cat(grid)  D_cat(closed)  D_prod(grid)  D_prod(closed)")
for row in scaling_table([1, 2, 3], r, R):
    N = int(row.N)
    grid = GridSpec.uniform(N, -3, 3, 128)
    d_cat = moments(cat_state(grid, N, r, R)).D_N
    d_prod = moments(product_superposition_state(grid, N, r, R)).D_N
    print(f"{N}   {d_cat:.8f}   {row.D_cat:.8f}     {d_prod:.8f}    {row.D_product:.8f}")

# the nonlinear energy w N^2 D_N: extensive for the product, N^2 for the cat
w = 1e-30  # J/m^2
for row in scaling_table(np.logspace(0, 23, 6), 1e-9, 1e-2, w=w):
    print(f"N={row.N:8.1e}  H_nl product {row.H_nl_product:9.2e} J   cat {row.H_nl_cat:9.2e} J")
