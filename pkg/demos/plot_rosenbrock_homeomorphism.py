"""
Bending a straight valley into Rosenbrock
=========================================

Composing the elliptic bowl x1**2 + 100 x2**2 with an invertible map gives
the Rosenbrock function. The map keeps fitness order, so the straight valley
turns into the curved parabola x2 = x1**2.
"""

import sys
from pathlib import Path

import numpy as np

from valleyscape import (Domain, check_order_preservation, grid_evaluate, make_elliptic,
                         make_transformed, pca_projection, rosenbrock, rosenbrock_map)
from valleyscape.render import pca_layers, render_contour_svg, write_svg

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(".")
box = Domain([-1, -1], [2, 2])

base = make_elliptic((1, 100))
h = rosenbrock_map()
g = make_transformed(base, h)

#%%
y = np.array([[0.0, 0.0], [1.0, 1.0], [-0.5, 2.0]])
print("constructed:", g(y))
print("rosenbrock: ", rosenbrock()(y))

#%%
res = check_order_preservation(base, g, box, pairs=1000, seed=0)
print(f"order violations: {res.violations}/{res.total}")

#%%
# Linear PCA only sees a chord of the curved valley, but the projected
# points still land in low fitness.
est = pca_projection(g, box, seed=0)
print("median f(population):", np.median(est.population_fitness))
print("median f(projected): ", np.median(g(est.reconstructed)))

doc = render_contour_svg(grid_evaluate(g, box, 81), 10, g.label,
                         pca_layers(est.population, est.selected.points, est.reconstructed))
write_svg(out_dir / "rosenbrock.svg", doc)
