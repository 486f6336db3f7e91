"""
Recovering the valley direction from samples
============================================

Sample a population, keep the best few, and take the leading principal axis
of what is left. On an elongated bowl the axis lines up with the long
direction; on the sphere it points anywhere.
"""

import sys
from pathlib import Path

import numpy as np

from valleyscape import Domain, elliptic_valley, grid_evaluate, pca_projection, sphere
from valleyscape.pca import angle_to_axis, pca_summary
from valleyscape.render import pca_layers, render_contour_svg, write_svg

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(".")
box = Domain([-10, -10], [10, 10])
fe = elliptic_valley(0.01)

#%%
est = pca_projection(fe, box, n=100, m=10, seed=7)
print(pca_summary(est))
print(f"angle to x2 axis: {angle_to_axis(est.direction, 1):.2f} deg")

#%%
# Over many seeds the eigenvalue ratio separates the two landscapes.
for land in (fe, sphere(2)):
    ratios = [est_.eigenvalues[0] / est_.eigenvalues[1]
              for est_ in (pca_projection(land, box, seed=s) for s in range(20))]
    print(f"{land.label:18s} median lambda1/lambda2 = {np.median(ratios):.2f}")

#%%
# Figure: heatmap with the population, the selected points and their
# projections onto the estimated line.
line = np.array([est.mean - 30 * est.direction, est.mean + 30 * est.direction])
doc = render_contour_svg(grid_evaluate(fe, box, 81), 10, "PCA projection",
                         pca_layers(est.population, est.selected.points, est.reconstructed, line))
write_svg(out_dir / "pca_projection.svg", doc)
