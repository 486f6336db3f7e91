"""
Width and narrowness of a valley
================================

Width is the largest box half-width at which every valley point still passes
the test. Narrowness is the largest area ratio seen along the valley.
"""

import numpy as np

from valleyscape import degenerate_valley, elliptic_valley, narrowness_beta, width_alpha

points = [np.array([0.0, t]) for t in range(1, 10)]

#%%
rep = width_alpha(elliptic_valley(0.01), points, (0.5, 1, 2, 5, 10), n=50_000, seed=0)
for delta, passed, total in rep.table():
    print(f"delta={delta:<4g} passed {passed}/{total}")
print("alpha =", rep.alpha)

#%%
# A valley that is perfectly flat along x2 never has a lower neighbour, so
# its narrowness is exactly zero.
flat = narrowness_beta(degenerate_valley(), [np.array([0.0, t]) for t in range(-5, 6)],
                       1.0, 50_000, seed=0)
print("beta(fz) =", flat.beta)

#%%
steep = narrowness_beta(elliptic_valley(0.01), points, 1.0, 50_000, seed=0)
print(f"beta(fe) = {steep.beta:.4f} at {steep.argmax}")
