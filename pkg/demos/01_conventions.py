# Which coefficient convention for the m-th derivative agrees with the Dirichlet series?
# Both are evaluated on a small grid of norms, sigmas and angles against the
# term-by-term differentiated series.
import math

import numpy as np

from mfunctions import GParams, PrimeSite, g_local, series_oracle
from mfunctions.localgf import coefficients, verify_against_series

for m in range(1, 5):
    print("m=%d  derived %s  paper %s" % (m, coefficients(m, "derived"), coefficients(m, "paper")))

print()
print("%3s %-8s %12s" % ("m", "conv", "max rel err"))
for row in verify_against_series(max_order=5):
    print("%3d %-8s %12.3e" % (row.order_m, row.convention.value, row.max_rel_err))

# the two agree at m=1 and split from m=2 on
site = PrimeSite(2, 2)
for conv in ("derived", "paper"):
    v = g_local(site, GParams(1.0, 2, convention=conv), 1.0)
    print("\nm=2, N=2, sigma=1, t=1, %s: %.9f" % (conv, v.real))
print("series: %.9f   -6 (ln 2)^3 = %.9f" % (series_oracle(site, 1.0, 2, 1.0).real, -6 * math.log(2) ** 3))
