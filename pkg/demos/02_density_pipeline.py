# Density of g_P for the primes up to 47 at sigma = 1.5, built three ways:
# characteristic-function inversion, a torus histogram, and a moment check
# against Monte Carlo.
import os
import tempfile

import numpy as np

from mfunctions import GParams, Moment, histogram, mc_average, rational_system, reconstruct_density
from mfunctions.density import l1_distance
from mfunctions.io import read_density_csv, write_density_csv
from mfunctions.torus import second_moment_exact

system = rational_system(47)
params = GParams(1.5, 1)
print("%d sites: %s" % (len(system), list(system.norms)))

d = reconstruct_density(system, params, 256)
print("mass %.6f   min before clipping %.2e   peak %.4f" % (d.mass, d.raw_min, d.values.max()))
print("reflection asymmetry %.1e" % d.reflection_asymmetry())
print("frequency box half-width %.1f, boundary |Mt| = %.1e" % (d.meta["freq_extent"], d.meta["boundary_charfn"]))

for a, b in [(1, 0), (0, 1), (1, 1), (2, 0)]:
    est = mc_average(system, params, Moment(a, b), 200_000, seed=1)
    g = d.moment(a, b)
    print("moment(%d,%d)  grid %+.5f%+.5fi   mc %+.5f%+.5fi  (+-%.1e)" %
          (a, b, g.real, g.imag, est.value.real, est.value.imag, est.stderr))
print("exact E|g|^2 = %.6f" % second_moment_exact(system, params))

# a coarse grid makes the histogram comparison meaningful at 1e6 samples
coarse = reconstruct_density(rational_system(20), params, 64)
for n in (100_000, 1_000_000):
    h = histogram(rational_system(20), params, n, seed=3, grid_n=64, extent=coarse.extent)
    print("histogram n=%d  L1 to reconstruction %.3f" % (n, l1_distance(h, coarse)))

path = os.path.join(tempfile.mkdtemp(), "m47.csv")
write_density_csv(path, d)
back = read_density_csv(path)
print("csv round trip exact:", np.array_equal(back.values, d.values))
