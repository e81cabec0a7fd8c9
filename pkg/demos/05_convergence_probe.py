# How much does the density move when one more prime is appended?
import math

from mfunctions import GParams, NumberField, uniform_convergence_probe

sigma = 1.5
ys = [11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
steps, dens = uniform_convergence_probe(NumberField.rationals(), GParams(sigma, 1), ys)

print("%4s %10s %12s %12s" % ("N", "sup diff", "/N^-4s ln^-2", "/ln^4 N^-2s"))
for s in steps:
    n = s.added_norms[0]
    print("%4d %10.4f %12.3e %12.2f" % (n, s.sup_diff, s.ratio, s.sup_diff / (math.log(n) ** 4 * n ** (-2 * sigma))))
# the first ratio column drifts over more than two decades; the second settles
# near 19, the second-order size of a mean-zero perturbation
