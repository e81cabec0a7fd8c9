# Critical points of w_m, the radius they impose, and the sigma above which the
# norm-2 site stays inside it.  The curve test checks global injectivity too.
from mfunctions import critical_points, curve_simplicity, injectivity_radius, sigma_threshold

print("%3s %-8s %10s %10s" % ("m", "conv", "radius", "sigma(2)"))
for conv in ("derived", "paper"):
    for m in range(1, 9):
        print("%3d %-8s %10.6f %10.4f" % (m, conv, injectivity_radius(m, conv), sigma_threshold(m, conv, 2)))

print("\nm=2 paper critical points:", critical_points(2, "paper"))
rho = injectivity_radius(2, "paper")
for r in (0.5 * rho, 0.99 * rho, 3 * rho, 0.9):
    print("rho=%.4f  simple curve: %s" % (r, curve_simplicity(2, "paper", r)))
