# Averages over even characters of prime conductor approach torus averages.
# For the second moment the finite-conductor value has a closed form, and its
# distance from the torus value a rigorous bound.
from mfunctions import FamilySpec, GParams, Moment, Psi, family_average, rational_system, weyl_discrepancy
from mfunctions.characters import family_second_moment
from mfunctions.density import global_charfn
from mfunctions.torus import second_moment_exact

system = rational_system(20)
params = GParams(1.5, 1)
exact = second_moment_exact(system, params)
z = 1 + 0.5j
target = global_charfn(system, params, z)
print("torus E|g|^2 = %.6f   Mt(%s) = %.5f%+.5fi" % (exact, z, target.real, target.imag))

for cmax in (300, 1000, 3000):
    spec = FamilySpec(cmax)
    fam = family_average(spec, system, params, Moment(1, 1))
    _, bias = family_second_moment(spec, system, params)
    psi = family_average(spec, system, params, Psi(z)).value
    print("conductors <= %4d (%3d of them): E|g|^2 %.5f  |dev| %.4f  bound %.4f   |psi - Mt| %.4f" %
          (cmax, fam.n_conductors, fam.value.real, abs(fam.value - exact), bias, abs(psi - target)))

for cmax in (100, 500, 2500):
    w = weyl_discrepancy(FamilySpec(cmax), system.prefix(1), [1])
    print("average chi(2), conductors <= %4d: %.4f" % (cmax, abs(w.value)))
