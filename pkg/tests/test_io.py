import numpy as np

from mfunctions.density import GridDensity, reconstruct_density
from mfunctions.io import atomic_write, density_from_csv, density_to_csv, read_density_csv, write_density_csv
from mfunctions.localgf import GParams
from mfunctions.primesys import rational_system


def test_csv_round_trip_exact(rng, tmp_path):
    d = GridDensity(rng.random((16, 16)) * 10 ** rng.uniform(-300, 300, (16, 16)), 3.7)
    back = density_from_csv(density_to_csv(d))
    assert np.array_equal(back.values, d.values)
    assert back.extent == d.extent
    real = reconstruct_density(rational_system(7), GParams(1.5), 32)
    write_density_csv(tmp_path / "m.csv", real)
    again = read_density_csv(tmp_path / "m.csv")
    assert np.array_equal(again.values, real.values)
    assert np.array_equal(again.axis, real.axis)


def test_csv_layout():
    d = GridDensity(np.arange(16.0).reshape(4, 4), 2.0)
    lines = density_to_csv(d).splitlines()
    assert lines[0] == "re,im,density"
    assert lines[1] == "-2,-2,0" and lines[2] == "-2,-1,1" and lines[5] == "-1,-2,4"


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "x.txt"
    atomic_write(str(p), "hello")
    atomic_write(str(p), "again")
    assert p.read_text() == "again"
    assert [q.name for q in p.parent.iterdir()] == ["x.txt"]
