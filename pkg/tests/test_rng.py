import numpy as np

from mfunctions.rng import philox4x32, uniforms


def _words(out):
    return [int(np.asarray(w)) for w in out]


def test_philox_known_answers():
    # Random123 known-answer vectors for philox4x32-10
    assert _words(philox4x32((0, 0, 0, 0), (0, 0))) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]
    assert _words(philox4x32((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2)) == \
        [0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD]
    assert _words(philox4x32((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0))) == \
        [0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1]


def test_uniforms_pure_and_partition_free():
    idx = np.arange(1000, dtype=np.uint64)[:, None]
    coord = np.arange(3)[None, :]
    a = uniforms(7, idx, coord)
    b = np.vstack([uniforms(7, idx[:400], coord), uniforms(7, idx[400:], coord)])
    assert np.array_equal(a, b)
    assert a[123, 2] == uniforms(7, 123, 2)
    assert np.all((a >= 0) & (a < 1))
    assert not np.array_equal(a, uniforms(8, idx, coord))


def test_uniforms_moments():
    u = uniforms(1, np.arange(200_000, dtype=np.uint64), 0)
    assert abs(u.mean() - 0.5) < 5 * np.sqrt(1 / 12 / u.size)
    counts = np.bincount((u * 10).astype(int), minlength=10)
    chi2 = ((counts - u.size / 10) ** 2 / (u.size / 10)).sum()
    assert chi2 < 30  # 9 dof; p ~ 4e-4
