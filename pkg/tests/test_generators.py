import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zaksampling.generators import (AnalyticIndicator, GeneratorSet, MixedGridError,
                                    RasterProfile, constant_C, constant_D, constant_K,
                                    generators_from_json, generators_to_json,
                                    orthonormality_check, random_orthonormal_generators,
                                    zak_profile, zak_profile_many)
from zaksampling.spectrum import MultiTileSpectrum, cell_center, tiling_decomposition


def profile(values_by_offset, grid=1, dim=1):
    offs = tuple(values_by_offset)
    return RasterProfile(dim, grid, offs, np.array([values_by_offset[o] for o in offs]))


def random_profile(rng, dim=1, grid=4, radius=2):
    offs = tuple((o,) for o in range(-radius, radius + 1)) if dim == 1 else \
        tuple((a, b) for a in range(-radius, radius + 1) for b in range(-radius, radius + 1))
    vals = rng.standard_normal((len(offs), grid ** dim)) + 1j * rng.standard_normal((len(offs), grid ** dim))
    return RasterProfile(dim, grid, offs, vals)


# -- zak_profile -----------------------------------------------------------------

def test_zak_of_indicator_is_one(rng):
    for _ in range(5):
        w, x = rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2)
        assert zak_profile(AnalyticIndicator(), w, x) == 1


def test_zak_single_offset_is_the_value():
    p = profile({(0,): [2.5 - 1j]})
    for x in (-0.5, -0.1, 0.3):
        assert zak_profile(p, [0.0], [x]) == pytest.approx(2.5 - 1j, abs=1e-15)


def test_zak_two_offsets_cancel_at_half():
    p = profile({(0,): [1.0], (1,): [1.0]})
    assert abs(zak_profile(p, [0.0], [0.5])) < 1e-15


def test_zak_off_domain_raises():
    p = profile({(0,): [1.0]})
    with pytest.raises(ValueError):
        zak_profile(p, [0.7], [0.0])


def test_zak_is_linear(rng):
    a, b = random_profile(rng), random_profile(rng)
    s = RasterProfile(1, 4, a.offsets, a.values + 2.0 * b.values)
    xs = rng.uniform(-0.5, 0.5, (10, 1))
    for w in ([-0.4], [0.1], [0.3]):
        lhs = zak_profile_many(s, w, xs)
        rhs = zak_profile_many(a, w, xs) + 2.0 * zak_profile_many(b, w, xs)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


# -- constants ---------------------------------------------------------------------

def test_indicator_constants_exact():
    gens = GeneratorSet.indicators([(0,), (3,), (-2,)])
    assert (gens.C, gens.K) == (1.0, 0.0)
    assert gens.D == 1.0


def test_constant_C_examples():
    g1 = GeneratorSet(1, (((0,), profile({(0,): [3.0, 0.5]}, grid=2)),))
    assert constant_C(g1) == 3.0
    g2 = GeneratorSet(1, (((0,), profile({(0,): [1.0, 0.1], (1,): [1j, 0.1]}, grid=2)),))
    assert constant_C(g2) == pytest.approx(2.0)


def test_constant_K_examples():
    flat = GeneratorSet(1, (((0,), profile({(0,): [0.7] * 4, (2,): [0.1j] * 4}, grid=4)),))
    assert constant_K(flat) == 0.0
    step = GeneratorSet(1, (((0,), profile({(0,): [0.0, 1.0]}, grid=2)),))
    assert constant_K(step) == pytest.approx(2.0)


def test_constant_K_brute_force(rng):
    p = random_profile(rng, grid=5)
    gens = GeneratorSet(1, (((0,), p),))
    omegas = [cell_center((j,), 5) for j in range(5)]
    best = 0.0
    for a in omegas:
        for b in omegas:
            if a[0] == b[0]:
                continue
            for x in omegas:
                num = abs(zak_profile(p, a, x) - zak_profile(p, b, x))
                best = max(best, num / abs(a[0] - b[0]))
    assert constant_K(gens) == pytest.approx(best, rel=1e-12)


def test_constant_K_degenerate_grid():
    gens = GeneratorSet(1, (((0,), profile({(0,): [1.0]}, grid=1)),))
    with pytest.raises(ValueError, match="degenerate"):
        constant_K(gens)


def test_mixed_grids_rejected():
    gens = GeneratorSet(1, (((0,), profile({(0,): [1.0, 1.0]}, grid=2)),
                            ((1,), profile({(0,): [1.0] * 3}, grid=3))))
    with pytest.raises(MixedGridError):
        constant_C(gens)
    with pytest.raises(MixedGridError):
        orthonormality_check(gens)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
def test_constants_invariant_under_phase(seed, theta):
    rng = np.random.default_rng(seed)
    p = random_profile(rng, grid=3, radius=1)
    g = GeneratorSet(1, (((0,), p),))
    h = GeneratorSet(1, (((0,), p.scaled(np.exp(1j * theta))),))
    assert constant_C(h) == pytest.approx(constant_C(g), rel=1e-12)
    assert constant_K(h) == pytest.approx(constant_K(g), rel=1e-12)


def test_constant_D_matches_direct_periodization(rng):
    # one-offset profile: psi(x) = value * exp(2 pi i w x) on a cell, so sum_l |psi(x+l)|^2
    # equals the cell-average of |value|^2 for every x
    vals = rng.standard_normal(4)
    g = GeneratorSet(1, (((0,), profile({(0,): vals}, grid=4)),))
    assert constant_D(g) == pytest.approx(np.mean(vals ** 2), rel=1e-12)


# -- orthonormality ------------------------------------------------------------------

def test_indicators_with_distinct_bases_are_orthonormal():
    ok, dev = orthonormality_check(GeneratorSet.indicators([(0, 0), (1, 0), (5, -2)]))
    assert ok and dev == 0.0


def test_duplicate_generator_rejected_or_detected():
    with pytest.raises(ValueError, match="duplicate"):
        GeneratorSet.indicators([(1,), (1,)])
    # same fiber reached through different (base, profile) pairs
    gens = GeneratorSet(1, (((1,), AnalyticIndicator()), ((0,), profile({(1,): [1.0]}))))
    ok, dev = orthonormality_check(gens)
    assert not ok and dev == pytest.approx(1.0)


def test_single_member_unit_fiber():
    gens = GeneratorSet(1, (((0,), profile({(0,): [0.6] * 3, (1,): [0.8] * 3}, grid=3)),))
    ok, dev = orthonormality_check(gens)
    assert ok and dev < 1e-15


@pytest.mark.parametrize("grid", [1, 2, 3, 5, 8])
def test_decomposition_construction_orthonormal_at_every_grid(grid):
    spec = MultiTileSpectrum(2, ((0, 0), (2, 1), (-1, 3)))
    dec = tiling_decomposition(spec.to_raster(grid))
    ok, dev = orthonormality_check(GeneratorSet.from_decomposition(dec))
    assert ok and dev == 0.0
    assert orthonormality_check(GeneratorSet.indicators(spec.offsets))[0]


def test_random_generators_orthonormal(rng):
    for dim, grid in ((1, 8), (2, 3)):
        gens = random_orthonormal_generators(dim, grid, 3, 1, rng)
        assert orthonormality_check(gens)[0]


# -- phase identity of the modulated generators ------------------------------------------

def test_modulation_phase_identity(rng):
    """Zak transform of the shifted fiber equals exp(-2 pi i <x, l_i>) times that of psi."""
    gens = random_orthonormal_generators(1, 6, 3, 2, rng)
    xs = rng.uniform(-0.5, 0.5, (7, 1))
    for w in gens.fiber_cells():
        support, mat = gens.fiber(w)
        direct = mat @ np.exp(-2j * np.pi * np.asarray(support, dtype=float) @ xs.T)
        for i, (base, prof) in enumerate(gens.members):
            via_psi = np.exp(-2j * np.pi * xs[:, 0] * base[0]) * zak_profile_many(prof, w, xs)
            assert np.max(np.abs(direct[i] - via_psi)) <= 1e-12
        assert np.max(np.abs(direct - gens.zak_phi_hat(w, xs))) <= 1e-12


# -- JSON ----------------------------------------------------------------------------------

def test_json_round_trip(rng):
    gens = random_orthonormal_generators(1, 4, 2, 1, rng)
    back = generators_from_json(generators_to_json(gens))
    assert back.k == gens.k
    for (b1, p1), (b2, p2) in zip(gens.members, back.members):
        assert b1 == b2 and np.allclose(p1.values, p2.values) and p1.offsets == p2.offsets
    ind = GeneratorSet.indicators([(0,), (2,)])
    assert generators_to_json(generators_from_json(generators_to_json(ind))) == generators_to_json(ind)
