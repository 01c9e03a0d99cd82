import numpy as np
import pytest

from slitwave.fringes import extract_fringe, half_period_offsets, principal_positions
from slitwave.params import PlaneOutOfRange, ScenarioParams, talbot_length
from slitwave.wavefield import FieldGrid, density, density_grid


def test_profile_from_params_is_normalised(neutron7):
    xs = np.linspace(-20, 20, 401)
    prof = extract_fringe(neutron7, 50.0, xs)
    assert prof.values.max() == 1.0
    assert prof.values.min() >= 0.0
    assert np.all(np.diff(prof.xs) > 0)
    raw = np.asarray(density(neutron7, xs, 50.0))
    assert np.allclose(prof.values, raw / raw.max(), rtol=1e-15, atol=0)
    assert prof.maxima


def test_profile_from_grid_row_matches_analytic(neutron7):
    grid = density_grid(neutron7, (-20, 20), (10.0, 100.0), 201, 10)
    prof = extract_fringe(grid, 50.0)
    direct = extract_fringe(neutron7, 50.0, grid.xs)
    assert np.allclose(prof.values, direct.values, rtol=1e-12, atol=1e-15)


def test_grid_profile_interpolates_between_rows():
    samples = np.array([[0.0, 1.0, 0.0], [0.0, 3.0, 0.0]])
    grid = FieldGrid(-1.0, 1.0, 0.0, 2.0, samples)
    prof = extract_fringe(grid, 0.5)
    assert list(prof.values) == [0.0, 1.0, 0.0]
    assert [m.x for m in prof.maxima] == [0.0]


def test_plane_outside_grid_raises(neutron7):
    grid = density_grid(neutron7, (-20, 20), (10.0, 100.0), 21, 4)
    for z in (5.0, 100.5):
        with pytest.raises(PlaneOutOfRange):
            extract_fringe(grid, z)
    with pytest.raises(PlaneOutOfRange):
        extract_fringe(neutron7, 500.0, np.linspace(-1, 1, 5), z_range=(0.0, 400.0))


def test_uniform_field_has_no_interior_maxima():
    grid = FieldGrid(-1.0, 1.0, 0.0, 1.0, np.full((3, 50), 0.7))
    prof = extract_fringe(grid, 0.5)
    assert prof.maxima == ()
    assert np.all(prof.values == 1.0)


def test_zero_field_stays_zero():
    grid = FieldGrid(-1.0, 1.0, 0.0, 1.0, np.zeros((2, 5)))
    assert np.all(extract_fringe(grid, 0.5).values == 0.0)


def test_fullerene_fringes_shift_by_half_a_period():
    p = ScenarioParams(0.005, 9, 250.0, 150.0)
    zt = talbot_length(p)
    xs = np.linspace(-1125.0, 1125.0, 1000)
    cell = xs[1] - xs[0]
    half = principal_positions(extract_fringe(p, zt / 2, xs))
    full = principal_positions(extract_fringe(p, zt, xs))
    assert np.all(np.abs(np.diff(half) - 250.0) <= 2 * cell)
    offsets = half_period_offsets(half, full)
    assert offsets.size >= 4
    assert np.all(np.abs(offsets - 125.0) <= 2 * cell)


def test_offsets_ignore_maxima_beyond_the_reference():
    assert list(half_period_offsets([-1.0, 1.0], [-3.0, 0.1, 5.0])) == [0.9]


def test_principal_positions_keep_outer_when_asked():
    from slitwave.farfield import FringeProfile, Maximum

    prof = FringeProfile(0.0, np.arange(3.0), np.ones(3), tuple(Maximum(x, 1.0, "principal") for x in (-2.0, 0.0, 2.0)))
    assert list(principal_positions(prof)) == [0.0]
    assert list(principal_positions(prof, interior=False)) == [-2.0, 0.0, 2.0]
