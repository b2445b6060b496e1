import math
import warnings

import numpy as np
import pytest

from nlqm.observables import moments
from nlqm.wavefield import (
    Axis,
    GridSpec,
    OverlapWarning,
    PacketSpec,
    WaveField,
    attach_spin,
    cat_state,
    gaussian_packet,
    inner,
    norm_sq,
    normalize,
    product_superposition_state,
    tensor_product,
)


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError, match="power of two"):
        GridSpec.uniform(1, -1, 1, 100)


def test_grid_rejects_tiny_axis():
    with pytest.raises(ValueError):
        GridSpec.uniform(1, -1, 1, 4)


def test_grid_memory_guard():
    with pytest.raises(ValueError, match="memory guard"):
        GridSpec.uniform(3, -1, 1, 512, max_points=2**20)


def test_grid_geometry():
    g = GridSpec((Axis(-2, 2, 16), Axis(0, 1, 8)))
    assert g.shape == (16, 8)
    assert g.spacing == (0.25, 0.125)
    assert g.cell_volume == pytest.approx(0.03125)
    assert g.coords(0)[0] == -2 and g.coords(0)[-1] == pytest.approx(1.75)
    assert g.mesh(1).shape == (1, 8)


def test_wavefield_is_read_only():
    g = GridSpec.uniform(1, -5, 5, 64)
    f = WaveField(g, np.ones(64))
    assert f.amplitudes.shape == (1, 64)
    with pytest.raises(ValueError):
        f.amplitudes[0, 0] = 2.0


def test_wavefield_shape_mismatch():
    g = GridSpec.uniform(1, -5, 5, 64)
    with pytest.raises(ValueError, match="does not match"):
        WaveField(g, np.ones(32))


def test_gaussian_moments():
    g = GridSpec.uniform(1, -10, 10, 256)
    f = gaussian_packet(g, [PacketSpec(0.0, 1.0, 2.0)])
    mr = moments(f)
    assert norm_sq(f) == pytest.approx(1.0, abs=1e-12)
    assert mr.X == pytest.approx(0.0, abs=1e-12)
    assert mr.variances[0] == pytest.approx(1.0, rel=1e-10)
    assert mr.P_total == pytest.approx(2.0, rel=1e-10)


def test_gaussian_support_error_names_axis():
    g = GridSpec((Axis(-10, 10, 64), Axis(-1, 1, 64)))
    with pytest.raises(ValueError, match="axis 1"):
        gaussian_packet(g, [PacketSpec(0, 1), PacketSpec(0, 1)])


def test_normalize_zero_field():
    g = GridSpec.uniform(1, -1, 1, 16)
    with pytest.raises(ValueError, match="zero"):
        normalize(WaveField(g, np.zeros(16)))


@pytest.mark.parametrize("N", [1, 2])
def test_two_site_states_match_closed_form(N):
    r, R = 0.1, 2.0
    g = GridSpec.uniform(N, -3, 3, 256)
    dp = moments(product_superposition_state(g, N, r, R)).D_N
    dc = moments(cat_state(g, N, r, R)).D_N
    assert dp == pytest.approx((R**2 + r**2) / N, rel=1e-10)
    assert dc == pytest.approx(R**2 + r**2 / N, rel=1e-10)


def test_cat_two_coordinates_values():
    g = GridSpec.uniform(2, -3, 3, 256)
    mr = moments(cat_state(g, 2, 0.1, 2.0))
    # both coordinates sit on the same side: C2 = R^2, L2 = R^2 + r^2
    assert mr.C2 == pytest.approx(4.0, rel=1e-10)
    assert mr.L2 == pytest.approx(4.01, rel=1e-10)
    assert mr.D_N == pytest.approx(4.005, rel=1e-10)


def test_product_has_no_correlation():
    g = GridSpec.uniform(2, -3, 3, 256)
    mr = moments(product_superposition_state(g, 2, 0.1, 2.0))
    assert abs(mr.C2) < 1e-12


def test_overlap_warning():
    g = GridSpec.uniform(1, -3, 3, 128)
    with pytest.warns(OverlapWarning):
        cat_state(g, 1, 0.5, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cat_state(g, 1, 0.1, 2.0)


def test_cat_requires_matching_axis_count():
    g = GridSpec.uniform(2, -3, 3, 64)
    with pytest.raises(ValueError, match="axis count"):
        cat_state(g, 3, 0.1, 2.0)


def test_tensor_product_factorizes():
    ga = GridSpec.uniform(1, -6, 6, 64)
    gb = GridSpec.uniform(1, -8, 8, 128)
    a = gaussian_packet(ga, [PacketSpec(1.0, 0.7)])
    b = gaussian_packet(gb, [PacketSpec(-2.0, 0.9, 0.5)])
    ab = tensor_product(a, b)
    assert ab.grid.shape == (64, 128)
    assert norm_sq(ab) == pytest.approx(1.0, rel=1e-12)
    mr = moments(ab)
    assert mr.means == pytest.approx((1.0, -2.0), abs=1e-10)


def test_attach_spin_normalizes():
    g = GridSpec.uniform(1, -6, 6, 64)
    f = attach_spin(gaussian_packet(g, [PacketSpec()]), [1.0, 1j])
    assert f.spin_components == 2
    assert norm_sq(f) == pytest.approx(1.0)
    up, down = (float(np.sum(np.abs(c) ** 2) * g.cell_volume) for c in f.amplitudes)
    assert up == pytest.approx(0.5) and down == pytest.approx(0.5)


def test_inner_orthogonal_branches():
    g = GridSpec.uniform(1, -6, 6, 128)
    a = gaussian_packet(g, [PacketSpec(-2.0, 0.2)])
    b = gaussian_packet(g, [PacketSpec(2.0, 0.2)])
    assert abs(inner(a, b)) < 1e-20
    assert inner(a, a) == pytest.approx(1.0)
    assert math.isclose(abs(inner(a, a.replace(1j * a.amplitudes))), 1.0)
