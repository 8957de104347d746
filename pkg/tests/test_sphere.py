import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactlab.disk import vector_field_X
from contactlab.sphere import (
    DimensionError,
    SpherePoint,
    TangentVector,
    as_complex,
    contact_residual,
    field,
    field_F,
    field_JF,
    field_V,
    field_X,
    from_complex,
    lift,
    liouville,
    liouville_form,
    normalize,
    omega,
    project,
    random_points,
    random_tangents,
    reeb,
    reeb_flow,
    reeb_rotate,
    verify_contact_identity,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 4)


@given(seeds, dims)
def test_contact_identity_random(seed, n):
    rng = np.random.default_rng(seed)
    c = random_points(rng, 200, n)
    v = random_tangents(rng, c)
    assert contact_residual(c, v).max() < 1e-10


@given(seeds, dims)
def test_standard_fields_are_tangent(seed, n):
    c = random_points(np.random.default_rng(seed), 50, n)
    for v in [reeb(c), field_V(c), field_X(c)] + [field_F(c, i) for i in range(1, n + 1)]:
        assert np.abs(np.sum(c * v, axis=-1)).max() < 1e-12


@given(seeds, dims)
def test_contact_hamiltonians(seed, n):
    c = random_points(np.random.default_rng(seed), 50, n)
    assert np.allclose(liouville_form(c, reeb(c)), 1.0, atol=1e-13)
    assert np.allclose(liouville_form(c, field_V(c)), 0.0, atol=1e-13)
    assert np.allclose(liouville_form(c, field_X(c)), c[:, 0], atol=1e-13)


@given(seeds, dims)
def test_V_complex_form(seed, n):
    # V_{z_0} = i pi sum |z_k|^2 and V_{z_k} = -i pi z_k conj(z_0)
    c = random_points(np.random.default_rng(seed), 20, n)
    z = as_complex(c)
    v = as_complex(field_V(c))
    assert np.allclose(v[:, 0], 1j * np.pi * np.sum(np.abs(z[:, 1:]) ** 2, axis=-1), atol=1e-13)
    assert np.allclose(v[:, 1:], -1j * np.pi * z[:, 1:] * np.conj(z[:, :1]), atol=1e-13)


@given(seeds)
def test_X_projects_to_disk_field(seed):
    c = random_points(np.random.default_rng(seed), 30, 2)
    x = field_X(c)
    assert np.allclose(x[:, 0] + 1j * x[:, 1], vector_field_X(project(c)), atol=1e-13)


def test_JF_is_J_of_F(rng):
    # J(u, w) = (-w, u) in each complex coordinate, so omega(F, JF) = |F|^2 and <F, JF> = 0
    c = random_points(rng, 10, 2)
    for i in (1, 2):
        F, JF = field_F(c, i), field_JF(c, i)
        assert np.allclose(np.sum(F * JF, axis=-1), 0, atol=1e-13)
        assert np.allclose(omega(F, JF), np.sum(F * F, axis=-1), atol=1e-12)


def test_field_by_name():
    pt = SpherePoint(np.array([1.0, 0, 0, 0]) / np.sqrt(np.pi))
    assert isinstance(field("R", pt), TangentVector)
    for name in ("F", "JF", "V", "X"):
        field(name, pt)
    with pytest.raises(KeyError):
        field("Y", pt)
    with pytest.raises(IndexError):
        field_F(pt.coords, 2)


def test_sphere_point_validation():
    with pytest.raises(ValueError):
        SpherePoint(np.array([1.0, 0, 0, 0]))
    with pytest.raises(DimensionError):
        SpherePoint(np.array([1.0, 0, 0]) / np.sqrt(np.pi))
    with pytest.raises(DimensionError):
        SpherePoint(np.array([1.0, 0]) / np.sqrt(np.pi))
    assert SpherePoint(np.array([1.0, 0, 0, 0, 0, 0]) / np.sqrt(np.pi)).n == 2


def test_tangent_vector_validation():
    pt = SpherePoint(np.array([1.0, 0, 0, 0]) / np.sqrt(np.pi))
    with pytest.raises(ValueError):
        TangentVector(pt, np.array([1.0, 0, 0, 0]))
    with pytest.raises(DimensionError):
        TangentVector(pt, np.array([0.0, 1, 0]))
    v = TangentVector(pt, np.array([0.0, 1, 0, 0]))
    assert liouville(pt, v) == pytest.approx(0.5 / np.sqrt(np.pi))
    assert verify_contact_identity(pt, v) < 1e-12


def test_liouville_dimension_mismatch():
    with pytest.raises(DimensionError):
        liouville_form(np.zeros(4), np.zeros(6))


def test_normalize_only_touches_drifted_points(rng):
    c = random_points(rng, 5, 1)
    c2 = c.copy()
    c2[0] *= 1 + 1e-6
    c2[1] *= 1 + 1e-12
    out = normalize(c2)
    assert abs(np.pi * out[0] @ out[0] - 1) < 1e-14
    assert np.array_equal(out[1], c2[1])


@given(seeds, st.floats(-3, 3))
def test_reeb_flow_is_unitary_and_periodic(seed, s):
    c = random_points(np.random.default_rng(seed), 10, 2)
    r = reeb_rotate(c, s)
    assert np.allclose(np.pi * np.sum(r * r, axis=-1), 1)
    assert np.allclose(reeb_rotate(c, s + 1.0), r, atol=1e-12)
    assert np.allclose(reeb_rotate(r, -s), c, atol=1e-12)


def test_reeb_flow_derivative_is_R(rng):
    c = random_points(rng, 5, 1)
    h = 1e-6
    d = (reeb_rotate(c, h) - reeb_rotate(c, -h)) / (2 * h)
    assert np.allclose(d, reeb(c), atol=1e-8)
    pt = SpherePoint(c[0])
    assert np.allclose(reeb_flow(pt, 0.25).coords, reeb_rotate(c[0], 0.25))


def test_lift_and_complex_roundtrip():
    z0 = np.array([0.1 + 0.2j, 1 / np.sqrt(np.pi)])
    c = lift(z0, np.array([[1 + 1j, 0], [1, 0]]))
    assert np.allclose(np.pi * np.sum(c * c, axis=-1), 1)
    assert np.allclose(c[1, 2:], 0)
    assert np.allclose(from_complex(as_complex(c)), c)
