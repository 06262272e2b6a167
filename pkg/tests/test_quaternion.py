import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from romheading import quaternion as quat

from conftest import random_quats, same_rotation

deg = np.radians


def to_scipy(q):
    q = np.asarray(q)
    return Rotation.from_quat(np.concatenate([q[..., 1:], q[..., :1]], axis=-1))


def from_scipy(r):
    x = r.as_quat()
    return np.concatenate([x[..., 3:], x[..., :3]], axis=-1)


# --- multiply -------------------------------------------------------------

def test_identity_is_neutral():
    q = quat.from_axis_angle([0, 1, 0], 0.7)
    assert np.allclose(quat.multiply(quat.identity(), q), q)


def test_same_axis_angles_add():
    z90 = quat.from_axis_angle([0, 0, 1], deg(90))
    assert same_rotation(quat.multiply(z90, z90), quat.from_axis_angle([0, 0, 1], deg(180)))


def test_product_matches_matrix_product():
    a = quat.from_axis_angle([0, 0, 1], deg(90))
    b = quat.from_axis_angle([1, 0, 0], deg(90))
    assert np.allclose(quat.to_matrix(quat.multiply(a, b)), quat.to_matrix(a) @ quat.to_matrix(b), atol=1e-12)


def test_product_matches_scipy_composition():
    rng = np.random.default_rng(0)
    a, b = random_quats(rng, 500), random_quats(rng, 500)
    expected = from_scipy(to_scipy(a) * to_scipy(b))
    assert same_rotation(quat.multiply(a, b), expected, 1e-12)


def test_multiply_broadcasts():
    rng = np.random.default_rng(1)
    a = random_quats(rng, 5)
    out = quat.multiply(a[:, None, :], a[None, :, :])
    assert out.shape == (5, 5, 4)
    assert np.allclose(out[2, 3], quat.multiply(a[2], a[3]))


def test_long_chain_stays_unit():
    rng = np.random.default_rng(2)
    q = quat.identity()
    for r in random_quats(rng, 1000):
        q = quat.multiply(q, r)
    assert abs(np.linalg.norm(q) - 1.0) < 1e-6


# --- inverse --------------------------------------------------------------

def test_inverse_identity():
    assert np.allclose(quat.inverse(quat.identity()), quat.identity())


def test_inverse_negates_angle():
    assert np.allclose(quat.inverse(quat.from_axis_angle([1, 0, 0], deg(30))),
                       quat.from_axis_angle([1, 0, 0], deg(-30)))


def test_inverse_cancels():
    q = random_quats(np.random.default_rng(3), 1000)
    assert same_rotation(quat.multiply(q, quat.inverse(q)), quat.identity(1000), 1e-9)


def test_inverse_rejects_zero():
    with pytest.raises(ValueError):
        quat.inverse([0.0, 0.0, 0.0, 0.0])


# --- axis-angle -----------------------------------------------------------

def test_zero_angle_is_identity():
    assert np.allclose(quat.from_axis_angle([0.6, 0.8, 0.0], 0.0), quat.identity())


def test_half_turn_about_z():
    assert np.allclose(quat.from_axis_angle([0, 0, 1], np.pi), [0, 0, 0, 1], atol=1e-15)


def test_axis_angle_matches_rotation_matrix():
    axis = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    expected = Rotation.from_rotvec(axis * deg(90)).as_matrix()
    assert np.allclose(quat.to_matrix(quat.from_axis_angle(axis, deg(90))), expected, atol=1e-12)


def test_axis_angle_rejects_non_unit_axis():
    with pytest.raises(ValueError):
        quat.from_axis_angle([1.0, 1.0, 0.0], 0.3)


def test_rotvec_round_trip():
    v = np.random.default_rng(4).normal(size=(200, 3))
    v *= (np.pi * 0.99 / np.maximum(np.linalg.norm(v, axis=1), np.pi))[:, None]
    assert np.allclose(quat.to_rotvec(quat.from_rotvec(v)), v, atol=1e-12)


def test_rotate_matches_scipy():
    rng = np.random.default_rng(5)
    q = random_quats(rng, 100)
    v = rng.normal(size=(100, 3))
    assert np.allclose(quat.rotate(q, v), to_scipy(q).apply(v), atol=1e-12)


# --- rotation angle -------------------------------------------------------

def test_rotation_angle_examples():
    assert quat.rotation_angle(quat.identity()) == 0.0
    q = quat.from_axis_angle([0, 1, 0], deg(170))
    assert np.isclose(quat.rotation_angle(q), deg(170))
    assert np.isclose(quat.rotation_angle(-q), deg(170))


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_rotation_angle_sign_insensitive(v):
    q = quat.normalize(np.array(v))
    a = quat.rotation_angle(q)
    assert 0.0 <= a <= np.pi
    assert a == pytest.approx(quat.rotation_angle(-q), abs=1e-12)


def test_wrap_angle_range():
    a = np.array([-3 * np.pi, -np.pi, 0.0, np.pi, 3 * np.pi, 7.0])
    w = quat.wrap_angle(a)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    assert np.allclose(np.cos(w), np.cos(a)) and np.allclose(np.sin(w), np.sin(a))


# --- Euler angles ---------------------------------------------------------

def test_parse_convention_spellings():
    assert quat.parse_convention("zxy") == quat.parse_convention("ZXY") == quat.parse_convention("z-x'-y''")
    with pytest.raises(ValueError):
        quat.parse_convention("zzy")
    with pytest.raises(ValueError):
        quat.parse_convention("zx")


def test_decompose_identity():
    assert np.allclose(quat.euler_decompose(quat.identity(), "zxy"), 0.0)


def test_decompose_single_axis():
    assert np.allclose(quat.euler_decompose(quat.from_axis_angle([0, 0, 1], deg(40)), "zxy"), [deg(40), 0, 0])


def test_decompose_product():
    q = quat.multiply(quat.multiply(quat.from_axis_angle([0, 0, 1], deg(20)),
                                    quat.from_axis_angle([1, 0, 0], deg(10))),
                      quat.from_axis_angle([0, 1, 0], deg(-30)))
    assert np.allclose(quat.euler_decompose(q, "zxy"), deg([20, 10, -30]), atol=1e-12)
    assert np.allclose(quat.euler_compose(deg([20, 10, -30]), "zxy"), q, atol=1e-12)


@pytest.mark.parametrize("conv", quat.TAIT_BRYAN + quat.PROPER_EULER)
def test_decompose_matches_scipy(conv):
    q = random_quats(np.random.default_rng(6), 2000)
    got = quat.euler_decompose(q, conv)
    expected = to_scipy(q).as_euler(conv.upper())
    # same rotation regardless of representation choice
    assert same_rotation(quat.euler_compose(got, conv), q, 1e-9)
    assert np.allclose(quat.wrap_angle(got - expected), 0.0, atol=1e-9)


@pytest.mark.parametrize("conv", quat.TAIT_BRYAN + quat.PROPER_EULER)
def test_compose_matches_scipy(conv):
    a = np.random.default_rng(7).uniform(-np.pi, np.pi, (500, 3))
    assert same_rotation(quat.euler_compose(a, conv), from_scipy(Rotation.from_euler(conv.upper(), a)), 1e-12)


def test_round_trip_ten_thousand():
    rng = np.random.default_rng(8)
    a = rng.uniform(-np.pi, np.pi, (10_000, 3))
    a[:, 1] = rng.uniform(-(np.pi / 2 - 0.05), np.pi / 2 - 0.05, 10_000)
    q = quat.euler_compose(a, "zxy")
    back = quat.euler_compose(quat.euler_decompose(q, "zxy"), "zxy")
    assert np.max(quat.rotation_distance(q, back)) < 1e-7


def test_angles_wrapped_and_middle_in_principal_range():
    q = random_quats(np.random.default_rng(9), 5000)
    tb = quat.euler_decompose(q, "zxy")
    pe = quat.euler_decompose(q, "zxz")
    for a in (tb, pe):
        assert np.all(a > -np.pi) and np.all(a <= np.pi)
    assert np.all(np.abs(tb[:, 1]) <= np.pi / 2)
    assert np.all((pe[:, 1] >= 0) & (pe[:, 1] <= np.pi))


@pytest.mark.parametrize("conv,mid", [("zxy", np.pi / 2), ("zxy", -np.pi / 2), ("xyz", np.pi / 2),
                                      ("zxz", 0.0), ("zxz", np.pi)])
def test_gimbal_lock_puts_rotation_in_first_angle(conv, mid):
    q = quat.euler_compose([0.4, mid, -0.3], conv)
    a = quat.euler_decompose(q, conv)
    assert a[2] == 0.0
    assert same_rotation(quat.euler_compose(a, conv), q, 1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-1.5, 1.5), st.floats(-np.pi, np.pi),
       st.sampled_from(quat.TAIT_BRYAN))
def test_compose_decompose_property(a, b, c, conv):
    q = quat.euler_compose([a, b, c], conv)
    assert same_rotation(quat.euler_compose(quat.euler_decompose(q, conv), conv), q, 1e-7)
