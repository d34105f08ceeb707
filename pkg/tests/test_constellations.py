import math

import numpy as np
import pytest

from dstm.constellations import (
    SPHERE_3X16,
    BitMappingError,
    PairwiseSet,
    SphericalCode,
    UnsupportedConfiguration,
    best_thetas,
    builtin_sphere,
    load_sphere,
    min_angle,
    optimize_sphere,
    pair_determinants,
    psk,
    qo_pairwise,
    save_sphere,
    sphere_to_joint,
    theorem1_theta,
)


def min_sqdist(points):
    d2 = np.sum((points[:, None] - points[None]) ** 2, axis=2)
    return d2[np.triu_indices(len(points), 1)].min()


def test_builtin_3x16_coordinates():
    s = builtin_sphere(3, 16)
    assert min_angle(s) == pytest.approx(52.2444, abs=1e-3)
    row1 = np.array([0.089527456, 0.681333248, -0.166642852]) / math.sqrt(0.5)
    np.testing.assert_allclose(s.points[0], row1, atol=1e-8)
    j = sphere_to_joint(s, 0.5)
    np.testing.assert_allclose(j.points, SPHERE_3X16, atol=1e-9)


def test_builtin_bundled():
    s8 = builtin_sphere(3, 8)
    assert s8.n == 8 and s8.dim == 3
    assert min_angle(s8) >= 74.0
    s64 = builtin_sphere(4, 64)
    assert s64.n == 64 and s64.dim == 4
    assert min_angle(s64) >= 41.3
    with pytest.raises(UnsupportedConfiguration):
        builtin_sphere(3, 32)


def test_spherical_code_norm_invariant():
    with pytest.raises(ValueError):
        SphericalCode(np.array([[1.0, 0, 0], [0, 2.0, 0]]))


def test_load_sphere(tmp_path):
    f = tmp_path / "sphere16.txt"
    f.write_text("# 16-point code at radius sqrt(0.5)\n" + "\n".join(" ".join(repr(float(x)) for x in r) for r in SPHERE_3X16))
    s = load_sphere(f)
    assert (s.n, s.dim) == (16, 3)
    assert min_angle(s) == pytest.approx(52.2444, abs=1e-3)

    f.write_text("0 0 2\n0 0 -2\n")
    assert min_angle(load_sphere(f)) == pytest.approx(180.0)

    f.write_text("1 0 0\n0 1\n")
    with pytest.raises(ValueError, match="different lengths"):
        load_sphere(f)
    f.write_text("1 0 0\n0 3 0\n")
    with pytest.raises(ValueError, match="radius"):
        load_sphere(f)
    f.write_text("1 0 0\n")
    with pytest.raises(ValueError):
        load_sphere(f)
    f.write_text("1 0 x\n0 1 0\n")
    with pytest.raises(ValueError):
        load_sphere(f)


def test_save_load_round_trip(tmp_path):
    s = builtin_sphere(3, 8)
    save_sphere(s, tmp_path / "s.txt", "comment")
    np.testing.assert_array_equal(load_sphere(tmp_path / "s.txt").points, s.points)


def test_min_angle_examples():
    assert min_angle(np.array([[0, 0, 1.0], [0, 0, -1.0]])) == pytest.approx(180.0)
    tetra = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    assert min_angle(tetra) == pytest.approx(math.degrees(math.acos(-1 / 3)), abs=1e-9)
    assert math.degrees(math.acos(-1 / 3)) == pytest.approx(109.4712, abs=1e-4)


def test_optimizer_small_cases():
    assert min_angle(optimize_sphere(3, 2, seed=0, iterations=200, restarts=2)) == pytest.approx(180.0, abs=1e-6)
    assert min_angle(optimize_sphere(3, 4, seed=0, iterations=500, restarts=4)) >= 109.0


def test_optimizer_deterministic():
    a = optimize_sphere(3, 6, seed=3, iterations=200, restarts=3)
    b = optimize_sphere(3, 6, seed=3, iterations=200, restarts=3)
    assert a.points.tobytes() == b.points.tobytes()
    c = optimize_sphere(3, 6, seed=4, iterations=200, restarts=3)
    assert a.points.tobytes() != c.points.tobytes()


def test_optimizer_best_of_restarts():
    best = optimize_sphere(3, 8, seed=1, iterations=300, restarts=4)
    # restart 0 on its own uses the same stream
    single = optimize_sphere(3, 8, seed=1, iterations=300, restarts=1)
    assert min_angle(best) >= min_angle(single)


def test_sphere_to_joint():
    s = builtin_sphere(3, 8)
    j = sphere_to_joint(s, 0.5)
    np.testing.assert_allclose(np.sum(j.points**2, axis=1), 0.5, atol=1e-12)
    theta = math.radians(min_angle(s))
    assert min_sqdist(j.points) == pytest.approx(2 * 0.5 * (1 - math.cos(theta)), rel=1e-9)
    # with the tabulated angle the same formula gives 0.7388
    assert 2 * 0.5 * (1 - math.cos(math.radians(74.8585))) == pytest.approx(0.7388, abs=1e-4)
    with pytest.raises(BitMappingError):
        sphere_to_joint(optimize_sphere(3, 6, iterations=10, restarts=1), 0.5)


def test_qo_pairwise_examples():
    p = qo_pairwise(4, math.pi / 4, 2)
    r = 1 / math.sqrt(2)
    assert p.pairs[0] == pytest.approx([1j * r, 0])
    assert p.pairs[7] == pytest.approx([0, r * np.exp(1j * math.pi / 4)])
    assert p.L == 8 and p.nu == 0.0
    p3 = qo_pairwise(8, math.pi / 8, 3)
    np.testing.assert_allclose(p3.powers(), 1 / 3, atol=1e-12)


@pytest.mark.parametrize("M", range(2, 13))
@pytest.mark.parametrize("n_groups", (2, 3))
def test_qo_pairwise_criteria(M, n_groups):
    p = qo_pairwise(M, theorem1_theta(M), n_groups)
    np.testing.assert_allclose(p.cross_terms(), 0.0, atol=1e-12)
    np.testing.assert_allclose(p.powers(), 1 / n_groups, atol=1e-12)


def test_qo_pairwise_errors():
    with pytest.raises(ValueError):
        qo_pairwise(1, 0.0)
    with pytest.raises(ValueError):
        qo_pairwise(4, math.pi / 2)
    with pytest.raises(ValueError):
        qo_pairwise(4, -0.1)
    with pytest.raises(ValueError):
        qo_pairwise(4, 0.1, n_groups=4)


def test_theorem1_theta():
    assert theorem1_theta(4) == pytest.approx(math.pi / 4)
    assert theorem1_theta(8) == pytest.approx(math.pi / 8)
    assert theorem1_theta(3) == pytest.approx(math.pi / 6)


@pytest.mark.parametrize("M", [3, 5, 7])
def test_odd_m_optima_tie(M):
    best = best_thetas(M)
    for t in (math.pi / (2 * M), 3 * math.pi / (2 * M)):
        assert np.min(np.abs(best - t)) < 1e-12


def test_pair_determinants_zero_rotation():
    v, cross = pair_determinants(qo_pairwise(4, 0.0))
    assert v[cross].min() == pytest.approx(0.0, abs=1e-30)
    v, cross = pair_determinants(PairwiseSet(qo_pairwise(4, 0.0).pairs, 0.5))
    assert not cross.any()


def test_psk_examples():
    q = psk(4, 1 / 3)
    np.testing.assert_allclose(np.sum(q.points**2, axis=1), 1 / 3)
    assert min_sqdist(q.points) == pytest.approx(2 / 3)
    p16 = psk(16, 0.5)
    assert min_sqdist(p16.points) == pytest.approx(1 - math.cos(math.radians(22.5)), rel=1e-12)
    assert round(1 - math.cos(math.radians(22.5)), 4) == 0.0761
    np.testing.assert_allclose(psk(2, 1.0).points, [[1, 0], [-1, 0]], atol=1e-15)
    with pytest.raises(BitMappingError):
        psk(6)
