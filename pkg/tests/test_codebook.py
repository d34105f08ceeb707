import json
import math

import numpy as np
import pytest

from dstm.codebook import (
    ConstellationError,
    DecodingGroup,
    assemble,
    codebook_to_dict,
    coding_gain,
    coding_gain_fast_ostbc,
    detmin_fast_qo,
    diversity_rank,
    export_codebook,
    fast_coding_gain,
    spectral_efficiency,
)
from dstm.codes import build_qostbc4, extract_dispersion
from dstm.constellations import PairwiseSet, builtin_sphere, psk, qo_pairwise, sphere_to_joint
from dstm.linalg import determinant
from dstm.schemes import SHIPPED, SchemeSpec

QO4_SLOTS = ((0, 1, 6, 7), (2, 3, 4, 5))


def qo4(M, theta):
    disp = extract_dispersion(build_qostbc4, 4, 4)
    pset = qo_pairwise(M, theta)
    return assemble(disp, [DecodingGroup(s, pset) for s in QO4_SLOTS], "quasi-orthogonal")


def brute_detmin(cb):
    n = cb.size
    return min(
        abs(determinant(cb.matrices[k] - cb.matrices[l])) ** 2
        for k in range(n)
        for l in range(k + 1, n)
    )


def test_assemble_qo4():
    cb = qo4(4, math.pi / 4)
    assert cb.size == 64
    assert cb.bits_of(63) == "111111"
    assert spectral_efficiency(cb) == 1.5
    assert diversity_rank(cb) == 4
    assert coding_gain(cb) == pytest.approx(2.83, abs=0.01)


def test_assemble_o4_sphere16():
    cb = SchemeSpec("o4", sphere="builtin:3x16").build()
    assert cb.size == 256
    assert len(cb.bits_of(0)) == 8
    assert spectral_efficiency(cb) == 2.0
    assert diversity_rank(cb) == 4


def test_assemble_rejects_nonzero_beta():
    pairs = qo_pairwise(4, math.pi / 4).pairs.copy()
    pairs[3] = [0.5, 0.5]  # Re(a b*) = 0.25 while the rest are 0
    bad = PairwiseSet(pairs, 0.5)
    disp = extract_dispersion(build_qostbc4, 4, 4)
    with pytest.raises(ConstellationError, match="label"):
        assemble(disp, [DecodingGroup(s, bad) for s in QO4_SLOTS], "quasi-orthogonal")


def test_assemble_rejects_bad_partition():
    disp = extract_dispersion(build_qostbc4, 4, 4)
    pset = qo_pairwise(4, math.pi / 4)
    with pytest.raises(ValueError):
        assemble(disp, [DecodingGroup((0, 1, 6, 7), pset), DecodingGroup((0, 3, 4, 5), pset)])
    with pytest.raises(ValueError):
        assemble(disp, [DecodingGroup((0, 1, 6, 7), pset)])


def test_label_order_group0_most_significant():
    cb = qo4(4, math.pi / 4)
    assert cb.strides == (8, 1)
    idx = cb.split_label(np.arange(cb.size))
    np.testing.assert_array_equal(cb.join_label(idx), np.arange(cb.size))
    assert [int(i) for i in cb.split_label(13)] == [1, 5]
    # label 13 carries point 1 of group 0 and point 5 of group 1
    x = np.zeros(8)
    x[list(QO4_SLOTS[0])] = cb.groups[0].points[1]
    x[list(QO4_SLOTS[1])] = cb.groups[1].points[5]
    np.testing.assert_allclose(cb.matrices[13], cb.dispersion.from_real(x), atol=1e-15)


def test_diversity_examples():
    assert diversity_rank(qo4(4, 0.0)) < 4
    assert coding_gain(qo4(4, 0.0)) == 0.0
    assert diversity_rank(SchemeSpec("o4", sphere="builtin:3x8").build()) == 4


def test_coding_gain_two_codewords():
    mats = np.stack([np.eye(4), -np.eye(4)]).astype(complex)
    assert coding_gain(mats) == pytest.approx(16.0)
    assert diversity_rank(mats) == 4


def test_coding_gain_qo4_m8():
    assert coding_gain(qo4(8, math.pi / 8)) == pytest.approx(1.17, abs=0.01)


def test_fast_ostbc_examples():
    j16 = sphere_to_joint(builtin_sphere(3, 16), 0.5)
    assert coding_gain_fast_ostbc(j16, 4) == pytest.approx(4 * (1 - math.cos(math.radians(52.2444))), rel=1e-5)
    assert coding_gain_fast_ostbc(j16, 4) == pytest.approx(1.55, abs=0.01)
    j8 = sphere_to_joint(builtin_sphere(3, 8), 0.5)
    assert coding_gain_fast_ostbc(j8, 4) == pytest.approx(2.95, abs=0.03)
    assert coding_gain_fast_ostbc(psk(4, 1 / 3), 4) == pytest.approx(8 / 3)


def test_detmin_qo_examples():
    p8 = qo_pairwise(8, math.pi / 8)
    assert detmin_fast_qo(p8) == pytest.approx((1 - math.cos(math.pi / 4)) ** 4, rel=1e-12)
    assert detmin_fast_qo(p8) == pytest.approx(0.00736, abs=1e-5)
    assert math.sin(math.pi / 8) ** 4 == pytest.approx(0.02145, abs=1e-5)
    assert brute_detmin(qo4(8, math.pi / 8)) == pytest.approx(detmin_fast_qo(p8), rel=1e-9)

    p4 = qo_pairwise(4, math.pi / 4)
    assert detmin_fast_qo(p4) == pytest.approx(0.25, rel=1e-12)
    assert brute_detmin(qo4(4, math.pi / 4)) == pytest.approx(0.25, rel=1e-9)
    assert 4 * 0.25**0.25 == pytest.approx(2.83, abs=0.01)

    for M in (2, 3, 4, 8):
        assert detmin_fast_qo(qo_pairwise(M, 0.0)) == 0.0


@pytest.mark.parametrize("M", [2, 3, 4, 5, 8])
def test_detmin_qo_matches_brute_force_off_optimum(M):
    theta = 0.3 * 2 * math.pi / M
    cb = qo4(M, theta)
    fast = 4 * detmin_fast_qo(cb.groups[0].constellation) ** 0.25
    assert coding_gain(cb) == pytest.approx(fast, rel=1e-6)


@pytest.mark.parametrize("spec", [s for s in SHIPPED if s.n_tx == 4], ids=lambda s: s.label)
def test_fast_path_matches_brute_force(spec):
    cb = spec.build()
    assert coding_gain(cb) == pytest.approx(fast_coding_gain(cb), rel=1e-9)
    assert (diversity_rank(cb) == cb.n_tx) == (coding_gain(cb) > 0)


def test_spectral_efficiency_qo8():
    cb = SchemeSpec("qo8", m=8).build()
    assert cb.size == 2**12
    assert spectral_efficiency(cb) == 1.5
    assert cb.group_sizes == (16, 16, 16)


def test_export(tmp_path):
    cb = qo4(4, math.pi / 4)
    export_codebook(cb, tmp_path / "cb.json")
    doc = json.loads((tmp_path / "cb.json").read_text())
    assert doc == codebook_to_dict(cb)
    assert doc["n_tx"] == 4 and doc["size"] == 64 and len(doc["labels"]) == 64
    m = np.array(doc["matrices"][5])
    np.testing.assert_allclose(m[..., 0] + 1j * m[..., 1], cb.matrices[5])
    assert [g["size"] for g in doc["groups"]] == [8, 8]
