from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import joint_as_dict, random_joint
from cfrelay.pmf import (EMPTY, X, XS, Y, YH, YS, ChannelSpec, InformationError, JointPmf, Mode,
                         SpecError, build_joint, cond_entropy, cond_mutual_info, h2, marginalize)
from cfrelay.verify import InstanceGenerator


def uniform_digital_n1() -> ChannelSpec:
    u = np.full(2, 0.5)
    return ChannelSpec(Mode.DIGITAL, 1, 2, 2, (2,), (2,), np.full((2, 2, 2), 0.25), u,
                       (np.full((2, 2), 0.5),), link_capacities=(0.0,))


def wired_full_n1() -> ChannelSpec:
    # Y = X, Y1 = X, Yhat1 = Y1
    ch = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for x1 in range(2):
            ch[x, x1, x, x] = 1.0
    q = np.stack([np.eye(2), np.eye(2)])
    u = np.full(2, 0.5)
    return ChannelSpec(Mode.FULL, 1, 2, 2, (2,), (2,), ch, u, (q,), alphabet_xi=(2,), p_xi=(u,))


def test_uniform_digital_joint_is_flat():
    j = build_joint(uniform_digital_n1())
    assert j.names == ("X", "Y", "Y1", "Yhat1")
    assert np.allclose(j.probs, 1 / 16, atol=0, rtol=0)


def test_wired_full_joint_has_four_cells():
    j = build_joint(wired_full_n1())
    nz = j.flat[j.flat > 0]
    assert nz.size == 4 and np.all(nz == 0.25)


@pytest.mark.parametrize("mode,n", [("digital", 2), ("full", 2), ("full", 1)])
def test_joint_matches_nested_loops(mode, n):
    spec = InstanceGenerator.make(mode, n, 2, seed=3).spec(0)
    j = build_joint(spec)
    names, ref = oracles.joint_dict(spec)
    assert list(j.names) == names
    for idx, p in ref.items():
        assert abs(j.probs[idx] - p) <= 1e-15


def test_marginal_matches_oracle():
    spec = InstanceGenerator.make("full", 2, 2, seed=9).spec(1)
    j = build_joint(spec)
    names, ref = oracles.joint_dict(spec)
    m = marginalize(j, Y | YH(1))
    assert m.names == ("Y", "Yhat1")
    want = oracles.marginal(names, ref, ["Y", "Yhat1"])
    for key, p in want.items():
        assert abs(m.probs[key] - p) <= 1e-15


def test_marginalize_trivial_cases():
    spec = InstanceGenerator.make("full", 1, 2, seed=2).spec(0)
    j = build_joint(spec)
    assert np.allclose(marginalize(j, X).probs, spec.p_x, atol=1e-15)
    same = marginalize(j, list(j.names))
    assert np.array_equal(same.probs, j.probs)
    with pytest.raises(ValueError):
        marginalize(j, ["X7"])


def test_noiseless_bit_and_independence(bsc):
    p = 0.5 * bsc(0.0)
    j = JointPmf(["A", "B"], [2, 2], p)
    assert cond_mutual_info(j, ["A"], ["B"]) == pytest.approx(1.0, abs=1e-15)
    j2 = JointPmf(["A", "B"], [2, 2], np.full((2, 2), 0.25))
    assert cond_mutual_info(j2, ["A"], ["B"]) == 0.0


def test_bsc_capacity_closed_form(bsc):
    j = JointPmf(["X", "Y"], [2, 2], 0.5 * bsc(0.11))
    want = 1 - (-0.11 * math.log2(0.11) - 0.89 * math.log2(0.89))
    assert cond_mutual_info(j, X, Y) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.5001, abs=1e-4)


def test_entropy_examples():
    j = JointPmf(["X", "Y"], [2, 2], np.diag([0.5, 0.5]))
    assert cond_entropy(j, X) == pytest.approx(1.0, abs=1e-15)
    assert cond_entropy(j, Y, X) == 0.0
    assert h2(0.5) == 1.0


def test_entropy_matches_oracle():
    spec = InstanceGenerator.make("digital", 1, 3, seed=4).spec(2)
    j = build_joint(spec)
    names, ref = oracles.joint_dict(spec)
    assert cond_entropy(j, X | YS(1)) == pytest.approx(oracles.entropy(names, ref, ["X", "Y1"]), abs=1e-10)
    got = cond_entropy(j, YH(1), Y)
    want = oracles.entropy(names, ref, ["Yhat1", "Y"]) - oracles.entropy(names, ref, ["Y"])
    assert got == pytest.approx(want, abs=1e-10)


def test_empty_argument_gives_exact_zero():
    j = random_joint(5)
    assert cond_mutual_info(j, [], ["V0"]) == 0.0
    assert cond_mutual_info(j, ["V1"], EMPTY) == 0.0


def test_overlap_rejected():
    j = random_joint(6)
    with pytest.raises(ValueError):
        cond_mutual_info(j, ["V0"], ["V0"])
    with pytest.raises(ValueError):
        cond_mutual_info(j, ["V0"], ["V1"], ["V1"])
    with pytest.raises(ValueError):
        cond_entropy(j, ["V0"], ["V0"])


def test_large_negative_cmi_is_an_error():
    class Broken(JointPmf):
        def entropy_of_axes(self, axes):
            return 5.0 if len(axes) == 2 else 0.0  # H(AB) > H(A) + H(B)

    j = Broken(["A", "B"], [2, 2], np.full((2, 2), 0.25))
    with pytest.raises(InformationError):
        cond_mutual_info(j, ["A"], ["B"])


def test_joint_rejects_bad_mass():
    with pytest.raises(ValueError):
        JointPmf(["A"], [2], [0.5, 0.49])
    with pytest.raises(ValueError):
        JointPmf(["A"], [2], [1.1, -0.1])


def test_spec_validation_names_row():
    spec = uniform_digital_n1()
    bad = spec.with_compressions([np.array([[0.5, 0.4], [0.5, 0.5]])])
    with pytest.raises(SpecError) as e:
        bad.validate()
    assert any("y_1=0" in p and "0.9" in p for p in e.value.problems)


def test_tiny_negative_entries_are_clamped():
    spec = uniform_digital_n1()
    q = np.array([[1.0 + 1e-16, -1e-16], [0.5, 0.5]])
    out = spec.with_compressions([q]).validate()
    assert out.compressions[0].min() == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_symmetry_and_nonnegativity(seed):
    j = random_joint(seed)
    names = list(j.names)
    a, b, c = names[:1], names[1:2], names[2:]
    ab = cond_mutual_info(j, a, b, c)
    assert ab >= 0.0
    assert abs(ab - cond_mutual_info(j, b, a, c)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_chain_rule(seed):
    j = random_joint(seed, max_vars=5)
    names = list(j.names)
    if len(names) < 3:
        return
    a, b, b2, c = names[:1], names[1:2], names[2:3], names[3:]
    lhs = cond_mutual_info(j, a, b + b2, c)
    rhs = cond_mutual_info(j, a, b, c) + cond_mutual_info(j, a, b2, c + b)
    assert abs(lhs - rhs) <= 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_cmi_matches_naive_sum(seed):
    j = random_joint(1000 + seed)
    names, ref = joint_as_dict(j)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        role = rng.integers(0, 4, size=len(names))  # 0 a, 1 b, 2 c, 3 unused
        a = [nm for nm, r in zip(names, role) if r == 0]
        b = [nm for nm, r in zip(names, role) if r == 1]
        c = [nm for nm, r in zip(names, role) if r == 2]
        assert abs(cond_mutual_info(j, a, b, c) - oracles.cmi(names, ref, a, b, c)) <= 1e-10


def test_varset_names_are_canonical():
    vs = YH(0b101) | X | XS(0b10) | Y
    assert vs.names() == ["X", "X2", "Y", "Yhat1", "Yhat3"]
