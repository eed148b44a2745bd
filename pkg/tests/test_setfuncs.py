from __future__ import annotations

import numpy as np
import pytest

import oracles
from cfrelay import subsets as ss
from cfrelay.pmf import X, XS, Y, YH, Mode, build_joint, cond_mutual_info
from cfrelay.setfuncs import (EvalContext, eval_I, eval_I_cross, eval_J, eval_J_circ, eval_K,
                              eval_R, mac_bound, source_rate)
from cfrelay.specio import load_example
from cfrelay.verify import InstanceGenerator, disjoint_pairs


def full_ctx(seed=0, index=0, n=2):
    return InstanceGenerator.make("full", n, 2, seed=seed).context(index)


def triples(n):
    for a, b in disjoint_pairs(n):
        for s in ss.iter_subsets(b):
            yield a, b, s


def test_empty_subset_is_exact_zero():
    ctx = full_ctx()
    for a, b in disjoint_pairs(2):
        assert eval_I(ctx, a, b, 0) == 0.0
        assert eval_J(ctx, a, b, 0) == 0.0
        assert eval_K(ctx, a, b, 0) == 0.0


def test_constant_compression_costs_nothing():
    spec = load_example("full_n2_constant")
    ctx = EvalContext.from_spec(spec, rates=[0.3, 0.7])
    assert eval_I(ctx, 0, 0b11, 0b11) == pytest.approx(1.0, abs=1e-12)
    assert eval_I(ctx, 0, 0b11, 0b10) == pytest.approx(0.7, abs=1e-12)
    j = ctx.joint
    for s in (0b01, 0b10, 0b11):
        rest = 0b11 & ~s
        gain = cond_mutual_info(j, XS(s), YH(rest) | Y, XS(rest))
        assert eval_J(ctx, 0, 0b11, s) == pytest.approx(gain, abs=1e-12)
        assert eval_J(ctx, 0, 0b11, s) >= 0


def test_r_reductions():
    ctx = full_ctx(4, 2)
    for b in ss.iter_all(2):
        assert eval_R(ctx, b, 0) == pytest.approx(source_rate(ctx, b), abs=1e-12)
    assert eval_R(ctx, 0, 0) == pytest.approx(cond_mutual_info(ctx.joint, X, Y), abs=1e-12)


@pytest.mark.parametrize("index", range(4))
def test_digital_I_matches_oracle(index):
    ctx = InstanceGenerator.make("digital", 2, 2, seed=8).context(index)
    names, ref = oracles.joint_dict(InstanceGenerator.make("digital", 2, 2, seed=8).spec(index))
    for a, b, s in triples(2):
        want = oracles.oracle_I(names, ref, 2, ctx.rates, a, b, s, cond_xn=False)
        assert eval_I(ctx, a, b, s) == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("index", range(4))
def test_full_families_match_oracle(index):
    gen = InstanceGenerator.make("full", 2, 2, seed=12)
    ctx = gen.context(index)
    names, ref = oracles.joint_dict(gen.spec(index))
    for a, b, s in triples(2):
        assert eval_I(ctx, a, b, s) == pytest.approx(
            oracles.oracle_I(names, ref, 2, ctx.rates, a, b, s, cond_xn=True), abs=1e-10)
        assert eval_J(ctx, a, b, s) == pytest.approx(oracles.oracle_J(names, ref, a, b, s), abs=1e-10)
        assert eval_K(ctx, a, b, s) == pytest.approx(oracles.oracle_K(names, ref, a, b, s), abs=1e-10)
    for b in ss.iter_all(2):
        for s in ss.iter_subsets(b):
            assert eval_R(ctx, b, s) == pytest.approx(oracles.oracle_R(names, ref, b, s), abs=1e-10)


def test_k_with_independent_source_and_constant_compression():
    gen = InstanceGenerator.make("full", 2, {"yhat": 1}, seed=3)
    spec = gen.spec(0)
    ctx = EvalContext.from_spec(spec)
    names, ref = oracles.joint_dict(spec)
    for b in ss.iter_all(2):
        for s in ss.iter_subsets(b):
            if not s:
                continue
            want = oracles.cmi(names, ref, oracles.xs(s), ["Y"], ["X"] + oracles.xs(b & ~s))
            assert eval_K(ctx, 0, b, s) == pytest.approx(want, abs=1e-10)


def test_cross_terms_match_oracle():
    gen = InstanceGenerator.make("full", 3, 2, seed=2)
    ctx = gen.context(0)
    names, ref = oracles.joint_dict(gen.spec(0))
    for a, b in [(0b001, 0b010), (0b011, 0b100), (0b100, 0b001)]:
        out = 0b111 & ~(a | b)
        want = oracles.cmi(names, ref, oracles.xs(a) + oracles.yh(a), oracles.xs(b) + oracles.yh(b),
                           oracles.xs(out) + oracles.yh(out) + ["Y"])
        assert eval_J_circ(ctx, a, b) == pytest.approx(want, abs=1e-10)
        want = oracles.cmi(names, ref, oracles.yh(a), oracles.yh(b),
                           oracles.yh(out) + ["Y"] + oracles.xs(0b111))
        assert eval_I_cross(ctx, a, b) == pytest.approx(want, abs=1e-10)


def test_mac_bound_matches_oracle():
    gen = InstanceGenerator.make("full", 2, 2, seed=6)
    ctx = gen.context(3)
    names, ref = oracles.joint_dict(gen.spec(3))
    for s in (1, 2, 3):
        want = oracles.cmi(names, ref, oracles.xs(s), ["Y"], oracles.xs(3 & ~s))
        assert mac_bound(ctx, s) == pytest.approx(want, abs=1e-10)


def test_precondition_errors():
    ctx = full_ctx()
    with pytest.raises(ValueError):
        eval_I(ctx, 0b01, 0b01, 0)
    with pytest.raises(ValueError):
        eval_J(ctx, 0, 0b01, 0b10)
    with pytest.raises(ValueError):
        eval_K(ctx, 0, 0b100, 0)
    dig = InstanceGenerator.make("digital", 2, 2, seed=0).context(0)
    with pytest.raises(ValueError):
        eval_J(dig, 0, 3, 1)
    with pytest.raises(ValueError):
        EvalContext(ctx.joint, Mode.FULL, 2, rates=(0.1, -0.1))
    with pytest.raises(ValueError):
        EvalContext(ctx.joint, Mode.FULL, 2, rates=(0.1,))


def test_digital_context_uses_link_capacities():
    spec = load_example("digital_n2")
    ctx = EvalContext.from_spec(spec)
    assert ctx.rates == (0.5, 0.5) and not ctx.condition_on_xn
    assert np.isclose(source_rate(ctx), cond_mutual_info(build_joint(spec), X, YH(3) | Y))
