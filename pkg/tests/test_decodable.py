from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cfrelay import subsets as ss
from cfrelay.decodable import (DELTA, DecodabilityError, FeasibilityKind, RelayClass, classify_relays,
                               feasible_sets, is_feasible, largest_feasible_set, peel_supported_subset,
                               violators)
from cfrelay.pmf import ChannelSpec, Mode
from cfrelay.setfuncs import EvalContext
from cfrelay.specio import load_example
from cfrelay.verify import InstanceGenerator

FULL = InstanceGenerator.make("full", 3, 2, seed=21)
DIGITAL = InstanceGenerator.make("digital", 3, 2, seed=21)


def oracle_feasible(names, ref, ctx, kind, f, s):
    if kind is FeasibilityKind.I_NONSTRICT:
        v = oracles.oracle_I(names, ref, ctx.n, ctx.rates, 0, f, s, ctx.condition_on_xn)
    elif kind is FeasibilityKind.J_NONSTRICT:
        v = oracles.oracle_J(names, ref, 0, f, s)
    else:
        v = oracles.oracle_K(names, ref, 0, f, s)
    return v > DELTA if kind.strict else v > -DELTA


@pytest.mark.parametrize("index", range(6))
@pytest.mark.parametrize("kind", list(FeasibilityKind))
def test_largest_set_matches_brute_force(index, kind):
    gen = DIGITAL if kind is FeasibilityKind.I_NONSTRICT else FULL
    spec = gen.spec(index)
    ctx = gen.context(index)
    names, ref = oracles.joint_dict(spec)
    want = oracles.brute_largest(3, lambda f, s: oracle_feasible(names, ref, ctx, kind, f, s))
    assert largest_feasible_set(ctx, kind) == want


def test_disconnected_relay_is_undecodable():
    # relay observes pure noise, so its compression carries no information and costs rate
    ch = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for x1 in range(2):
            for y1 in range(2):
                ch[x, x1, x, y1] = 0.5
    u = np.full(2, 0.5)
    spec = ChannelSpec(Mode.FULL, 1, 2, 2, (2,), (2,), ch, u, (np.stack([np.eye(2)] * 2),),
                       alphabet_xi=(2,), p_xi=(u,)).validate()
    rep = classify_relays(EvalContext.from_spec(spec))
    assert rep.d_j == 0 and rep.d_j_prime == 0
    assert rep.classes == {1: RelayClass.UNDECODABLE}


def test_constant_compression_is_boundary_decodable():
    ctx = EvalContext.from_spec(load_example("full_n2_constant"))
    rep = classify_relays(ctx)
    assert rep.d_j_prime == 0b11
    assert largest_feasible_set(ctx, FeasibilityKind.J_NONSTRICT) == 0b11


def test_fine_example_classes():
    rep = classify_relays(EvalContext.from_spec(load_example("full_n2_fine")))
    assert rep.to_dict() == {"d_j": [1], "d_j_prime": [1],
                             "classes": {"1": "jointly_decodable", "2": "undecodable"}}


@pytest.mark.parametrize("index", range(10))
def test_strict_set_inside_boundary_set(index):
    rep = classify_relays(FULL.context(index))
    assert ss.is_subset(rep.d_j, rep.d_j_prime)
    for i, c in rep.classes.items():
        bit = 1 << (i - 1)
        assert (c is RelayClass.JOINTLY_DECODABLE) == bool(rep.d_j & bit)


def test_empty_set_always_feasible():
    ctx = FULL.context(0)
    for kind in FeasibilityKind:
        assert is_feasible(ctx, kind, 0)
        assert 0 in feasible_sets(ctx, kind)


def test_union_failure_raises(monkeypatch):
    import cfrelay.decodable as dec
    ctx = FULL.context(0)
    monkeypatch.setattr(dec, "feasible_sets", lambda *a, **k: [0b001, 0b010])
    monkeypatch.setattr(dec, "is_feasible", lambda c, k, b, a=0, delta=DELTA: b != 0b011)
    with pytest.raises(DecodabilityError):
        dec.largest_feasible_set(ctx, FeasibilityKind.J_NONSTRICT)


def test_peeling_edge_cases():
    ctx = FULL.context(1)
    assert peel_supported_subset(ctx, FeasibilityKind.J_NONSTRICT, 0b001, 0) is None
    with pytest.raises(ValueError):
        peel_supported_subset(ctx, FeasibilityKind.J_NONSTRICT, 0b011, 0b010)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 500), st.sampled_from([FeasibilityKind.J_NONSTRICT, FeasibilityKind.K_STRICT,
                                              FeasibilityKind.K_NONSTRICT]))
def test_peeling_returns_feasible_subset(index, kind):
    ctx = FULL.context(index)
    for a in ss.iter_all(3):
        b = 0b111 & ~a
        c = peel_supported_subset(ctx, kind, a, b)
        if c is None:
            continue
        assert c and ss.is_subset(c, b)
        assert not violators(ctx, kind, a, c)
        assert is_feasible(ctx, kind, c, a)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 500))
def test_feasible_sets_closed_under_union(index):
    ctx = FULL.context(index)
    for kind in (FeasibilityKind.J_NONSTRICT, FeasibilityKind.K_NONSTRICT):
        fs = feasible_sets(ctx, kind)
        for f in fs:
            for g in fs:
                assert is_feasible(ctx, kind, f | g)
