"""Subset-indexed information functions over relay subsets.

All four families take disjoint parameter subsets ``a``, ``b`` and a subset ``s`` of ``b``:

* ``I_{A,B}(S) = sum_{i in S} R_i - I(Y_S; Yhat_S | Yhat_A, Yhat_{B\\S}, Y [, X_N])``
* ``J_{A,B}(S) = I(X_S; Yhat_{B\\S}, Yhat_A, Y | X_A, X_{B\\S})
  - I(Y_S; Yhat_S | X_A, Yhat_A, Y, X_B, Yhat_{B\\S})``
* ``K_{A,B}(S)``: as J with X added to both conditioning sets
* ``R_B(S) = I(X, X_S; Yhat_{B\\S}, Y | X_{B\\S}) - I(Y_S; Yhat_S | X, X_B, Yhat_{B\\S}, Y)``

Single-argument forms use ``a = 0``; the plain ``I(S)``/``J(S)`` use ``b = N``.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import subsets as ss
from .pmf import (EMPTY, JointPmf, Mode, VarSet, X, XS, Y, YH, YS, ChannelSpec, build_joint,
                  cond_mutual_info)


@dataclass(frozen=True)
class EvalContext:
    joint: JointPmf
    mode: Mode
    n: int
    rates: tuple[float, ...] | None = None
    condition_on_xn: bool = False

    def __post_init__(self):
        if self.rates is not None:
            if len(self.rates) != self.n:
                raise ValueError(f"rate vector must have length {self.n}")
            if any(r < 0 for r in self.rates):
                raise ValueError("rate vector entries must be >= 0")

    @classmethod
    def from_spec(cls, spec: ChannelSpec, rates=None, joint: JointPmf | None = None) -> EvalContext:
        """Digital specs take their link capacities as rates; full specs take ``rates`` if given."""
        j = joint if joint is not None else build_joint(spec)
        if spec.mode is Mode.DIGITAL:
            r = tuple(float(v) for v in (rates if rates is not None else spec.link_capacities))
            return cls(j, Mode.DIGITAL, spec.n, r, condition_on_xn=False)
        r = tuple(float(v) for v in rates) if rates is not None else None
        return cls(j, Mode.FULL, spec.n, r, condition_on_xn=True)

    def with_rates(self, rates) -> EvalContext:
        return EvalContext(self.joint, self.mode, self.n, tuple(float(v) for v in rates),
                           self.condition_on_xn)

    @property
    def full(self) -> int:
        return ss.full_mask(self.n)

    def mi(self, a: VarSet, b: VarSet, c: VarSet = EMPTY) -> float:
        return cond_mutual_info(self.joint, a, b, c)


def _check(ctx: EvalContext, a: int, b: int, s: int) -> None:
    for m in (a, b, s):
        ss.check_mask(m, ctx.n)
    if a & b:
        raise ValueError(f"parameter subsets overlap: {ss.fmt(a)} and {ss.fmt(b)}")
    if not ss.is_subset(s, b):
        raise ValueError(f"{ss.fmt(s)} is not a subset of {ss.fmt(b)}")


def _need_full(ctx: EvalContext, what: str) -> None:
    if ctx.mode is not Mode.FULL:
        raise ValueError(f"{what} is defined only for full-mode channels")


def rate_sum(ctx: EvalContext, s: int) -> float:
    if ctx.rates is None:
        raise ValueError("this context carries no rate vector")
    return float(sum(ctx.rates[i - 1] for i in ss.to_indices(s)))


def compression_cost(ctx: EvalContext, a: int, b: int, s: int) -> float:
    """I(Y_S; Yhat_S | Yhat_A, Yhat_{B\\S}, Y [, X_N]), the information part of the I-family."""
    _check(ctx, a, b, s)
    cond = YH(a | (b & ~s)) | Y
    if ctx.condition_on_xn:
        cond = cond | XS(ctx.full)
    return ctx.mi(YS(s), YH(s), cond)


def eval_I(ctx: EvalContext, a: int, b: int, s: int) -> float:
    _check(ctx, a, b, s)
    if s == 0:
        return 0.0
    return rate_sum(ctx, s) - compression_cost(ctx, a, b, s)


def eval_J(ctx: EvalContext, a: int, b: int, s: int) -> float:
    _need_full(ctx, "J")
    _check(ctx, a, b, s)
    if s == 0:
        return 0.0
    rest = b & ~s
    gain = ctx.mi(XS(s), YH(rest | a) | Y, XS(a | rest))
    cost = ctx.mi(YS(s), YH(s), XS(a | b) | YH(a | rest) | Y)
    return gain - cost


def eval_K(ctx: EvalContext, a: int, b: int, s: int) -> float:
    _need_full(ctx, "K")
    _check(ctx, a, b, s)
    if s == 0:
        return 0.0
    rest = b & ~s
    gain = ctx.mi(XS(s), YH(rest | a) | Y, X | XS(a | rest))
    cost = ctx.mi(YS(s), YH(s), X | XS(a | b) | YH(a | rest) | Y)
    return gain - cost


def eval_R(ctx: EvalContext, b: int, s: int) -> float:
    _need_full(ctx, "R")
    _check(ctx, 0, b, s)
    rest = b & ~s
    gain = ctx.mi(X | XS(s), YH(rest) | Y, XS(rest))
    cost = ctx.mi(YS(s), YH(s), X | XS(b) | YH(rest) | Y)
    return gain - cost


def eval_J_circ(ctx: EvalContext, a: int, b: int) -> float:
    """I(X_A, Yhat_A; X_B, Yhat_B | X_{(A u B)^c}, Yhat_{(A u B)^c}, Y)."""
    _need_full(ctx, "J(A o B)")
    _check(ctx, a, b, 0)
    out = ctx.full & ~(a | b)
    return ctx.mi(XS(a) | YH(a), XS(b) | YH(b), XS(out) | YH(out) | Y)


def eval_I_cross(ctx: EvalContext, a: int, b: int) -> float:
    """I(Yhat_A; Yhat_B | Yhat_{(A u B)^c}, Y [, X_N]), the coupling term between I(A) and I(B)."""
    _check(ctx, a, b, 0)
    out = ctx.full & ~(a | b)
    cond = YH(out) | Y
    if ctx.condition_on_xn:
        cond = cond | XS(ctx.full)
    return ctx.mi(YH(a), YH(b), cond)


def source_rate(ctx: EvalContext, m: int | None = None) -> float:
    """I(X; Yhat_M, Y | X_M) (digital: I(X; Yhat_M, Y)); ``m`` defaults to N."""
    m = ctx.full if m is None else m
    if ctx.mode is Mode.DIGITAL:
        return ctx.mi(X, YH(m) | Y)
    return ctx.mi(X, YH(m) | Y, XS(m))


def mac_bound(ctx: EvalContext, s: int) -> float:
    """I(X_S; Y | X_{S^c}), the destination's multiple-access bound on relay bin rates."""
    _need_full(ctx, "the relay MAC bound")
    return ctx.mi(XS(s), Y, XS(ctx.full & ~s))
