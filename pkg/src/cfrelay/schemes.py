"""Achievable rates of the five compress-and-forward decoding schemes at a fixed distribution.

Scheme ids:

* ``cfs``: cumulative encoding, forward decoding, successive decoding of the compressions
* ``cfj``: cumulative encoding, forward decoding, joint decoding
* ``ruj``: repetitive encoding, all blocks united, joint decoding over a relay subset ``m``
* ``cbs``: cumulative encoding, backward decoding, successive decoding
* ``cbj``: cumulative encoding, backward decoding, joint decoding over D_J
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import subsets as ss
from .decodable import DELTA, classify_relays
from .lp import LinearProgram, solve_lp
from .pmf import Mode
from .setfuncs import (EvalContext, compression_cost, eval_I, eval_J, eval_R, mac_bound,
                       source_rate)

SCHEMES = ("cfs", "cfj", "ruj", "cbs", "cbj")
DIGITAL_SCHEMES = ("cfs", "cfj")
ARGMIN_TOL = 1e-9


class SchemeModeError(ValueError):
    """Scheme not defined for the channel's mode."""


@dataclass
class SchemeReport:
    scheme: str
    rate: float | None  # None means infeasible
    argmin_subsets: list[int] = field(default_factory=list)
    witness_rates: list[float] | None = None
    d_j: int | None = None
    d_j_prime: int | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.rate is not None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "scheme": self.scheme,
            "rate": _num(self.rate) if self.rate is not None else "infeasible",
            "argmin_subsets": [ss.to_indices(s) for s in self.argmin_subsets],
            "witness_rates": None if self.witness_rates is None else [_num(r) for r in self.witness_rates],
            "d_j": None if self.d_j is None else ss.to_indices(self.d_j),
            "d_j_prime": None if self.d_j_prime is None else ss.to_indices(self.d_j_prime),
            "diagnostics": _jsonable(self.diagnostics),
        }
        return d


def _num(v: float) -> float:
    v = float(v)
    if not np.isfinite(v):
        raise ValueError(f"non-finite value {v} in report")
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _need_mode(ctx: EvalContext, mode: Mode, scheme: str) -> None:
    if ctx.mode is not mode:
        raise SchemeModeError(f"{scheme} is not defined for {ctx.mode.value}-mode channels here")


def _argmin(values: dict[int, float]) -> tuple[float, list[int]]:
    lo = min(values.values())
    return lo, sorted((s for s, v in values.items() if v <= lo + ARGMIN_TOL), key=ss.lex_key)


def _table(values: dict[int, float]) -> dict[str, float]:
    return {ss.fmt(s): v for s, v in sorted(values.items(), key=lambda kv: ss.lex_key(kv[0]))}


# --------------------------------------------------------------------------- full mode


def _mac_rows(lp: LinearProgram, ctx: EvalContext, nvars: int) -> dict[int, float]:
    bounds = {}
    for s1 in ss.iter_subsets(ctx.full):
        if s1 == 0:
            continue
        row = np.zeros(nvars)
        row[[i - 1 for i in ss.to_indices(s1)]] = 1.0
        bounds[s1] = mac_bound(ctx, s1)
        lp.add(row, "<=", bounds[s1])
    return bounds


def rate_cfs(ctx: EvalContext) -> SchemeReport:
    """Successive decoding: needs a rate vector inside the MAC region covering every compression cost."""
    _need_mode(ctx, Mode.FULL, "cfs")
    n = ctx.n
    lp = LinearProgram(np.zeros(n))
    mac = _mac_rows(lp, ctx, n)
    cost = {}
    for s in ss.iter_subsets(ctx.full):
        if s == 0:
            continue
        row = np.zeros(n)
        row[[i - 1 for i in ss.to_indices(s)]] = 1.0
        cost[s] = compression_cost(ctx, 0, ctx.full, s)
        lp.add(row, ">=", cost[s])
    res = solve_lp(lp)
    diag = {"mac_bound": _table(mac), "compression_cost": _table(cost)}
    if not res.feasible:
        return SchemeReport("cfs", None, diagnostics=diag)
    diag["lp_residual"] = res.residual
    return SchemeReport("cfs", source_rate(ctx), witness_rates=[float(r) for r in res.witness],
                        diagnostics=diag)


def rate_cfj(ctx: EvalContext) -> SchemeReport:
    """Max over MAC-feasible rate vectors of min_S [I(X;Yhat_N,Y|X_N) - cost(S) + sum R_S]."""
    _need_mode(ctx, Mode.FULL, "cfj")
    n = ctx.n
    obj = np.zeros(n + 1)
    obj[n] = 1.0
    lp = LinearProgram(obj, lower=[0.0] * n + [None])
    _mac_rows(lp, ctx, n + 1)
    i0 = source_rate(ctx)
    cost = {}
    for s in ss.iter_subsets(ctx.full):
        row = np.zeros(n + 1)
        row[n] = 1.0
        row[[i - 1 for i in ss.to_indices(s)]] = -1.0
        cost[s] = compression_cost(ctx, 0, ctx.full, s) if s else 0.0
        lp.add(row, "<=", i0 - cost[s])
    res = solve_lp(lp)
    if not res.feasible:  # cannot happen: R = 0, t = min_S(...) is always feasible
        raise RuntimeError("max-min rate program reported infeasible")
    r = res.witness[:n]
    values = {s: i0 - cost[s] + float(sum(r[i - 1] for i in ss.to_indices(s))) for s in cost}
    lo, arg = _argmin(values)
    t = float(res.optimum)
    diag = {"unclamped": t, "clamped": t < 0, "source_rate": i0, "lp_residual": res.residual,
            "terms": _table(values)}
    return SchemeReport("cfj", max(t, 0.0), argmin_subsets=arg,
                        witness_rates=[float(v) for v in r], diagnostics=diag)


def ruj_values(ctx: EvalContext, m: int) -> dict[int, float]:
    return {s: eval_R(ctx, m, s) for s in ss.iter_subsets(m)}


def rate_ruj(ctx: EvalContext, m: int | None = None) -> SchemeReport:
    """min over S in m of R_m(S); relays outside ``m`` are treated as noise."""
    _need_mode(ctx, Mode.FULL, "ruj")
    m = ctx.full if m is None else ss.check_mask(m, ctx.n)
    values = ruj_values(ctx, m)
    lo, arg = _argmin(values)
    diag = {"m": ss.to_indices(m), "unclamped": lo, "clamped": lo < 0, "terms": _table(values)}
    return SchemeReport("ruj", max(lo, 0.0), argmin_subsets=arg, diagnostics=diag)


def rate_cbs(ctx: EvalContext) -> SchemeReport:
    _need_mode(ctx, Mode.FULL, "cbs")
    values = {s: eval_J(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full)}
    bad = sorted((s for s, v in values.items() if v <= -DELTA), key=ss.lex_key)
    diag = {"j_values": _table(values), "violators": [ss.to_indices(s) for s in bad]}
    if bad:
        return SchemeReport("cbs", None, diagnostics=diag)
    return SchemeReport("cbs", source_rate(ctx), diagnostics=diag)


def rate_cbj(ctx: EvalContext) -> SchemeReport:
    _need_mode(ctx, Mode.FULL, "cbj")
    rep = classify_relays(ctx)
    inner = rate_ruj(ctx, rep.d_j)
    diag = dict(inner.diagnostics)
    diag["classes"] = {str(i): c.value for i, c in sorted(rep.classes.items())}
    return SchemeReport("cbj", inner.rate, argmin_subsets=inner.argmin_subsets, d_j=rep.d_j,
                        d_j_prime=rep.d_j_prime, diagnostics=diag)


# --------------------------------------------------------------------------- digital links


def rate_cfs_digital(ctx: EvalContext) -> SchemeReport:
    _need_mode(ctx, Mode.DIGITAL, "digital cfs")
    values = {s: eval_I(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full)}
    bad = sorted((s for s, v in values.items() if v <= -DELTA), key=ss.lex_key)
    diag = {"i_values": _table(values), "violators": [ss.to_indices(s) for s in bad]}
    witness = list(ctx.rates)
    if bad:
        return SchemeReport("cfs", None, witness_rates=witness, diagnostics=diag)
    return SchemeReport("cfs", source_rate(ctx), witness_rates=witness, diagnostics=diag)


def rate_cfj_digital(ctx: EvalContext) -> SchemeReport:
    _need_mode(ctx, Mode.DIGITAL, "digital cfj")
    i0 = source_rate(ctx)
    values = {s: i0 + eval_I(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full)}
    lo, arg = _argmin(values)
    diag = {"unclamped": lo, "clamped": lo < 0, "source_rate": i0, "terms": _table(values)}
    return SchemeReport("cfj", max(lo, 0.0), argmin_subsets=arg, witness_rates=list(ctx.rates),
                        diagnostics=diag)


def compute_rate(ctx: EvalContext, scheme: str, m: int | None = None) -> SchemeReport:
    scheme = scheme.lower()
    if ctx.mode is Mode.DIGITAL:
        if scheme == "cfs":
            return rate_cfs_digital(ctx)
        if scheme == "cfj":
            return rate_cfj_digital(ctx)
        if scheme in SCHEMES:
            raise SchemeModeError(f"{scheme} needs relay inputs; digital-link specs support cfs and cfj only")
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "ruj":
        return rate_ruj(ctx, m)
    fn = {"cfs": rate_cfs, "cfj": rate_cfj, "cbs": rate_cbs, "cbj": rate_cbj}.get(scheme)
    if fn is None:
        raise ValueError(f"unknown scheme {scheme!r}")
    return fn(ctx)


def all_rates(ctx: EvalContext, m: int | None = None) -> list[SchemeReport]:
    names = DIGITAL_SCHEMES if ctx.mode is Mode.DIGITAL else SCHEMES
    return [compute_rate(ctx, s, m) for s in names]
