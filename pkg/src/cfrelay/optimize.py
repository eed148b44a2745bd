"""Search over compression laws (and optionally input laws) for the best scheme rate.

Each conditional block is held as nonnegative unnormalized weights; a move perturbs one
weight or steps along a random direction, and blocks are renormalized before evaluation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize

from . import subsets as ss
from .pmf import ChannelSpec, Mode
from .schemes import SCHEMES, compute_rate
from .decodable import classify_relays
from .setfuncs import (EvalContext, compression_cost, eval_I, eval_J, eval_R, mac_bound,
                       source_rate)

SUCCESSIVE_TOL = 1e-6


@dataclass(frozen=True)
class SearchConfig:
    scheme: str
    free: str = "compressions"  # or "all": also p_x and p_xi
    restarts: int = 20
    iters: int = 600
    step: float = 0.3
    decay: float = 0.6
    min_step: float = 1e-4
    seed: int = 0
    tol: float = 1e-7
    m: int | None = None  # relay subset for ruj
    enumerate_deterministic: bool = False
    refine: bool = True  # smooth constrained polish after each climb

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.free not in ("compressions", "all"):
            raise ValueError("free must be 'compressions' or 'all'")
        if self.restarts < 1 or self.iters < 0:
            raise ValueError("restarts must be >= 1 and iters >= 0")
        if not (self.step > 0 and self.min_step > 0 and 0 < self.decay < 1):
            raise ValueError("step sizes must be > 0 and decay in (0, 1)")


@dataclass
class RestartTrace:
    restart: int
    start: float | None
    best: float | None
    evaluations: int
    improvements: list[float] = field(default_factory=list)


@dataclass
class OptimizationResult:
    scheme: str
    best_rate: float | None  # None: no feasible candidate found
    best_spec: ChannelSpec
    traces: list[RestartTrace]
    successive_feasible: bool | None
    successive_margin: float | None
    enumeration_best: float | None = None
    enumeration_count: int | None = None

    def to_dict(self) -> dict[str, Any]:
        from .specio import spec_to_dict
        return {
            "scheme": self.scheme,
            "best_rate": self.best_rate if self.best_rate is not None else "infeasible",
            "successive_feasible": self.successive_feasible,
            "successive_margin": self.successive_margin,
            "enumeration_best": self.enumeration_best,
            "enumeration_count": self.enumeration_count,
            "restarts": [
                {"restart": t.restart, "start": t.start, "best": t.best,
                 "evaluations": t.evaluations, "improvements": t.improvements}
                for t in self.traces
            ],
            "best_spec": spec_to_dict(self.best_spec),
        }


# --------------------------------------------------------------------------- scoring


def evaluate(spec: ChannelSpec, scheme: str, m: int | None = None) -> tuple[float | None, float]:
    """(rate or None if infeasible, search score).

    The score of a feasible candidate is its unclamped min value, which orders candidates
    like the rate but keeps a slope where the rate is clamped at 0. Infeasible candidates
    score minus their constraint violation and always rank below feasible ones.
    """
    ctx = EvalContext.from_spec(spec)
    rep = compute_rate(ctx, scheme, m)
    if rep.feasible:
        return rep.rate, float(rep.diagnostics.get("unclamped", rep.rate))
    return None, -violation(ctx, scheme)


def violation(ctx: EvalContext, scheme: str) -> float:
    """How far a constrained scheme is from feasibility.

    Successive decoding (cfs) is feasible exactly when the joint-decoding max-min reaches
    the source rate, so the gap between the two measures the shortfall. For cbs it is the
    most negative J value.
    """
    if scheme == "cfs":
        joint = compute_rate(ctx, "cfj")
        return max(0.0, joint.diagnostics["source_rate"] - joint.diagnostics["unclamped"])
    if scheme == "cbs":
        return max(0.0, -min(eval_J(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full)))
    return 0.0


def _key(rate: float | None, score: float) -> tuple[int, float]:
    return (int(rate is not None), score)


def successive_margin(spec: ChannelSpec, scheme: str) -> float | None:
    """Smallest constraint value of the matching successive scheme, for cfj and ruj optima."""
    ctx = EvalContext.from_spec(spec)
    if scheme == "cfj":
        if ctx.mode is Mode.DIGITAL:
            return min(eval_I(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full))
        return -violation(ctx, "cfs")
    if scheme == "ruj":
        return min(eval_J(ctx, 0, ctx.full, s) for s in ss.iter_subsets(ctx.full))
    return None


# --------------------------------------------------------------------------- parameter blocks


def _blocks(spec: ChannelSpec, free: str) -> list[tuple[str, int]]:
    out = [("q", i) for i in range(spec.n)]
    if free == "all":
        out.append(("px", 0))
        if spec.is_full:
            out += [("pxi", i) for i in range(spec.n)]
    return out


def _get(spec: ChannelSpec, b: tuple[str, int]) -> np.ndarray:
    kind, i = b
    if kind == "q":
        return spec.compressions[i]
    if kind == "px":
        return spec.p_x
    return spec.p_xi[i]


def _assemble(spec: ChannelSpec, blocks, weights) -> ChannelSpec:
    comps = list(spec.compressions)
    p_x = None
    p_xi = list(spec.p_xi) if spec.p_xi is not None else None
    touched_xi = False
    for (kind, i), w in zip(blocks, weights):
        p = w / w.sum(axis=-1, keepdims=True)
        if kind == "q":
            comps[i] = p
        elif kind == "px":
            p_x = p
        else:
            p_xi[i] = p
            touched_xi = True
    out = spec.with_compressions(comps)
    if p_x is not None or touched_xi:
        out = out.with_inputs(p_x=p_x, p_xi=p_xi if touched_xi else None)
    return out


def _random_weights(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=shape) + 1e-3


# --------------------------------------------------------------------------- smooth polish

REFINE_MARGIN = 1e-8


def _program(ctx: EvalContext, scheme: str, m: int | None):
    """(number of auxiliary variables, aux start, objective(ctx, aux), constraints(ctx, aux) >= 0).

    Each scheme as a smooth constrained program: min-of-terms rates through an epigraph
    variable t, the full-mode rate vector R as explicit variables.
    """
    n, full = ctx.n, ctx.mode is Mode.FULL
    subs = list(ss.iter_subsets(ctx.full))
    idx = {s: [i - 1 for i in ss.to_indices(s)] for s in subs}

    def rsum(r, s):
        return float(sum(r[i] for i in idx[s]))

    if scheme in ("ruj", "cbj"):
        mm = (ctx.full if m is None else m) if scheme == "ruj" else classify_relays(ctx).d_j
        ms = list(ss.iter_subsets(mm))
        t0 = min(eval_R(ctx, mm, s) for s in ms)
        return 1, [t0], (lambda c, a: a[0]), (lambda c, a: [eval_R(c, mm, s) - a[0] for s in ms])
    if scheme == "cbs":
        return 0, [], (lambda c, a: source_rate(c)), (
            lambda c, a: [eval_J(c, 0, c.full, s) - REFINE_MARGIN for s in subs if s])
    if not full:
        if scheme == "cfs":
            return 0, [], (lambda c, a: source_rate(c)), (
                lambda c, a: [eval_I(c, 0, c.full, s) - REFINE_MARGIN for s in subs if s])
        t0 = source_rate(ctx) + min(eval_I(ctx, 0, ctx.full, s) for s in subs)
        return 1, [t0], (lambda c, a: a[0]), (
            lambda c, a: [source_rate(c) + eval_I(c, 0, c.full, s) - a[0] for s in subs])

    def mac(c, r):
        return [mac_bound(c, s) - rsum(r, s) for s in subs if s]

    rep = compute_rate(ctx, "cfj")
    r0 = list(rep.witness_rates)
    if scheme == "cfs":
        return n, r0, (lambda c, a: source_rate(c)), (
            lambda c, a: mac(c, a) + [rsum(a, s) - compression_cost(c, 0, c.full, s) - REFINE_MARGIN
                                      for s in subs if s])
    return n + 1, r0 + [rep.diagnostics["unclamped"]], (lambda c, a: a[n]), (
        lambda c, a: mac(c, a[:n]) + [source_rate(c) - compression_cost(c, 0, c.full, s)
                                      + rsum(a, s) - a[n] for s in subs if s]
        + [source_rate(c) - a[n]])


def _refine(template, blocks, weights, cfg: SearchConfig):
    """Polish a point with SLSQP on the scheme's smooth program; returns new weights or None."""
    shapes = [w.shape for w in weights]
    sizes = [w.size for w in weights]
    nw = sum(sizes)
    spec0 = _assemble(template, blocks, weights)
    ctx0 = EvalContext.from_spec(spec0)
    naux, aux0, obj, cons = _program(ctx0, cfg.scheme, cfg.m)

    def unpack(z):
        out, pos = [], 0
        for shape, size in zip(shapes, sizes):
            w = np.clip(z[pos:pos + size], 0.0, None).reshape(shape) + 1e-300
            out.append(_normalize(w))
            pos += size
        return out

    cache: dict[bytes, EvalContext] = {}

    def ctx_of(z):
        key = z[:nw].tobytes()
        if key not in cache:
            if len(cache) > 64:
                cache.clear()
            cache[key] = EvalContext.from_spec(_assemble(template, blocks, unpack(z[:nw])))
        return cache[key]

    rows = []
    pos = 0
    for shape, size in zip(shapes, sizes):
        width = shape[-1]
        for r in range(size // width):
            a = np.zeros(nw + naux)
            a[pos + r * width: pos + (r + 1) * width] = 1.0
            rows.append(a)
        pos += size
    rows = np.array(rows)
    z0 = np.concatenate([np.concatenate([w.ravel() for w in weights]), np.asarray(aux0, float)])
    lo_aux = [0.0] * naux
    if cfg.scheme in ("ruj", "cbj", "cfj"):
        lo_aux[-1] = None  # epigraph variable is free
    bounds = [(0.0, 1.0)] * nw + [(lo, None) for lo in lo_aux]
    res = minimize(
        lambda z: -obj(ctx_of(z), z[nw:]), z0, method="SLSQP", bounds=bounds,
        constraints=[{"type": "ineq", "fun": lambda z: np.asarray(cons(ctx_of(z), z[nw:]))},
                     {"type": "eq", "fun": lambda z: rows @ z - 1.0}],
        options={"maxiter": 200, "ftol": 1e-12})
    if not np.all(np.isfinite(res.x)):
        return None
    return unpack(res.x[:nw])


# --------------------------------------------------------------------------- search


def _normalize(w: np.ndarray) -> np.ndarray:
    return w / w.sum(axis=-1, keepdims=True)


def _moves(weights, coords, step, rng):
    """Yield candidate weight lists: a +/- step on one coordinate, or along a random direction."""
    if rng.uniform() < 0.5:
        k, idx = coords[int(rng.integers(len(coords)))]
        for sign in (1.0, -1.0):
            cand = [x.copy() if j == k else x for j, x in enumerate(weights)]
            cand[k][idx] = max(0.0, cand[k][idx] + sign * step)
            yield cand
    else:
        d = [rng.normal(size=w.shape) if w.shape[-1] > 1 else np.zeros(w.shape) for w in weights]
        for sign in (1.0, -1.0):
            yield [np.maximum(w + sign * step * dk, 0.0) for w, dk in zip(weights, d)]


def _climb(template, blocks, weights, cfg: SearchConfig, rng, restart: int,
           step: float | None = None) -> tuple:
    weights = [_normalize(w) for w in weights]
    spec = _assemble(template, blocks, weights)
    rate, score = evaluate(spec, cfg.scheme, cfg.m)
    best_key = _key(rate, score)
    trace = RestartTrace(restart, rate, rate, 1)
    coords = [(k, idx) for k, w in enumerate(weights) for idx in np.ndindex(w.shape)
              if w.shape[-1] > 1]
    if not coords:
        return spec, rate, best_key, trace

    def better(key):
        return key[0] > best_key[0] or (key[0] == best_key[0] and key[1] > best_key[1] + cfg.tol)

    def try_cand(cand):
        if any(np.any(c.sum(axis=-1) <= 0) for c in cand):
            return None
        cand = [_normalize(c) for c in cand]
        cspec = _assemble(template, blocks, cand)
        r, sc = evaluate(cspec, cfg.scheme, cfg.m)
        trace.evaluations += 1
        return cand, cspec, r, _key(r, sc)

    step = cfg.step if step is None else step
    fails = 0
    patience = 2 * len(coords)
    for _ in range(cfg.iters):
        if step < cfg.min_step:
            break
        improved = False
        for cand in _moves(weights, coords, step, rng):
            got = try_cand(cand)
            if got is None or not better(got[3]):
                continue
            # keep going in the same direction while it pays off
            while got is not None and better(got[3]):
                prev = weights
                weights, spec, rate, best_key = got
                delta = [w - p for w, p in zip(weights, prev)]
                got = try_cand([np.maximum(w + 2 * d, 0.0) for w, d in zip(weights, delta)])
            trace.best = rate
            if rate is not None:
                trace.improvements.append(rate)
            improved = True
            break
        if improved:
            fails = 0
        else:
            fails += 1
            if fails >= patience:
                step *= cfg.decay
                fails = 0
    if cfg.refine:
        try:
            polished = _refine(template, blocks, weights, cfg)
        except (ValueError, ArithmeticError, RuntimeError):
            polished = None
        if polished is not None:
            got = try_cand(polished)
            if got is not None and better(got[3]):
                weights, spec, rate, best_key = got
                trace.best = rate
                if rate is not None:
                    trace.improvements.append(rate)
    return spec, rate, best_key, trace


def optimize(template: ChannelSpec, cfg: SearchConfig) -> OptimizationResult:
    template = template.validate()
    blocks = _blocks(template, cfg.free)
    best_spec, best_rate, best_key = None, None, None
    traces = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        if r == 0:
            weights = [np.array(_get(template, b), dtype=float) for b in blocks]
        else:
            weights = [_random_weights(rng, _get(template, b).shape) for b in blocks]
        spec, rate, key, trace = _climb(template, blocks, weights, cfg, rng, r)
        traces.append(trace)
        if best_key is None or key > best_key:
            best_spec, best_rate, best_key = spec, rate, key
    # final polish from the best point with a finer step
    rng = np.random.default_rng([cfg.seed, cfg.restarts])
    weights = [np.array(_get(best_spec, b), dtype=float) for b in blocks]
    spec, rate, key, trace = _climb(template, blocks, weights, cfg, rng, cfg.restarts,
                                    step=cfg.step * cfg.decay ** 3)
    traces.append(trace)
    if key > best_key:
        best_spec, best_rate, best_key = spec, rate, key
    margin = successive_margin(best_spec, cfg.scheme)
    result = OptimizationResult(
        cfg.scheme, best_rate, best_spec, traces,
        successive_feasible=None if margin is None else bool(margin >= -SUCCESSIVE_TOL),
        successive_margin=margin,
    )
    if cfg.enumerate_deterministic:
        val, _, count = enumerate_deterministic(template, cfg.scheme, cfg.m)
        result.enumeration_best = val
        result.enumeration_count = count
    return result


def deterministic_maps(spec: ChannelSpec, i: int):
    """All deterministic compression laws for relay ``i`` (0-based), as one-hot arrays."""
    shape = spec.compression_shape(i)
    rows = list(np.ndindex(shape[:-1]))
    for choice in itertools.product(range(shape[-1]), repeat=len(rows)):
        q = np.zeros(shape)
        for row, c in zip(rows, choice):
            q[row + (c,)] = 1.0
        yield q


def enumerate_deterministic(template: ChannelSpec, scheme: str, m: int | None = None,
                            limit: int = 200_000) -> tuple[float | None, ChannelSpec | None, int]:
    """Exhaustive best rate over deterministic compression maps (inputs held fixed)."""
    sizes = [template.compression_shape(i) for i in range(template.n)]
    total = 1
    for s in sizes:
        total *= s[-1] ** int(np.prod(s[:-1]))
    if total > limit:
        raise ValueError(f"{total} deterministic maps exceed the enumeration limit {limit}")
    best, best_spec, count = None, None, 0
    for combo in itertools.product(*(list(deterministic_maps(template, i)) for i in range(template.n))):
        spec = template.with_compressions(combo)
        rate, _ = evaluate(spec, scheme, m)
        count += 1
        if rate is not None and (best is None or rate > best):
            best, best_spec = rate, spec
    return best, best_spec, count


def apply_erasure(spec: ChannelSpec, relays: int, p: float) -> ChannelSpec:
    """Pass each targeted compression through with probability ``p``, else emit a fresh erasure symbol."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("erasure keep-probability must lie in [0, 1]")
    ss.check_mask(relays, spec.n)
    comps = []
    for i, q in enumerate(spec.compressions):
        if relays >> i & 1:
            erase = np.full(q.shape[:-1] + (1,), 1.0 - p)
            comps.append(np.concatenate([p * q, erase], axis=-1))
        else:
            comps.append(q)
    return spec.with_compressions(comps)
