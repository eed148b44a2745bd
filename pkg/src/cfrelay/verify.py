"""Randomized instance generation and numeric checks of the set-function identities and rate claims."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import subsets as ss
from .decodable import (DELTA, FeasibilityKind, classify_relays, family_value, is_feasible,
                        largest_feasible_set, peel_supported_subset)
from .pmf import ChannelSpec, Mode
from .schemes import rate_cbj, rate_cbs, rate_cfj, rate_cfj_digital, rate_cfs, rate_cfs_digital, rate_ruj, ruj_values
from .setfuncs import (EvalContext, eval_I, eval_I_cross, eval_J, eval_J_circ, eval_K, eval_R)

IDENTITY_TOL = 1e-9
INEQ_TOL = 1e-9
TIE_TOL = 1e-9
OPTIMUM_TOL = 1e-3

ALPHABET_KEYS = ("x", "xi", "y", "yi", "yhat")


@dataclass(frozen=True)
class InstanceGenerator:
    """Seeded stream of random channel specs; instance ``k`` depends only on ``(seed, k)``."""

    mode: Mode
    n: int
    alphabets: tuple[tuple[str, int], ...] = ()
    seed: int = 0
    degenerate_ratio: float = 0.1
    max_rate: float = 1.0
    smoothing: float = 0.0  # mix weight of the uniform law in each compression row

    def __post_init__(self):
        bad = [k for k, _ in self.alphabets if k not in ALPHABET_KEYS]
        if bad:
            raise ValueError(f"unknown alphabet keys {bad}; expected {ALPHABET_KEYS}")
        if not 0.0 <= self.degenerate_ratio <= 1.0:
            raise ValueError("degenerate_ratio must lie in [0, 1]")
        if not 0.0 <= self.smoothing <= 1.0:
            raise ValueError("smoothing must lie in [0, 1]")

    @classmethod
    def make(cls, mode: Mode | str, n: int, alphabets: dict[str, int] | int | None = None,
             **kw) -> InstanceGenerator:
        if isinstance(alphabets, int):
            alphabets = {k: alphabets for k in ALPHABET_KEYS}
        return cls(Mode(mode), n, tuple(sorted((alphabets or {}).items())), **kw)

    def size(self, key: str) -> int:
        return int(dict(self.alphabets).get(key, 2))

    def _cond(self, rng, shape, n_cond) -> np.ndarray:
        w = rng.uniform(0.0, 1.0, size=shape)
        rows = w.reshape(int(np.prod(shape[:n_cond], dtype=int)), -1)
        for r in rows:
            if rng.uniform() < self.degenerate_ratio:
                r[:] = 0.0
                r[rng.integers(r.size)] = 1.0
        rows /= rows.sum(axis=1, keepdims=True)
        return rows.reshape(shape)

    def spec(self, index: int) -> ChannelSpec:
        rng = np.random.default_rng([self.seed, index])
        n, full = self.n, self.mode is Mode.FULL
        ax, ay = self.size("x"), self.size("y")
        axi = (self.size("xi"),) * n if full else None
        ayi, ayh = (self.size("yi"),) * n, (self.size("yhat"),) * n
        if full:
            channel = self._cond(rng, (ax, *axi, ay, *ayi), 1 + n)
        else:
            channel = self._cond(rng, (ax, ay, *ayi), 1)
        p_x = self._cond(rng, (ax,), 0)
        p_xi = tuple(self._cond(rng, (a,), 0) for a in axi) if full else None
        comps = []
        for i in range(n):
            shape = (axi[i], ayi[i], ayh[i]) if full else (ayi[i], ayh[i])
            q = self._cond(rng, shape, len(shape) - 1)
            if self.smoothing:
                q = (1.0 - self.smoothing) * q + self.smoothing / shape[-1]
            comps.append(q)
        caps = tuple(float(v) for v in rng.uniform(0.0, self.max_rate, size=n))
        return ChannelSpec(self.mode, n, ax, ay, ayi, ayh, channel, p_x, tuple(comps),
                           alphabet_xi=axi, p_xi=p_xi,
                           link_capacities=None if full else caps)

    def context(self, index: int) -> EvalContext:
        """Evaluation context; full-mode instances also carry a random rate vector for the I-family."""
        spec = self.spec(index)
        if self.mode is Mode.FULL:
            rng = np.random.default_rng([self.seed, index, 1])
            return EvalContext.from_spec(spec, rates=rng.uniform(0.0, self.max_rate, size=self.n))
        return EvalContext.from_spec(spec)

    def describe(self) -> dict[str, Any]:
        return {"mode": self.mode.value, "n": self.n,
                "alphabets": {k: self.size(k) for k in ALPHABET_KEYS},
                "seed": self.seed, "degenerate_ratio": self.degenerate_ratio,
                "max_rate": self.max_rate, "smoothing": self.smoothing}


@dataclass
class SuiteReport:
    suite: str
    generator: dict[str, Any]
    instances: int = 0
    checks: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    degenerate: list[dict[str, Any]] = field(default_factory=list)
    max_residual: dict[str, float] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def note(self, check: str, residual: float) -> None:
        self.checks += 1
        self.max_residual[check] = max(self.max_residual.get(check, 0.0), float(residual))

    def fail(self, seed, index, check: str, residual: float, **subsets) -> None:
        self.failures.append(_entry(seed, index, check, residual, subsets))

    def tie(self, seed, index, check: str, residual: float, **subsets) -> None:
        self.degenerate.append(_entry(seed, index, check, residual, subsets))

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "generator": self.generator,
            "instances": self.instances,
            "checks": self.checks,
            "passed": self.passed,
            "failures": self.failures,
            "degenerate": self.degenerate,
            "max_residual": dict(sorted(self.max_residual.items())),
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)


def _entry(seed, index, check, residual, subsets) -> dict[str, Any]:
    return {"seed": seed, "index": index, "check": check, "residual": float(residual),
            "subsets": {k: ss.to_indices(v) if isinstance(v, int) else v
                        for k, v in sorted(subsets.items())}}


def disjoint_pairs(n: int):
    """All ordered pairs (a, b) of disjoint subsets of N."""
    for a in ss.iter_all(n):
        rest = ss.complement(a, n)
        for b in ss.iter_subsets(rest):
            yield a, b


# --------------------------------------------------------------------------- lemma suite


_FAMILIES = {
    "I": (eval_I, FeasibilityKind.I_NONSTRICT),
    "J": (eval_J, FeasibilityKind.J_NONSTRICT),
    "K": (eval_K, FeasibilityKind.K_STRICT),
}


def _check_superadditivity(rep, seed, k, ctx, name, fn):
    """family_{A u B}(S) >= family_A(S1) + family_{A,B}(S2) >= family_A(S1) + family_B(S2)."""
    n = ctx.n
    for a, b in disjoint_pairs(n):
        u = a | b
        for s in ss.iter_subsets(u):
            s1, s2 = s & a, s & b
            whole = fn(ctx, 0, u, s)
            first = fn(ctx, 0, a, s1) + fn(ctx, a, b, s2)
            second = fn(ctx, 0, a, s1) + fn(ctx, 0, b, s2)
            for check, lhs, rhs in ((f"{name}:union_split", whole, first),
                                    (f"{name}:cross_drop", first, second)):
                viol = max(0.0, rhs - lhs)
                rep.note(check, viol)
                if lhs - rhs < -INEQ_TOL:
                    rep.fail(seed, k, check, viol, a=a, b=b, s=s)


def _check_union_closure(rep, seed, k, ctx, name, kind):
    n = ctx.n
    feas = {f: is_feasible(ctx, kind, f) for f in ss.iter_all(n)}
    union = 0
    for f, ok in feas.items():
        if ok:
            union |= f
    for a in ss.iter_all(n):
        if not feas[a]:
            continue
        for b in ss.iter_all(n):
            if b & a:
                continue
            # part 1: both feasible on their own
            if feas[b]:
                rep.note(f"{name}:union_closed", 0.0)
                if not feas[a | b]:
                    rep.fail(seed, k, f"{name}:union_closed", 1.0, a=a, b=b)
            # part 2: b feasible given a
            if b and is_feasible(ctx, kind, b, a=a):
                rep.note(f"{name}:conditional_union", 0.0)
                if not feas[a | b]:
                    rep.fail(seed, k, f"{name}:conditional_union", 1.0, a=a, b=b)
    rep.note(f"{name}:largest_is_union", 0.0)
    try:
        largest = largest_feasible_set(ctx, kind)
    except Exception as e:  # noqa: BLE001 - a failure here is data
        rep.fail(seed, k, f"{name}:largest_is_union", 1.0, error=str(e))
        return
    if largest != union:
        rep.fail(seed, k, f"{name}:largest_is_union", 1.0, largest=largest, union=union)


def _check_peeling(rep, seed, k, ctx, name, kind):
    n = ctx.n
    for a, b in disjoint_pairs(n):
        if b == 0:
            continue
        c = peel_supported_subset(ctx, kind, a, b)
        pre = family_value(ctx, kind, a, b, b)
        holds = pre > DELTA if kind.strict else pre > -DELTA
        if not holds:
            if c is not None:
                rep.fail(seed, k, f"{name}:peel_precondition", pre, a=a, b=b)
            continue
        rep.note(f"{name}:peel", 0.0)
        if c is None or c == 0:
            if kind.strict and pre <= 2 * DELTA:
                rep.tie(seed, k, f"{name}:peel", pre, a=a, b=b)
            else:
                rep.fail(seed, k, f"{name}:peel", pre, a=a, b=b)
            continue
        if not ss.is_subset(c, b) or not is_feasible(ctx, kind, c, a=a):
            rep.fail(seed, k, f"{name}:peel", pre, a=a, b=b, c=c)


def _check_identities(rep, seed, k, ctx, full: bool):
    n = ctx.n
    for a, b in disjoint_pairs(n):
        lhs = eval_I(ctx, 0, ctx.full, a) + eval_I(ctx, 0, ctx.full, b)
        rhs = eval_I(ctx, 0, ctx.full, a | b) + eval_I_cross(ctx, a, b)
        res = abs(lhs - rhs)
        rep.note("I:pair_identity", res)
        if res >= IDENTITY_TOL:
            rep.fail(seed, k, "I:pair_identity", res, a=a, b=b)
        if full:
            lhs = eval_J(ctx, 0, ctx.full, a) + eval_J(ctx, 0, ctx.full, b)
            rhs = eval_J(ctx, 0, ctx.full, a | b) + eval_J_circ(ctx, a, b)
            res = abs(lhs - rhs)
            rep.note("J:pair_identity", res)
            if res >= IDENTITY_TOL:
                rep.fail(seed, k, "J:pair_identity", res, a=a, b=b)


def _check_r_split(rep, seed, k, ctx):
    n = ctx.n
    for a, b in disjoint_pairs(n):
        u = a | b
        for s in ss.iter_subsets(u):
            s1, s2 = s & a, s & b
            whole = eval_R(ctx, u, s)
            bound = eval_R(ctx, a, s1) + eval_K(ctx, 0, u, s2)
            viol = max(0.0, bound - whole)
            rep.note("R:split_bound", viol)
            if whole - bound < -INEQ_TOL:
                rep.fail(seed, k, "R:split_bound", viol, a=a, b=b, s=s)
            if s2 == b:
                exact = eval_R(ctx, a, s1) + eval_K(ctx, a, b, b)
                res = abs(whole - exact)
                rep.note("R:split_identity", res)
                if res >= IDENTITY_TOL:
                    rep.fail(seed, k, "R:split_identity", res, a=a, b=b, s=s)


def run_lemma_suite(gen: InstanceGenerator, count: int,
                    progress: Callable[[int], None] | None = None) -> SuiteReport:
    rep = SuiteReport("lemmas", gen.describe())
    full = gen.mode is Mode.FULL
    for k in range(count):
        ctx = gen.context(k)
        _check_identities(rep, gen.seed, k, ctx, full)
        names = ("I", "J", "K") if full else ("I",)
        for name in names:
            fn, kind = _FAMILIES[name]
            _check_superadditivity(rep, gen.seed, k, ctx, name, fn)
            _check_union_closure(rep, gen.seed, k, ctx, name, kind)
            _check_peeling(rep, gen.seed, k, ctx, name, kind)
        if full:
            _check_union_closure(rep, gen.seed, k, ctx, "K>=", FeasibilityKind.K_NONSTRICT)
            _check_peeling(rep, gen.seed, k, ctx, "K>=", FeasibilityKind.K_NONSTRICT)
            _check_r_split(rep, gen.seed, k, ctx)
        rep.instances += 1
        if progress:
            progress(k)
    return rep


# --------------------------------------------------------------------------- theorem suite


def _check_min_structure(rep, seed, k, ctx, name, fn, kind):
    """When D^c is nonempty it is a minimizer of family(S) over S in N, and every minimizer contains it."""
    n = ctx.n
    d = largest_feasible_set(ctx, kind)
    dc = ss.complement(d, n)
    if dc == 0:
        return
    values = {s: fn(ctx, 0, ctx.full, s) for s in ss.iter_all(n)}
    lo = min(values.values())
    gap = values[dc] - lo
    rep.note(f"{name}:complement_is_argmin", gap)
    if gap > TIE_TOL:
        rep.fail(seed, k, f"{name}:complement_is_argmin", gap, d=d)
    near = [s for s, v in values.items() if v <= lo + TIE_TOL]
    for s in near:
        if not ss.is_subset(dc, s):
            rep.tie(seed, k, f"{name}:argmin_contains_complement", values[s] - lo, d=d, s=s)
    rep.note(f"{name}:complement_negative", max(0.0, values[dc]))
    if values[dc] >= TIE_TOL:
        rep.fail(seed, k, f"{name}:complement_negative", values[dc], d=d)
    elif values[dc] > -TIE_TOL:
        rep.tie(seed, k, f"{name}:complement_negative", values[dc], d=d)


def ruj_table(ctx: EvalContext) -> dict[int, float]:
    """Unclamped min_{S in M} R_M(S) for every M."""
    return {m: min(ruj_values(ctx, m).values()) for m in ss.iter_all(ctx.n)}


def _check_best_subset(rep, seed, k, ctx):
    n = ctx.n
    rel = classify_relays(ctx)
    table = ruj_table(ctx)
    best = max(table.values())
    for label, m in (("D_J", rel.d_j), ("D'_J", rel.d_j_prime)):
        gap = best - table[m]
        rep.note(f"best_subset:attained_at_{label}", gap)
        if gap > TIE_TOL:
            rep.fail(seed, k, f"best_subset:attained_at_{label}", gap,
                     d_j=rel.d_j, d_j_prime=rel.d_j_prime, m=m)
    for m, v in table.items():
        if ss.is_subset(m, rel.d_j_prime):
            continue
        rep.note("best_subset:outside_strictly_lower", 0.0)
        if v > best - TIE_TOL:
            rep.tie(seed, k, "best_subset:outside_strictly_lower", best - v,
                    m=m, d_j_prime=rel.d_j_prime)
    # scheme equivalence, on clamped rates as reported
    cbj = rate_cbj(ctx).rate
    best_ruj = max(rate_ruj(ctx, m).rate for m in ss.iter_all(n))
    res = abs(cbj - best_ruj)
    rep.note("cbj_equals_best_ruj", res)
    if res > TIE_TOL:
        rep.fail(seed, k, "cbj_equals_best_ruj", res, d_j=rel.d_j)


def _check_fixed_equalities(rep, seed, k, ctx, full):
    if full:
        cfs, cfj = rate_cfs(ctx), rate_cfj(ctx)
    else:
        cfs, cfj = rate_cfs_digital(ctx), rate_cfj_digital(ctx)
    if cfs.feasible:
        res = abs(cfs.rate - cfj.rate)
        rep.note("cfs_feasible_implies_cfj_equal", res)
        if res > TIE_TOL:
            rep.fail(seed, k, "cfs_feasible_implies_cfj_equal", res)
    if full:
        cbs = rate_cbs(ctx)
        if cbs.feasible:
            res = abs(cbs.rate - rate_ruj(ctx).rate)
            rep.note("cbs_feasible_implies_ruj_equal", res)
            if res > TIE_TOL:
                rep.fail(seed, k, "cbs_feasible_implies_ruj_equal", res)


def run_theorem_suite(gen: InstanceGenerator, count: int,
                      progress: Callable[[int], None] | None = None) -> SuiteReport:
    rep = SuiteReport("theorems", gen.describe())
    full = gen.mode is Mode.FULL
    for k in range(count):
        ctx = gen.context(k)
        _check_fixed_equalities(rep, gen.seed, k, ctx, full)
        _check_min_structure(rep, gen.seed, k, ctx, "I", eval_I, FeasibilityKind.I_NONSTRICT)
        if full:
            _check_min_structure(rep, gen.seed, k, ctx, "J", eval_J, FeasibilityKind.J_NONSTRICT)
            _check_best_subset(rep, gen.seed, k, ctx)
        rep.instances += 1
        if progress:
            progress(k)
    ties = sum(1 for d in rep.degenerate if d["check"] == "best_subset:outside_strictly_lower")
    rep.extra["best_subset_tie_instances"] = len(
        {d["index"] for d in rep.degenerate if d["check"] == "best_subset:outside_strictly_lower"})
    rep.extra["best_subset_tie_entries"] = ties
    return rep


# --------------------------------------------------------------------------- optimum suite


@dataclass(frozen=True)
class OptimumBatch:
    """Optimize both schemes of a pair on one fixed template and compare the suprema."""

    name: str
    template: ChannelSpec
    schemes: tuple[str, str]
    restarts: int = 20
    iters: int = 600
    seed: int = 0
    enumerate: bool = True


def default_optimum_batches(seed: int = 0, restarts: int = 20, iters: int = 600) -> list[OptimumBatch]:
    from .specio import load_example
    return [
        OptimumBatch("digital_n1_binary", load_example("digital_n1_erasure"), ("cfs", "cfj"),
                     restarts, iters, seed),
        OptimumBatch("full_n2_binary", load_example("full_n2_binary"), ("ruj", "cbs"),
                     restarts, iters, seed),
    ]


def run_optimum_suite(batches: list[OptimumBatch],
                      progress: Callable[[str], None] | None = None) -> SuiteReport:
    from .optimize import SearchConfig, enumerate_deterministic, optimize
    rep = SuiteReport("optima", {"batches": [
        {"name": b.name, "schemes": list(b.schemes), "restarts": b.restarts, "iters": b.iters,
         "seed": b.seed} for b in batches]})
    for k, b in enumerate(batches):
        best = {}
        for scheme in b.schemes:
            res = optimize(b.template, SearchConfig(scheme, restarts=b.restarts, iters=b.iters,
                                                    seed=b.seed))
            best[scheme] = res.best_rate
            info = {"best_rate": res.best_rate, "successive_feasible": res.successive_feasible,
                    "successive_margin": res.successive_margin}
            if b.enumerate:
                val, _, count = enumerate_deterministic(b.template, scheme)
                info["enumeration_best"] = val
                info["enumeration_count"] = count
                if val is not None:
                    # a search that found nothing feasible misses the enumerated map entirely
                    found = res.best_rate if res.best_rate is not None else val - 1.0
                    shortfall = max(0.0, val - found)
                    rep.note("enumeration_below_search", shortfall)
                    if shortfall > TIE_TOL:
                        rep.fail(b.seed, k, "enumeration_below_search", shortfall,
                                 batch=b.name, scheme=scheme)
            rep.extra[f"{b.name}:{scheme}"] = info
            if progress:
                progress(f"{b.name}:{scheme}")
        a, c = (best[s] for s in b.schemes)
        if a is None or c is None:
            rep.fail(b.seed, k, "suprema_equal", 1.0, batch=b.name,
                     infeasible=[s for s in b.schemes if best[s] is None])
        else:
            gap = abs(a - c)
            rep.note("suprema_equal", gap)
            rep.extra[f"{b.name}:gap"] = gap
            if gap > OPTIMUM_TOL:
                rep.fail(b.seed, k, "suprema_equal", gap, batch=b.name)
        rep.instances += 1
    return rep
