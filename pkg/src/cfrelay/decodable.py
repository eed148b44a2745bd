"""Largest feasible relay subsets (D, D_J, D'_J) by exhaustive search and by peeling."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import subsets as ss
from .setfuncs import EvalContext, eval_I, eval_J, eval_K

# "> 0" means value > DELTA, ">= 0" means value > -DELTA
DELTA = 1e-9


class FeasibilityKind(enum.Enum):
    I_NONSTRICT = "I"
    J_NONSTRICT = "J"
    K_STRICT = "K>"
    K_NONSTRICT = "K>="

    @property
    def strict(self) -> bool:
        return self is FeasibilityKind.K_STRICT


class DecodabilityError(RuntimeError):
    """The union of feasible subsets failed re-verification."""


_FAMILY = {
    FeasibilityKind.I_NONSTRICT: eval_I,
    FeasibilityKind.J_NONSTRICT: eval_J,
    FeasibilityKind.K_STRICT: eval_K,
    FeasibilityKind.K_NONSTRICT: eval_K,
}


def family_value(ctx: EvalContext, kind: FeasibilityKind, a: int, b: int, s: int) -> float:
    return _FAMILY[kind](ctx, a, b, s)


def passes(kind: FeasibilityKind, value: float, delta: float = DELTA) -> bool:
    return value > delta if kind.strict else value > -delta


def violators(ctx: EvalContext, kind: FeasibilityKind, a: int, b: int,
              delta: float = DELTA) -> list[int]:
    """Subsets S of ``b`` (nonempty for strict kinds) failing the kind's test, lexicographic order."""
    bad = []
    for s in ss.iter_subsets(b):
        if s == 0:
            continue  # every family is exactly 0 on the empty set
        if not passes(kind, family_value(ctx, kind, a, b, s), delta):
            bad.append(s)
    bad.sort(key=ss.lex_key)
    return bad


def is_feasible(ctx: EvalContext, kind: FeasibilityKind, b: int, a: int = 0,
                delta: float = DELTA) -> bool:
    for s in ss.iter_subsets(b):
        if s and not passes(kind, family_value(ctx, kind, a, b, s), delta):
            return False
    return True


def feasible_sets(ctx: EvalContext, kind: FeasibilityKind, delta: float = DELTA) -> list[int]:
    return [f for f in ss.iter_all(ctx.n) if is_feasible(ctx, kind, f, delta=delta)]


def largest_feasible_set(ctx: EvalContext, kind: FeasibilityKind, delta: float = DELTA) -> int:
    """Union of all feasible subsets, re-verified feasible."""
    union = 0
    for f in feasible_sets(ctx, kind, delta):
        union |= f
    if not is_feasible(ctx, kind, union, delta=delta):
        raise DecodabilityError(
            f"union {ss.fmt(union)} of {kind.value}-feasible subsets is not itself feasible")
    return union


def peel_supported_subset(ctx: EvalContext, kind: FeasibilityKind, a: int, b: int,
                          delta: float = DELTA) -> int | None:
    """Shrink ``b`` by removing violating subsets until the remainder is feasible given ``a``.

    Returns ``None`` when ``b`` is empty, when ``family_{a,b}(b)`` fails the kind's test,
    or when the loop exhausts ``b``.
    """
    if b == 0 or a & b:
        if a & b:
            raise ValueError("a and b must be disjoint")
        return None
    if not passes(kind, family_value(ctx, kind, a, b, b), delta):
        return None
    cur = b
    while cur:
        bad = violators(ctx, kind, a, cur, delta)
        if not bad:
            return cur
        cur &= ~bad[0]
    return None


class RelayClass(str, enum.Enum):
    JOINTLY_DECODABLE = "jointly_decodable"
    BOUNDARY = "boundary"
    UNDECODABLE = "undecodable"


@dataclass
class DecodabilityReport:
    d_j: int
    d_j_prime: int
    classes: dict[int, RelayClass]
    k_values: dict[tuple[int, int], float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "d_j": ss.to_indices(self.d_j),
            "d_j_prime": ss.to_indices(self.d_j_prime),
            "classes": {str(i): c.value for i, c in sorted(self.classes.items())},
        }


def classify_relays(ctx: EvalContext, delta: float = DELTA) -> DecodabilityReport:
    d_j = largest_feasible_set(ctx, FeasibilityKind.K_STRICT, delta)
    d_jp = largest_feasible_set(ctx, FeasibilityKind.K_NONSTRICT, delta)
    if not ss.is_subset(d_j, d_jp):
        raise DecodabilityError(f"D_J={ss.fmt(d_j)} is not inside D'_J={ss.fmt(d_jp)}")
    classes = {}
    for i in range(1, ctx.n + 1):
        bit = 1 << (i - 1)
        if d_j & bit:
            classes[i] = RelayClass.JOINTLY_DECODABLE
        elif d_jp & bit:
            classes[i] = RelayClass.BOUNDARY
        else:
            classes[i] = RelayClass.UNDECODABLE
    values = {}
    for f in ss.iter_all(ctx.n):
        for s in ss.iter_subsets(f):
            values[(f, s)] = eval_K(ctx, 0, f, s)
    return DecodabilityReport(d_j, d_jp, classes, values)
