"""Channel specifications, joint distributions and information measures (bits)."""
from __future__ import annotations

import enum
import itertools
import math
import threading
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from . import subsets as ss

NORM_TOL = 1e-12
NEG_TOL = 1e-15
CMI_CLAMP = 1e-12


class Mode(str, enum.Enum):
    FULL = "full"
    DIGITAL = "digital"


class SpecError(ValueError):
    """Raised when a channel spec violates dimension or normalization rules.

    ``problems`` holds one human-readable line per violation.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) if self.problems else "invalid spec")


class InformationError(ArithmeticError):
    """A conditional mutual information came out clearly negative."""


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """A full or digital-link multiple-relay channel with fixed input and compression laws.

    Array layouts (conditioned variables first):

    * ``channel``: Full ``(x, x_1..x_n, y, y_1..y_n)``, Digital ``(x, y, y_1..y_n)``
    * ``compressions[i]``: Full ``(x_i, y_i, yhat_i)``, Digital ``(y_i, yhat_i)``
    """

    mode: Mode
    n: int
    alphabet_x: int
    alphabet_y: int
    alphabet_yi: tuple[int, ...]
    alphabet_yhat_i: tuple[int, ...]
    channel: np.ndarray
    p_x: np.ndarray
    compressions: tuple[np.ndarray, ...]
    alphabet_xi: tuple[int, ...] | None = None
    p_xi: tuple[np.ndarray, ...] | None = None
    link_capacities: tuple[float, ...] | None = None

    @property
    def is_full(self) -> bool:
        return self.mode is Mode.FULL

    def channel_shape(self) -> tuple[int, ...]:
        if self.is_full:
            return (self.alphabet_x, *self.alphabet_xi, self.alphabet_y, *self.alphabet_yi)
        return (self.alphabet_x, self.alphabet_y, *self.alphabet_yi)

    def compression_shape(self, i: int) -> tuple[int, ...]:
        """Shape of relay ``i``'s (0-based) compression law."""
        if self.is_full:
            return (self.alphabet_xi[i], self.alphabet_yi[i], self.alphabet_yhat_i[i])
        return (self.alphabet_yi[i], self.alphabet_yhat_i[i])

    def with_compressions(self, compressions) -> ChannelSpec:
        comps = tuple(np.asarray(q, dtype=float) for q in compressions)
        return replace(self, compressions=comps,
                       alphabet_yhat_i=tuple(int(q.shape[-1]) for q in comps))

    def with_inputs(self, p_x=None, p_xi=None) -> ChannelSpec:
        kw = {}
        if p_x is not None:
            kw["p_x"] = np.asarray(p_x, dtype=float)
        if p_xi is not None:
            kw["p_xi"] = tuple(np.asarray(p, dtype=float) for p in p_xi)
        return replace(self, **kw)

    def validate(self) -> ChannelSpec:
        """Return a copy with tiny negatives clamped, or raise :class:`SpecError`."""
        problems = spec_problems(self)
        if problems:
            raise SpecError(problems)
        clamp = lambda a: np.where(a < 0, 0.0, a)  # noqa: E731
        kw = dict(
            channel=clamp(self.channel),
            p_x=clamp(self.p_x),
            compressions=tuple(clamp(q) for q in self.compressions),
        )
        if self.p_xi is not None:
            kw["p_xi"] = tuple(clamp(p) for p in self.p_xi)
        return replace(self, **kw)


def _check_conditional(name, arr, n_cond, cond_names, problems):
    if np.any(~np.isfinite(arr)):
        problems.append(f"{name}: non-finite entries")
        return
    bad = np.argwhere(arr < -NEG_TOL)
    for idx in bad[:5]:
        problems.append(f"{name}: negative entry {arr[tuple(idx)]:.3g} at {tuple(int(v) for v in idx)}")
    sums = arr.reshape(arr.shape[:n_cond] + (-1,)).sum(axis=-1)
    for idx in itertools.product(*(range(s) for s in sums.shape)):
        s = float(sums[idx])
        if abs(s - 1.0) > NORM_TOL:
            where = ", ".join(f"{c}={v}" for c, v in zip(cond_names, idx))
            row = f" row ({where})" if where else ""
            problems.append(f"{name}{row} sums to {s:.15g}, expected 1")


def spec_problems(spec: ChannelSpec) -> list[str]:
    """List every dimension/normalization violation; empty means valid."""
    p: list[str] = []
    n = spec.n
    if not isinstance(n, (int, np.integer)) or n < 1 or n > 8:
        return [f"n={n!r} outside supported range 1..8"]
    if spec.alphabet_x < 1 or spec.alphabet_y < 1:
        p.append("alphabet_x and alphabet_y must be >= 1")
    for label, seq in (("alphabet_yi", spec.alphabet_yi), ("alphabet_yhat_i", spec.alphabet_yhat_i)):
        if seq is None or len(seq) != n:
            p.append(f"{label} must list {n} cardinalities")
        elif any(a < 1 for a in seq):
            p.append(f"{label} entries must be >= 1")
    if spec.is_full:
        if spec.alphabet_xi is None or len(spec.alphabet_xi) != n:
            p.append(f"alphabet_xi must list {n} cardinalities in full mode")
        elif any(a < 1 for a in spec.alphabet_xi):
            p.append("alphabet_xi entries must be >= 1")
        if spec.p_xi is None or len(spec.p_xi) != n:
            p.append(f"p_xi must list {n} distributions in full mode")
        if spec.link_capacities is not None:
            p.append("link_capacities are not allowed in full mode")
    else:
        if spec.alphabet_xi is not None or spec.p_xi is not None:
            p.append("digital mode has no relay inputs (alphabet_xi/p_xi must be absent)")
        if spec.link_capacities is None or len(spec.link_capacities) != n:
            p.append(f"digital mode requires {n} link_capacities")
        elif any((not math.isfinite(r)) or r < 0 for r in spec.link_capacities):
            p.append("link_capacities must be finite and >= 0")
    if spec.compressions is None or len(spec.compressions) != n:
        p.append(f"compressions must list {n} conditional laws")
    if p:
        return p

    if spec.channel.shape != spec.channel_shape():
        p.append(f"channel has shape {spec.channel.shape}, expected {spec.channel_shape()}")
    else:
        if spec.is_full:
            cond = ["x"] + [f"x_{i + 1}" for i in range(n)]
        else:
            cond = ["x"]
        _check_conditional("channel", spec.channel, len(cond), cond, p)
    if spec.p_x.shape != (spec.alphabet_x,):
        p.append(f"p_x has length {spec.p_x.size}, expected {spec.alphabet_x}")
    else:
        _check_conditional("p_x", spec.p_x, 0, [], p)
    if spec.is_full:
        for i, q in enumerate(spec.p_xi):
            if q.shape != (spec.alphabet_xi[i],):
                p.append(f"p_xi[{i + 1}] has length {q.size}, expected {spec.alphabet_xi[i]}")
            else:
                _check_conditional(f"p_xi[{i + 1}]", q, 0, [], p)
    for i, q in enumerate(spec.compressions):
        want = spec.compression_shape(i)
        if q.shape != want:
            p.append(f"compressions[{i + 1}] has shape {q.shape}, expected {want}")
            continue
        cond = [f"x_{i + 1}", f"y_{i + 1}"] if spec.is_full else [f"y_{i + 1}"]
        _check_conditional(f"compressions[{i + 1}]", q, len(cond), cond, p)
    return p


# --------------------------------------------------------------------------- variables


@dataclass(frozen=True)
class VarSet:
    """Selects X, Y and the relay groups X_S, Y_S, Yhat_S (S as bitmasks)."""

    x: bool = False
    y: bool = False
    xs: int = 0
    ys: int = 0
    yhats: int = 0

    def __or__(self, other: VarSet) -> VarSet:
        return VarSet(self.x or other.x, self.y or other.y,
                      self.xs | other.xs, self.ys | other.ys, self.yhats | other.yhats)

    def overlaps(self, other: VarSet) -> bool:
        return bool((self.x and other.x) or (self.y and other.y)
                    or self.xs & other.xs or self.ys & other.ys or self.yhats & other.yhats)

    def is_empty(self) -> bool:
        return not (self.x or self.y or self.xs or self.ys or self.yhats)

    def names(self) -> list[str]:
        out = []
        if self.x:
            out.append("X")
        out += [f"X{i}" for i in ss.to_indices(self.xs)]
        if self.y:
            out.append("Y")
        out += [f"Y{i}" for i in ss.to_indices(self.ys)]
        out += [f"Yhat{i}" for i in ss.to_indices(self.yhats)]
        return out


EMPTY = VarSet()
X = VarSet(x=True)
Y = VarSet(y=True)


def XS(mask: int) -> VarSet:
    return VarSet(xs=mask)


def YS(mask: int) -> VarSet:
    return VarSet(ys=mask)


def YH(mask: int) -> VarSet:
    return VarSet(yhats=mask)


def variable_names(mode: Mode, n: int) -> list[str]:
    names = ["X"]
    if mode is Mode.FULL:
        names += [f"X{i}" for i in range(1, n + 1)]
    names += ["Y"] + [f"Y{i}" for i in range(1, n + 1)] + [f"Yhat{i}" for i in range(1, n + 1)]
    return names


# --------------------------------------------------------------------------- joint pmf


class JointPmf:
    """Dense joint law over named discrete variables, immutable after construction.

    ``probs`` is shaped by the cardinalities in declared order, so ``probs.ravel()``
    is the row-major flat vector.
    """

    def __init__(self, names, cards, probs, *, n: int | None = None, mode: Mode | None = None,
                 tol: float = NORM_TOL):
        self.names = tuple(names)
        self.cards = tuple(int(c) for c in cards)
        arr = np.array(probs, dtype=float).reshape(self.cards)
        if np.any(arr < -NEG_TOL):
            raise ValueError("joint pmf has negative entries")
        arr = np.where(arr < 0, 0.0, arr)
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(f"joint pmf sums to {total!r}")
        arr.setflags(write=False)
        self.probs = arr
        self.n = n
        self.mode = mode
        self._index = {nm: k for k, nm in enumerate(self.names)}
        self._h_cache: dict[tuple[int, ...], float] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        vs = ", ".join(f"{n}:{c}" for n, c in zip(self.names, self.cards))
        return f"JointPmf({vs})"

    @property
    def flat(self) -> np.ndarray:
        return self.probs.ravel()

    def axes(self, vs: VarSet | list[str]) -> tuple[int, ...]:
        names = vs.names() if isinstance(vs, VarSet) else list(vs)
        try:
            return tuple(sorted(self._index[nm] for nm in names))
        except KeyError as e:
            raise ValueError(f"variable {e.args[0]} is not part of this joint") from None

    def entropy_of_axes(self, axes: tuple[int, ...]) -> float:
        key = tuple(sorted(set(axes)))
        h = self._h_cache.get(key)
        if h is not None:
            return h
        if not key:
            h = 0.0
        else:
            drop = tuple(k for k in range(len(self.cards)) if k not in key)
            m = self.probs.sum(axis=drop) if drop else self.probs
            p = m[m > 0]
            h = float(-(p * np.log2(p)).sum())
        with self._lock:
            self._h_cache[key] = h
        return h


def build_joint(spec: ChannelSpec) -> JointPmf:
    """Joint law p(x) prod p(x_i) p(y, y_N | x, x_N) prod p(yhat_i | x_i, y_i).

    Axis order is (X, X_1..X_n, Y, Y_1..Y_n, Yhat_1..Yhat_n); digital mode drops X_1..X_n.
    """
    spec = spec.validate()
    n = spec.n
    t = np.array(spec.channel, dtype=float)
    if spec.is_full:
        t = t * spec.p_x.reshape((-1,) + (1,) * (t.ndim - 1))
        for i in range(n):
            shape = [1] * t.ndim
            shape[1 + i] = -1
            t = t * spec.p_xi[i].reshape(shape)
        base = t.ndim
        for i in range(n):
            q = spec.compressions[i]
            shape = [1] * (base + i) + [q.shape[2]]
            shape[1 + i] = q.shape[0]
            shape[1 + n + 1 + i] = q.shape[1]
            t = t[..., None] * q.reshape(shape)
    else:
        t = t * spec.p_x.reshape((-1,) + (1,) * (t.ndim - 1))
        base = t.ndim
        for i in range(n):
            q = spec.compressions[i]
            shape = [1] * (base + i) + [q.shape[1]]
            shape[2 + i] = q.shape[0]
            t = t[..., None] * q.reshape(shape)
    names = variable_names(spec.mode, n)
    # each validated factor may be off by NORM_TOL
    return JointPmf(names, t.shape, t, n=n, mode=spec.mode, tol=NORM_TOL * (2 * n + 3))


def marginalize(j: JointPmf, keep: VarSet | list[str]) -> JointPmf:
    """Sum out every variable not in ``keep``; kept variables retain their order."""
    axes = j.axes(keep)
    drop = tuple(k for k in range(len(j.cards)) if k not in axes)
    m = j.probs.sum(axis=drop) if drop else j.probs
    return JointPmf([j.names[k] for k in axes], [j.cards[k] for k in axes], m,
                    n=j.n, mode=j.mode, tol=max(NORM_TOL, abs(float(j.probs.sum()) - 1.0) * 2))


def _names(v) -> list[str]:
    return v.names() if isinstance(v, VarSet) else [str(x) for x in v]


def _overlap(*groups: list[str]) -> bool:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            return True
        seen |= set(g)
    return False


def cond_entropy(j: JointPmf, a: VarSet | Sequence[str], c: VarSet | Sequence[str] = EMPTY) -> float:
    """H(A | C) in bits. Arguments are VarSets or lists of variable names."""
    a, c = _names(a), _names(c)
    if _overlap(a, c):
        raise ValueError("cond_entropy: A and C overlap")
    return max(j.entropy_of_axes(j.axes(a + c)) - j.entropy_of_axes(j.axes(c)), 0.0)


def cond_mutual_info(j: JointPmf, a: VarSet | Sequence[str], b: VarSet | Sequence[str],
                     c: VarSet | Sequence[str] = EMPTY) -> float:
    """I(A; B | C) in bits; 0 when A or B is empty."""
    a, b, c = _names(a), _names(b), _names(c)
    if _overlap(a, b, c):
        raise ValueError("cond_mutual_info: argument sets must be pairwise disjoint")
    if not a or not b:
        return 0.0
    ax_a, ax_b, ax_c = j.axes(a), j.axes(b), j.axes(c)
    h = j.entropy_of_axes
    v = h(ax_a + ax_c) + h(ax_b + ax_c) - h(ax_a + ax_b + ax_c) - h(ax_c)
    if v < 0:
        if v < -CMI_CLAMP:
            raise InformationError(f"I(A;B|C) = {v!r} < 0 for A={a}, B={b}, C={c}")
        v = 0.0
    return v


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def h2(p: float) -> float:
    """Binary entropy in bits."""
    return entropy_bits([p, 1.0 - p])
