"""Relay subsets as integer bitmasks.

Relay ``i`` (1-based, as in N = {1, ..., n}) lives in bit ``i - 1``.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator


def full_mask(n: int) -> int:
    return (1 << n) - 1


def from_indices(indices: Iterable[int], n: int | None = None) -> int:
    mask = 0
    for i in indices:
        i = int(i)
        if i < 1 or (n is not None and i > n):
            raise ValueError(f"relay index {i} outside 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def to_indices(mask: int) -> list[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def check_mask(mask: int, n: int) -> int:
    if mask < 0 or mask >> n:
        raise ValueError(f"subset mask {mask:#b} has bits beyond n={n}")
    return mask


def complement(mask: int, n: int) -> int:
    return full_mask(n) & ~mask


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def size(mask: int) -> int:
    return bin(mask).count("1")


def iter_subsets(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in increasing numeric order, including 0 and ``mask``."""
    # Enumerate descending with the standard trick, then reverse.
    subs = []
    s = mask
    while True:
        subs.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    return iter(reversed(subs))


def iter_all(n: int) -> Iterator[int]:
    return iter(range(1 << n))


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key comparing subsets as sorted index lists, e.g. [1] < [1, 2] < [2]."""
    return tuple(to_indices(mask))


def fmt(mask: int) -> str:
    return "{" + ",".join(str(i) for i in to_indices(mask)) + "}"


def parse(text: str, n: int) -> int:
    """Parse ``"1,3"``, ``"[1,3]"``, ``"{1,3}"`` or ``""`` into a mask."""
    t = text.strip().strip("[]{}() ")
    if not t:
        return 0
    return from_indices((int(p) for p in t.replace(" ", ",").split(",") if p), n)
