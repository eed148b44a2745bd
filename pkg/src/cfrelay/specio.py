"""JSON serialization of :class:`ChannelSpec`.

Conditional laws are flat row-major lists with the conditioned variables as the
slowest indices: the channel over ``(x, x_1..x_n | y, y_1..y_n)`` (full mode) or
``(x | y, y_1..y_n)`` (digital), compressions over ``(x_i, y_i | yhat_i)`` or
``(y_i | yhat_i)``.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .pmf import ChannelSpec, Mode, SpecError

_REQUIRED = ("mode", "n", "alphabet_x", "alphabet_y", "alphabet_yi", "alphabet_yhat_i",
             "channel", "p_x", "compressions")


def _array(values, label, problems):
    try:
        return np.asarray(values, dtype=float).ravel()
    except (TypeError, ValueError):
        problems.append(f"{label} must be a list of numbers (nested lists must be rectangular)")
        return None


def _flat(values, shape, label, problems):
    arr = _array(values, label, problems)
    if arr is None:
        return None
    want = int(np.prod(shape)) if shape else 1
    if arr.size != want:
        problems.append(f"{label} has {arr.size} entries, expected {want} for shape {tuple(shape)}")
        return None
    return arr.reshape(shape)


def spec_from_dict(d: dict[str, Any]) -> ChannelSpec:
    """Build a spec from its JSON form; raises :class:`SpecError` on schema or size problems."""
    problems = [f"missing field '{k}'" for k in _REQUIRED if k not in d]
    if problems:
        raise SpecError(problems)
    try:
        mode = Mode(str(d["mode"]).lower())
    except ValueError:
        raise SpecError([f"mode must be 'full' or 'digital', got {d['mode']!r}"]) from None
    n = int(d["n"])
    if n < 1 or n > 8:
        raise SpecError([f"n={n} outside supported range 1..8"])
    ax, ay = int(d["alphabet_x"]), int(d["alphabet_y"])
    ayi = tuple(int(a) for a in d["alphabet_yi"])
    ayh = tuple(int(a) for a in d["alphabet_yhat_i"])
    axi = tuple(int(a) for a in d["alphabet_xi"]) if d.get("alphabet_xi") is not None else None
    if len(ayi) != n or len(ayh) != n or (axi is not None and len(axi) != n):
        raise SpecError([f"per-relay alphabet lists must have length n={n}"])
    if mode is Mode.FULL and axi is None:
        raise SpecError(["full mode requires alphabet_xi"])
    if mode is Mode.DIGITAL and axi is not None:
        raise SpecError(["digital mode has no relay inputs; drop alphabet_xi"])

    if mode is Mode.FULL:
        ch_shape = (ax, *axi, ay, *ayi)
    else:
        ch_shape = (ax, ay, *ayi)
    channel = _flat(d["channel"], ch_shape, "channel", problems)
    p_x = _array(d["p_x"], "p_x", problems)
    comps_raw = d["compressions"]
    if len(comps_raw) != n:
        problems.append(f"compressions must list {n} laws, got {len(comps_raw)}")
        comps_raw = []
    comps = []
    for i, q in enumerate(comps_raw):
        shape = (axi[i], ayi[i], ayh[i]) if mode is Mode.FULL else (ayi[i], ayh[i])
        comps.append(_flat(q, shape, f"compressions[{i + 1}]", problems))
    p_xi = None
    if d.get("p_xi") is not None:
        p_xi = tuple(_array(p, f"p_xi[{i + 1}]", problems) for i, p in enumerate(d["p_xi"]))
    caps = d.get("link_capacities")
    caps = tuple(float(r) for r in caps) if caps is not None else None
    if problems:
        raise SpecError(problems)
    spec = ChannelSpec(mode=mode, n=n, alphabet_x=ax, alphabet_y=ay, alphabet_yi=ayi,
                       alphabet_yhat_i=ayh, channel=channel, p_x=p_x,
                       compressions=tuple(comps), alphabet_xi=axi, p_xi=p_xi,
                       link_capacities=caps)
    return spec


def spec_to_dict(spec: ChannelSpec) -> dict[str, Any]:
    d: dict[str, Any] = {
        "mode": spec.mode.value,
        "n": spec.n,
        "alphabet_x": spec.alphabet_x,
        "alphabet_y": spec.alphabet_y,
    }
    if spec.is_full:
        d["alphabet_xi"] = list(spec.alphabet_xi)
    d["alphabet_yi"] = list(spec.alphabet_yi)
    d["alphabet_yhat_i"] = list(spec.alphabet_yhat_i)
    d["channel"] = [float(v) for v in np.ravel(spec.channel)]
    d["p_x"] = [float(v) for v in spec.p_x]
    if spec.is_full:
        d["p_xi"] = [[float(v) for v in p] for p in spec.p_xi]
    d["compressions"] = [[float(v) for v in np.ravel(q)] for q in spec.compressions]
    if spec.link_capacities is not None:
        d["link_capacities"] = [float(r) for r in spec.link_capacities]
    return d


def load_spec(path: str | Path) -> ChannelSpec:
    """Read a spec file. I/O and JSON syntax errors propagate as ``OSError``/``json.JSONDecodeError``."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if not isinstance(d, dict):
        raise SpecError(["top-level JSON value must be an object"])
    d = {k: v for k, v in d.items() if not k.startswith("_")}
    return spec_from_dict(d)


def dump_spec(spec: ChannelSpec, path: str | Path | None = None) -> str:
    text = json.dumps(spec_to_dict(spec), indent=1)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def example_path(name: str) -> Path:
    """Path of a bundled example spec, e.g. ``example_path("digital_n2")``."""
    fname = name if name.endswith(".json") else name + ".json"
    return Path(str(resources.files("cfrelay") / "data" / fname))


def load_example(name: str) -> ChannelSpec:
    return load_spec(example_path(name))
