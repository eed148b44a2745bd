from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfrelay import subsets as ss
from cfrelay.pmf import SpecError
from cfrelay.specio import dump_spec, example_path, load_example, load_spec, spec_from_dict, spec_to_dict
from cfrelay.verify import InstanceGenerator

EXAMPLES = ["digital_n2", "digital_n1_erasure", "full_n2_fine", "full_n2_constant", "full_n2_binary"]


def test_index_round_trip():
    assert ss.from_indices([1, 3]) == 0b101
    assert ss.to_indices(0b101) == [1, 3]
    assert ss.fmt(0) == "{}"
    assert ss.parse("[1, 3]", 3) == 0b101 and ss.parse("", 3) == 0
    with pytest.raises(ValueError):
        ss.from_indices([4], 3)
    with pytest.raises(ValueError):
        ss.check_mask(0b1000, 3)


def test_lexicographic_order():
    masks = sorted([0b010, 0b011, 0b001, 0b100], key=ss.lex_key)
    assert [ss.to_indices(m) for m in masks] == [[1], [1, 2], [2], [3]]


@given(st.integers(0, 63))
def test_iter_subsets_is_complete(mask):
    subs = list(ss.iter_subsets(mask))
    want = [s for s in range(mask + 1) if s & ~mask == 0]
    assert subs == want
    assert len(subs) == 2 ** ss.size(mask)


@pytest.mark.parametrize("name", EXAMPLES)
def test_examples_load_and_validate(name):
    spec = load_example(name)
    assert spec.validate() is not None


@pytest.mark.parametrize("mode", ["digital", "full"])
def test_dict_round_trip(mode, tmp_path):
    spec = InstanceGenerator.make(mode, 2, {"yhat": 3}, seed=1).spec(0)
    path = tmp_path / "s.json"
    dump_spec(spec, path)
    back = load_spec(path)
    assert spec_to_dict(back) == spec_to_dict(spec)
    assert np.array_equal(back.channel, spec.channel)


def test_size_mismatch_is_reported():
    d = json.loads(example_path("digital_n2").read_text())
    d["channel"] = d["channel"][:-1]
    with pytest.raises(SpecError) as e:
        spec_from_dict(d)
    assert "channel" in str(e.value)


def test_mode_field_consistency():
    d = json.loads(example_path("digital_n2").read_text())
    d["alphabet_xi"] = [2, 2]
    with pytest.raises(SpecError):
        spec_from_dict(d)
    d = json.loads(example_path("full_n2_fine").read_text())
    del d["alphabet_xi"]
    with pytest.raises(SpecError):
        spec_from_dict(d)


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(OSError):
        load_spec(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(json.JSONDecodeError):
        load_spec(bad)
