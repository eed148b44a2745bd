from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cfrelay.pmf import JointPmf  # noqa: E402


def random_joint(seed: int, max_vars: int = 5, max_card: int = 3) -> JointPmf:
    """Generic joint over 2..max_vars variables with cardinalities 1..max_card, some zero cells."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, max_vars + 1))
    cards = [int(c) for c in rng.integers(1, max_card + 1, size=k)]
    p = rng.uniform(size=cards)
    p[rng.uniform(size=cards) < 0.15] = 0.0
    if p.sum() == 0:
        p.flat[0] = 1.0
    p /= p.sum()
    return JointPmf([f"V{i}" for i in range(k)], cards, p)


def joint_as_dict(j: JointPmf) -> tuple[list[str], dict[tuple, float]]:
    return list(j.names), {idx: float(j.probs[idx]) for idx in np.ndindex(j.probs.shape)}


@pytest.fixture
def bsc():
    def make(e: float) -> np.ndarray:
        return np.array([[1 - e, e], [e, 1 - e]])
    return make


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
