import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


def relative_error(lhs, rhs, floor=1e-12):
    """|lhs - rhs| / max(|lhs|, |rhs|), absolute below the floor."""
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    diff = np.abs(lhs - rhs)
    return np.where(scale >= floor, diff / np.maximum(scale, floor), diff)
