import numpy as np
import pytest

from obbfuse.geometry import RotatedBox


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_box(rng, center_span=100.0, size_lo=1.0, size_hi=100.0) -> RotatedBox:
    return RotatedBox(
        cx=rng.uniform(-center_span, center_span),
        cy=rng.uniform(-center_span, center_span),
        w=rng.uniform(size_lo, size_hi),
        h=rng.uniform(size_lo, size_hi),
        angle=rng.uniform(-np.pi, np.pi),
    )


def overlapping_pair(rng, size_lo=1.0, size_hi=100.0):
    """A box and a jittered companion likely (not guaranteed) to overlap it."""
    a = random_box(rng, size_lo=size_lo, size_hi=size_hi)
    b = RotatedBox(
        cx=a.cx + rng.normal(0, a.w / 2),
        cy=a.cy + rng.normal(0, a.h / 2),
        w=rng.uniform(size_lo, size_hi),
        h=rng.uniform(size_lo, size_hi),
        angle=rng.uniform(-np.pi, np.pi),
    )
    return a, b
