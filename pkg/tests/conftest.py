import numpy as np
import pytest

from fracbvp.bvp import ProblemSpec


def one(t):
    return np.ones_like(np.asarray(t, dtype=float))


def demo_spec(f=np.sqrt, **changes) -> ProblemSpec:
    base = dict(alpha=1.5, beta=3.5, p=2.0, gamma=0.5, h=0.5, lam=0.1, mu=0.1, a=one, f=f)
    base.update(changes)
    return ProblemSpec(**base)


@pytest.fixture
def sqrt_spec() -> ProblemSpec:
    return demo_spec()


@pytest.fixture
def square_spec() -> ProblemSpec:
    return demo_spec(f=np.square)
