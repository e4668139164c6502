import numpy as np
import pytest

from beliefdiagram import samples
from beliefdiagram.oracle import condition_joint, enumerate_joint, joint_over


def posterior_joint_error(transformed, original, evidence):
    """L-inf gap between the transformed diagram's normalized product of
    tables and the oracle posterior joint of the original, over the
    transformed diagram's unobserved variables."""
    observed = {e.node for e in evidence}
    ref = condition_joint(enumerate_joint(original), evidence) if evidence else enumerate_joint(original)
    mine = enumerate_joint(transformed)
    free = [v for v in mine.variables if v not in observed]
    assert free == [v for v in ref.variables if v not in observed]
    return float(np.max(np.abs(joint_over(mine, free) - joint_over(ref, free)))) if free else 0.0


@pytest.fixture
def chain():
    return samples.chain()


@pytest.fixture
def small_forest():
    return samples.small_forest()


@pytest.fixture
def converging_polytree():
    return samples.converging_polytree()
