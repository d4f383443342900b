import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from eplab import generators
from eplab.linalg import DEFAULT_TOLERANCE
from eplab.schemas import EnsembleConfig

hypothesis_settings.register_profile("eplab", deadline=None, max_examples=40)
hypothesis_settings.load_profile("eplab")


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCE


@pytest.fixture
def paper_2x2():
    return generators.paper_2x2()


@pytest.fixture
def e1_e2():
    """e1 ⊗ e2, the nilpotent partial isometry [[0, 1], [0, 0]]."""
    return generators.rank_one([1, 0], [0, 1])


@pytest.fixture
def paper_shift():
    return generators.paper_shift_example(2.0, 9)


@pytest.fixture
def small_ensemble():
    return EnsembleConfig(master_seed=7, dims=[2, 3, 4], trials_per_family=3, min_trials_per_claim=0, n_max=3)


@pytest.fixture
def ginibre():
    def draw(rows: int, cols: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))

    return draw
