import numpy as np
import pytest

from qquench import (
    BasisGrid,
    NoiseModel,
    make_state,
    scan,
    uniform_post_selector,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Trigger jit compilation of every kernel once so timed tests measure
    # the algorithm, not the compiler.
    grid = BasisGrid(size=4)
    state = make_state(grid, np.ones(4))
    selector = uniform_post_selector(grid)
    scan(state, selector, (np.pi / 2, -np.pi / 2), NoiseModel(relative_sigma=0.0))
    scan(state, selector, (np.pi / 2, -np.pi / 2),
         NoiseModel(relative_sigma=0.002, seed=1, trials=2))
