from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from bfosd import model, osd
from bfosd.gf2 import BitMatrix, BitVector

# first calls pay numba compilation, so wall-clock deadlines are meaningless
settings.register_profile("default", deadline=None)
settings.load_profile("default")

BB72_A = [(3, 0), (0, 1), (0, 2)]
BB72_B = [(0, 3), (1, 0), (2, 0)]

HAMMING = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)

# acceptance outcomes, printed as a block at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bb72():
    return model.build_bicycle(6, 6, BB72_A, BB72_B, d=6)


@pytest.fixture(scope="session")
def bb72_phenom(bb72):
    return model.build_phenomenological(bb72, 3e-3, 3e-3, 6)


@pytest.fixture(scope="session")
def steane():
    h = BitMatrix.from_dense(HAMMING)
    return model.validate_css(h, h, d=3)


def random_model(rng, rows, cols, p_low=0.01, p_high=0.3, n_obs=2):
    """Random decoding model with dense random checks and logical rows."""
    h = BitMatrix.from_dense(rng.integers(0, 2, (rows, cols), dtype=np.uint8))
    lmat = BitMatrix.from_dense(rng.integers(0, 2, (n_obs, cols), dtype=np.uint8))
    return model.DecodingModel(h, rng.uniform(p_low, p_high, cols), lmat)


# Golden best-first traversal: three generators with relative costs 3, 6, 9,
# pair costs {1,2}=4, {1,3}=7, {2,3}=10 and triple cost 8 (1-based labels).
GOLDEN_POPS = [
    ((), 0.0),
    ((1,), 3.0),
    ((1, 2), 4.0),
    ((2,), 6.0),
    ((1, 3), 7.0),
    ((1, 2, 3), 8.0),
    ((3,), 9.0),
]
GOLDEN_LLRS = [1.25, 1.25, 1.25, 1.25, 1.125, 1.125, 1.0, 1.0, 1.5, 2.25, 5.25]
GOLDEN_FREE = {8: [0, 1, 2, 4, 5], 9: [0, 1, 3, 6, 7], 10: [0, 2, 3]}


def golden_base() -> osd.BaseSolution:
    """A decoding instance whose coset costs, relative to the base, realize ``GOLDEN_POPS``.

    ``H = [I_8 | P]``: pivot bits 0-3 are shared between generators, bits
    4-6 carry the base solution and bit 7 inflates the second generator's
    weight so the weight ranking keeps the intended order. All values are
    dyadic, so every cost is exact.
    """
    h = np.zeros((8, 11), dtype=np.uint8)
    h[:, :8] = np.eye(8, dtype=np.uint8)
    for col, rows in GOLDEN_FREE.items():
        h[rows, col] = 1
    H = BitMatrix.from_dense(h)
    m = model.DecodingModel(H, np.full(11, 0.1), BitMatrix.zeros(0, 11))
    return osd.osd0(m, BitVector.from_indices(8, [4, 5, 6]), GOLDEN_LLRS)
