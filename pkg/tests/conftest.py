import numpy as np
import pytest

from foveal_search.raster import GrayImage, synthesize_one_over_f

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def blocky_quadrant_stimulus(seed=0, size=512, amplitude=0.15):
    """1/f noise with per-8x8-block DC offsets in the bottom-right quadrant.

    The offsets mimic coarse DC quantization in block transform coding.
    """
    px = synthesize_one_over_f(size, size, seed).pixels.copy()
    half = size // 2
    rng = np.random.default_rng(seed + 1)
    offsets = rng.uniform(-amplitude, amplitude, (half // 8, half // 8))
    px[half:, half:] += np.kron(offsets, np.ones((8, 8)))
    return GrayImage(np.clip(px, 0.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def noise_image():
    return synthesize_one_over_f(128, 96, seed=5)
