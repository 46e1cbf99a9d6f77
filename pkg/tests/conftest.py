import dataclasses

import numpy as np
import pytest

from freespace import synth
from freespace.pipeline import PipelineConfig


@pytest.fixture(scope="session")
def corridor_scene():
    """One rendered corridor scene shared by read-only tests."""
    spec = synth.make_random_scene(7)
    return synth.generate_scene(spec, 8)


@pytest.fixture()
def small_cluster_params():
    return dataclasses.replace(PipelineConfig().cluster)


def random_rgb(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def ramp_depth(h, w, near=1.0, far=4.0):
    """Row-wise linear depth ramp, deepest at the top row."""
    col = np.linspace(far, near, h, dtype=np.float32)
    return np.repeat(col[:, None], w, axis=1)
