import numpy as np
import pytest

import tfhomog as tf

PAPER_FIELD_IDS = ("smooth-low", "smooth-high", "piecewise-low", "piecewise-high")


@pytest.fixture(scope="session")
def cell_solutions_64():
    """Cell solutions for the four benchmark fields at the default cell mesh."""
    return {fid: tf.solve_cell(tf.parse_field(fid), 64) for fid in PAPER_FIELD_IDS}


@pytest.fixture(scope="session")
def small_homog_run():
    """Cheap homogenized run reused by corrector/analysis tests."""
    a = tf.smooth_poly()
    return tf.run_homogenized(np.eye(2), alpha=0.9, grid_n=16, dt=0.05, T=0.5, a=a)
