"""Shared fixtures.

The sample stenotic geometry is fixed by seed once for the whole suite; the
32-row window keeps rasterization cheap while preserving the physical span
of the standard 128-row evaluation window.
"""

import pytest

from stenoflow import canonical_window, random_geometry, rasterize


@pytest.fixture(scope="session")
def sample_geometry():
    return random_geometry(7)


@pytest.fixture(scope="session")
def sample_window(sample_geometry):
    return canonical_window(sample_geometry, height=32)


@pytest.fixture(scope="session")
def sample_raster(sample_geometry, sample_window):
    """(sdf, mask) of the sample geometry on the 32-row window."""
    return rasterize(sample_geometry, sample_window)
