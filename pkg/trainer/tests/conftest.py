"""Shared fixtures: a small synthesized pair dataset.

The dataset is produced through the engine's command line (the format
contract both packages meet); building it once per session keeps the
trainer tests fast.  Pairs are cut at reduced resolution 32x64 with
xi = 4 from two random constricted geometries: 58 pairs in total.
"""

from __future__ import annotations

import importlib.util
import shutil

import pytest

# The training package is an optional add-on: a checkout where it (or
# torch) is not installed must still run the engine's suite green, so
# collection of these modules is skipped in that case.
if (importlib.util.find_spec("stenotrain") is None
        or importlib.util.find_spec("torch") is None):
    collect_ignore_glob = ["test_*.py"]


@pytest.fixture(scope="session")
def pair_root(tmp_path_factory):
    engine = pytest.importorskip("stenoflow.cli")
    root = tmp_path_factory.mktemp("data")
    geoms = root / "geoms"
    pairs = root / "pairs"
    assert engine.main(["generate", "--count", "2", "--seed", "11",
                        "--height", "32", "--out", str(geoms)]) == 0
    assert engine.main(["synthesize", "--geometries", str(geoms),
                        "--out", str(pairs), "--height", "32",
                        "--width", "64", "--xi", "4", "--seed", "3"]) == 0
    return pairs


@pytest.fixture(scope="session")
def single_pair(pair_root):
    return pair_root / "geom_0000" / "pair_003"


@pytest.fixture()
def pair_copy(single_pair, tmp_path):
    """A private, modifiable copy of one pair directory."""
    dst = tmp_path / "pair_000"
    shutil.copytree(single_pair, dst)
    return dst
