"""Shared fixtures.

Scene fixtures shell out to the segmentation pipeline's CLI: that is the
only sanctioned way to reach it, and it doubles as a standing check that the
file formats on both sides keep agreeing.
"""

import shutil
import subprocess

import pytest

from trainkit import backbone


def run(*argv, **kw):
    return subprocess.run(list(argv), capture_output=True, text=True, **kw)


@pytest.fixture(scope="session")
def freespace_cli() -> str:
    path = shutil.which("freespace")
    if path is None:
        pytest.fail("the freespace CLI must be installed for cross-package tests")
    return path


@pytest.fixture(scope="session")
def trainkit_cli() -> str:
    path = shutil.which("trainkit")
    if path is None:
        pytest.fail("trainkit console script not installed")
    return path


@pytest.fixture(scope="session")
def backbone_ckpt(tmp_path_factory):
    path = tmp_path_factory.mktemp("backbone") / "backbone.pt"
    backbone.save_backbone(backbone.init_backbone(seed=0, depth=2), path)
    return path


@pytest.fixture(scope="session")
def scenes3(tmp_path_factory, freespace_cli):
    """Three synthetic scenes: rgb/, depth/, truth/ subdirectories."""
    out = tmp_path_factory.mktemp("scenes3") / "scenes"
    r = run(freespace_cli, "synth", "--out", str(out), "--count", "3", "--seed", "7")
    assert r.returncode == 0, r.stderr
    return out


@pytest.fixture(scope="session")
def pairs8(tmp_path_factory, freespace_cli):
    """Eight (image, mask) training pairs; masks come from the pipeline."""
    base = tmp_path_factory.mktemp("pairs8")
    scenes = base / "scenes"
    masks = base / "masks"
    r = run(freespace_cli, "synth", "--out", str(scenes), "--count", "8", "--seed", "11")
    assert r.returncode == 0, r.stderr
    r = run(
        freespace_cli, "maskgen",
        "--rgb", str(scenes / "rgb"), "--depth", str(scenes / "depth"),
        "--out", str(masks), "--seed", "11", "--jobs", "1",
    )
    assert r.returncode == 0, r.stderr
    return {"rgb": scenes / "rgb", "masks": masks, "truth": scenes / "truth"}
