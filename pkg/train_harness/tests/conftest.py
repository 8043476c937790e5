import shutil
import subprocess
import sys

import pytest


def run_otdrimg(*args) -> subprocess.CompletedProcess:
    exe = shutil.which("otdrimg")
    cmd = [exe] if exe else [sys.executable, "-m", "otdrimg.cli"]
    return subprocess.run(
        [*cmd, *[str(a) for a in args]], capture_output=True, text=True
    )


def make_dataset(out_dir, n_per_class, seed, *extra):
    proc = run_otdrimg(
        "demo", "--n-per-class", n_per_class, "--seed", seed,
        "--out", out_dir, "--workers", 1, *extra,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir / "manifest.csv"


@pytest.fixture(scope="session")
def demo60_manifest(tmp_path_factory):
    """60-image holdout dataset (train 42 / val 6 / test 12)."""
    return make_dataset(tmp_path_factory.mktemp("demo60"), 10, 0)


@pytest.fixture(scope="session")
def demo300_manifest(tmp_path_factory):
    """300-image class-balanced holdout dataset for the desk-scale criterion."""
    return make_dataset(tmp_path_factory.mktemp("demo300"), 50, 1)


@pytest.fixture(scope="session")
def cv_manifest(tmp_path_factory):
    """30-image dataset carrying a 5-fold assignment."""
    return make_dataset(
        tmp_path_factory.mktemp("democv"), 5, 2, "--split", "kfold", "--folds", 5
    )
