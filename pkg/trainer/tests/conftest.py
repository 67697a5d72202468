import subprocess
import sys

import pytest

from sbnd_trainer import load_code


def _cli(*args):
    """Everything the tests consume is produced by the dataset toolkit CLI."""
    subprocess.run([sys.executable, "-m", "sbndkit", *map(str, args)],
                   check=True, capture_output=True)


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("trainer_data")


@pytest.fixture(scope="session")
def code15_file(workdir):
    path = workdir / "bch15.code"
    _cli("code", "--family", "bch", "--m", "4", "--t", "2", "--out", path)
    return str(path)


@pytest.fixture(scope="session")
def code15(code15_file):
    return load_code(code15_file)


@pytest.fixture(scope="session")
def code7_file(workdir):
    path = workdir / "bch7.code"
    _cli("code", "--family", "bch", "--m", "3", "--t", "1", "--out", path)
    return str(path)


@pytest.fixture(scope="session")
def code7(code7_file):
    return load_code(code7_file)


@pytest.fixture(scope="session")
def small_dual_dataset(workdir, code7_file):
    """Small dual-target file on the (7,4) code for fast unit tests."""
    path = workdir / "ds7.bin"
    _cli("build", "--code", code7_file, "--snr-db", "3.0", "--method", "chan",
         "--target", "ml", "--count", 6000, "--seed", "5", "--store-chan",
         "--out", path)
    return str(path)


@pytest.fixture(scope="session")
def dual_dataset_100k(workdir, code15_file):
    """The 1e5-record dual-target (15,7) dataset used by the acceptance runs."""
    path = workdir / "ds15.bin"
    _cli("build", "--code", code15_file, "--snr-db", "3.0", "--method",
         "chan", "--target", "ml", "--count", 100_000, "--seed", "21",
         "--store-chan", "--out", path)
    return str(path)
