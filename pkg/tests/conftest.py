"""Shared fixtures for CLI-level tests."""

from pathlib import Path

import pytest

from brepforge.cli import main as cli_main


@pytest.fixture(scope="session")
def small_batch_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("batch50")
    rc = cli_main(["gen", "--count", "50", "--seed", "0", "--out", str(out)])
    assert rc == 0
    return out
