import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phfusion.config import PipelineConfig  # noqa: E402
from phfusion.pipeline import ingest_dataset, train_pipeline  # noqa: E402
from phfusion.synthetic import SyntheticSpec, write_dataset  # noqa: E402

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

# the desk-scale synthetic experiment: 4 classes x 50 images, 30/20 split
DESK_CONFIG = PipelineConfig(levels=2, words=50, kernel="linear", seed=0, train_per_class=30)


def desk_split(root):
    return ingest_dataset(root, DESK_CONFIG.train_per_class, DESK_CONFIG.seed)


@pytest.fixture(scope="session")
def synthetic_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    write_dataset(root, SyntheticSpec(), seed=0)
    return root


@pytest.fixture(scope="session")
def desk_bundle(synthetic_root):
    return train_pipeline(desk_split(synthetic_root), DESK_CONFIG)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    if 10 not in ACCEPTANCE:
        terminalreporter.write_line("criterion 10: SKIP  optional; set PHFUSION_CALTECH_DIR "
                                    "to a Caltech-101 root to run it")
