import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import paper_fixture  # noqa: E402


@pytest.fixture(scope="session")
def paper_pdf():
    pdf, truth = paper_fixture()
    return pdf, truth


@pytest.fixture(scope="session")
def paper_doc(paper_pdf):
    from layerlab.pipeline import run_core_pipeline

    pdf, truth = paper_pdf
    return run_core_pipeline(pdf, source_filename="fixture.pdf"), truth
