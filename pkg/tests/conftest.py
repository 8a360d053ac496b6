from pathlib import Path

import pytest

from mlqarank.pipeline import ResourcePaths, build_dataset

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_paths(root: Path, output_dir: Path | None = None) -> ResourcePaths:
    return ResourcePaths(
        questions=root / "questions.tsv",
        corpus=root / "corpus.tsv",
        judgments=root / "judgments.tsv",
        tables_dir=root / "tables",
        output_dir=output_dir,
    )


@pytest.fixture(scope="session")
def features_fixture_dir() -> Path:
    return FIXTURES / "features"


@pytest.fixture(scope="session")
def selection_fixture_dir() -> Path:
    return FIXTURES / "selection"


@pytest.fixture(scope="session")
def features_dataset(features_fixture_dir):
    return build_dataset(fixture_paths(features_fixture_dir), "both")


@pytest.fixture(scope="session")
def selection_dataset(selection_fixture_dir):
    return build_dataset(fixture_paths(selection_fixture_dir), "both")
