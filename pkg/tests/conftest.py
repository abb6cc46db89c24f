import sys
from pathlib import Path

import pytest

from taxoeval.embedding import EmbeddingSimilarity, HashEncoder

sys.path.insert(0, str(Path(__file__).parent))  # oracles / treegen helpers

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def hash_similarity() -> EmbeddingSimilarity:
    """One shared test-encoder similarity; caches persist across tests."""
    return EmbeddingSimilarity(HashEncoder())


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
