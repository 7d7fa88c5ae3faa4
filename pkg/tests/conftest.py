"""Shared fixtures.

Codebooks for the 4-point constellations build in seconds, but the 16-point
ones spend minutes in the completion solver, so all are session scoped.  Set
the environment variable ``PLNC_CODEBOOK_CACHE`` to a directory to reuse
codebooks across test runs; on a cache miss the codebook is built fresh and
stored there.  Without the variable every session builds from scratch.
"""

import os
from pathlib import Path

import pytest

from plnc import Codebook, build_codebook, build_constellation

_CACHE_ENV = "PLNC_CODEBOOK_CACHE"


def _session_codebook(kind: str, M: int) -> Codebook:
    cache_dir = os.environ.get(_CACHE_ENV)
    name = f"{kind}{M}.json"
    if cache_dir:
        path = Path(cache_dir) / name
        if path.is_file():
            cb = Codebook.load(path)
            if cb.constellation.kind == kind and cb.constellation.M == M:
                return cb
    cb = build_codebook(build_constellation(kind, M))
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        cb.save(Path(cache_dir) / name)
    return cb


@pytest.fixture(scope="session")
def codebook_pam4() -> Codebook:
    return _session_codebook("pam", 4)


@pytest.fixture(scope="session")
def codebook_qam4() -> Codebook:
    return _session_codebook("qam", 4)


@pytest.fixture(scope="session")
def codebook_qam16() -> Codebook:
    return _session_codebook("qam", 16)


@pytest.fixture(scope="session")
def codebook_psk16() -> Codebook:
    return _session_codebook("psk", 16)


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"
