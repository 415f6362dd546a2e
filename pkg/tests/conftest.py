"""Shared fixtures: small heaps that fill up after a few hundred objects."""

import sys
from pathlib import Path

import pytest
from loguru import logger

# Add the repository root to the path for `src.*` imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import settings
from src.harness import Runtime
from src.heap import Heap, HeapConfig, ObjectRef, SpaceKind, GEN0

KIB = 1024


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    logger.remove()
    logger.add(sys.stderr, level="WARNING")
    yield


@pytest.fixture
def small_config() -> HeapConfig:
    """64 regions of 4 KiB; Gen 0 holds at most 8 Eden regions."""
    return HeapConfig(
        heap_bytes=256 * KIB,
        region_bytes=4 * KIB,
        gen0_max_bytes=32 * KIB,
        tlab_bytes=512,
        survivor_regions=2,
        promotion_age=2,
    )


@pytest.fixture
def heap(small_config) -> Heap:
    return Heap(small_config)


@pytest.fixture
def runtime(small_config) -> Runtime:
    return Runtime(small_config)


@pytest.fixture
def mutator(runtime):
    return runtime.mutator()


@pytest.fixture
def bump():
    """Place an object at the top of a generation's current allocation region."""
    def place(heap: Heap, gen_id: int, klass) -> ObjectRef:
        region_id = heap.generation(gen_id).current_alloc_region
        if region_id is None:
            kind = SpaceKind.EDEN if gen_id == GEN0 else SpaceKind.TENURED
            region_id = heap.region_acquire(gen_id, kind)
        region = heap.regions[region_id]
        offset = region.top
        region.top += klass.size_bytes
        return heap.place_object(region.region_id, offset, klass)
    return place


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Point every output path of the CLI into tmp_path."""
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "runs"))
    monkeypatch.setattr(settings, "results_db_path", str(tmp_path / "runs.db"))
    monkeypatch.setattr(settings, "log_file", str(tmp_path / "logs" / "gcsim.log"))
    monkeypatch.setattr(settings, "log_level", "WARNING")
    return tmp_path
