"""Access to the bundled task corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dataset import TaskRecord, load_tasks


def bundled_corpus_path() -> Path:
    """Filesystem path of the corpus shipped inside the package."""
    return Path(str(resources.files("procure").joinpath("assets/corpus.jsonl")))


def load_bundled() -> list[TaskRecord]:
    return load_tasks(bundled_corpus_path())
