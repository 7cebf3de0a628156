import copy
import json
from pathlib import Path

import pytest

from mlsds.datasheet import Bundle, load_bundle

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "example" / "persondet"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(autouse=True)
def _stable_env(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    monkeypatch.setenv("MLSDS_NO_COLOR", "1")


@pytest.fixture(scope="session")
def fixture_bundle() -> Bundle:
    return load_bundle(FIXTURE)


@pytest.fixture
def bundle_doc(fixture_bundle):
    """A mutable deep copy of the example bundle.json."""
    return copy.deepcopy(dict(fixture_bundle.doc))


@pytest.fixture
def make_bundle(fixture_bundle):
    def make(doc=None, **files):
        merged = dict(fixture_bundle.files)
        merged.update({k: v.encode() if isinstance(v, str) else v for k, v in files.items()})
        return Bundle(doc if doc is not None else fixture_bundle.doc, merged)

    return make


@pytest.fixture
def bundle_dir(tmp_path, fixture_bundle):
    """Write a (possibly modified) copy of the example bundle to disk."""

    def write(doc=None, **files):
        target = tmp_path / "bundle"
        target.mkdir(exist_ok=True)
        for name, data in fixture_bundle.files.items():
            (target / name).write_bytes(data)
        for name, data in files.items():
            (target / name).write_bytes(data.encode() if isinstance(data, str) else data)
        (target / "bundle.json").write_text(json.dumps(doc if doc is not None else fixture_bundle.doc, indent=2))
        return target

    return write
