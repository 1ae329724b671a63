import json
from pathlib import Path

import pytest

from facetlens import store

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def gender_dim():
    return store.load_dimension(FIXTURES / "gender.dim.json")


@pytest.fixture(scope="session")
def ses_dim():
    return store.load_dimension(FIXTURES / "ses.dim.json")


@pytest.fixture(scope="session")
def age_dim():
    return store.load_dimension(FIXTURES / "age.dim.json")


@pytest.fixture(scope="session")
def checkout():
    return store.load_use_case(FIXTURES / "checkout.usecase.json")


@pytest.fixture(scope="session")
def base_rules():
    return store.load_rules(FIXTURES / "base.rules")


@pytest.fixture(scope="session")
def baseline_seeds():
    doc = json.loads((FIXTURES / "baseline-seeds.json").read_text(encoding="utf-8"))
    return doc


@pytest.fixture()
def workspace(tmp_path, gender_dim, ses_dim, age_dim, checkout, base_rules):
    """Throwaway directory preloaded with the shipped fixtures."""
    for name in ("gender.dim.json", "ses.dim.json", "age.dim.json",
                 "checkout.usecase.json", "base.rules"):
        (tmp_path / name).write_bytes((FIXTURES / name).read_bytes())
    return tmp_path
