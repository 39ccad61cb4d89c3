from __future__ import annotations

from pathlib import Path

import pytest

from persum import read_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def helpdesk_path() -> Path:
    return DATA_DIR / "helpdesk.jsonl"


@pytest.fixture(scope="session")
def helpdesk_corpus(helpdesk_path):
    return read_corpus(helpdesk_path)


@pytest.fixture(scope="session")
def helpdesk_dialog(helpdesk_corpus):
    return helpdesk_corpus.dialogs[0]
