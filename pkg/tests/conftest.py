from pathlib import Path

import pytest

from numloop.syntax import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name: str):
    if not name.endswith(".pl"):
        name += ".pl"
    return parse_program((CORPUS / name).read_text())


@pytest.fixture
def corpus():
    return load
