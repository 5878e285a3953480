import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lfgglue.corpus import paths  # noqa: E402
from lfgglue.fstruct import parse_fstructure  # noqa: E402
from lfgglue.lexicon import instantiate_entries, parse_lexicon  # noqa: E402


def load(name):
    fs_path, lex_path = paths(name)
    fs = parse_fstructure(fs_path.read_text(), str(fs_path))
    lex = parse_lexicon(lex_path.read_text(), str(lex_path))
    return fs, lex, instantiate_entries(fs, lex)


@pytest.fixture
def corpus():
    return load
