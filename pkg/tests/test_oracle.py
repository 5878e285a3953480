import random

import pytest

from lfgglue import meaning as m
from lfgglue.lexicon import instantiate_entries
from lfgglue.prover import NoReadingError, SearchLimits, derive_readings

from conftest import load
from forward_oracle import Unsupported, enumerate_meanings
from generators import random_case


def same(readings, oracle):
    got = [(r.meaning, r.qnp_dups) for r in readings]
    return len(got) == len(oracle) and all(
        any(m.alpha_equal(a, b) and p == q for b, q in oracle) for a, p in got)


@pytest.mark.parametrize("name", ["basic", "coordinate", "quantified", "noncoordinate"])
@pytest.mark.parametrize("qnp", [0, 1, 2])
def test_corpus_matches_oracle(name, qnp):
    _, _, ps = load(name)
    oracle = enumerate_meanings(ps, "f", max_qnp=qnp)
    try:
        rs = derive_readings(ps, "f", SearchLimits(max_qnp_dups=qnp))
    except NoReadingError:
        rs = []
    assert same(rs, oracle)


def test_intensional_out_of_oracle_scope():
    _, _, ps = load("intensional")
    with pytest.raises(Unsupported):
        enumerate_meanings(ps, "f")


@pytest.mark.parametrize("seed", range(100))
def test_random_matches_oracle(seed):
    fs, lex = random_case(random.Random(seed), max_linear=5, max_facts=6)
    ps = instantiate_entries(fs, lex)
    oracle = enumerate_meanings(ps, fs.root, max_qnp=1)
    try:
        rs = derive_readings(ps, fs.root, SearchLimits(max_qnp_dups=1))
    except NoReadingError:
        rs = []
    assert same(rs, oracle)
