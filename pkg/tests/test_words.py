import pytest

from cantoract.errors import BudgetError, SchemaError
from cantoract.words import (
    GeneratorAlphabet,
    Word,
    commutator,
    parse_word,
    reduced_words,
    render_word,
)

AB = GeneratorAlphabet(("a", "b"))


def w(text):
    return parse_word(text, AB)


def test_free_reduction():
    assert Word.of([(0, 1), (0, -1)]) == Word.identity()
    assert Word.of([(0, 1), (1, 1), (1, -1), (0, -1)]) == Word.identity()
    assert Word.of([(0, 1), (0, 1), (0, -1)]) == Word.generator(0)


def test_multiplication_and_inverse():
    u = w("a*b")
    assert u * u.inverse() == Word.identity()
    assert u.inverse() == w("b^-1*a^-1")
    assert w("a").power(3) == w("a^3")
    assert w("a").power(-2) == w("a^-2")
    assert w("a").power(0) == Word.identity()


def test_commutator_reduces():
    assert commutator(w("a"), w("a")) == Word.identity()
    assert commutator(w("a"), w("a^2")) == Word.identity()
    assert commutator(w("a"), w("b")) == w("a*b*a^-1*b^-1")


def test_alphabet_rejects_bad_names():
    with pytest.raises(SchemaError):
        GeneratorAlphabet(("a", "a"))
    with pytest.raises(SchemaError):
        GeneratorAlphabet(("e",))
    with pytest.raises(SchemaError):
        GeneratorAlphabet(("a b",))
    with pytest.raises(SchemaError):
        GeneratorAlphabet(())


def test_parse_render_round_trip():
    for text in ("e", "a", "a^-1", "a^3*b^-2", "a*b*a^-1*b^-1", "b^5"):
        word = w(text)
        assert parse_word(render_word(word, AB), AB) == word
    # rendering is canonical regardless of input spelling
    assert render_word(w("a*a*a"), AB) == "a^3"
    assert render_word(w("a*a^-1"), AB) == "e"
    assert render_word(w("[a,b]"), AB) == "a*b*a^-1*b^-1"
    assert render_word(w("(a*b)^-1"), AB) == "b^-1*a^-1"


def test_parse_errors():
    for bad in ("a^", "[a,b", "(a", "a**b", "3a", "a,b", "c"):
        with pytest.raises(SchemaError):
            w(bad)


def test_enumeration_order_and_counts():
    words = list(reduced_words(AB, 2))
    rendered = [render_word(x, AB) for x in words]
    assert rendered[:4] == ["a", "a^-1", "b", "b^-1"]
    # length 2: 4 letters * 3 non-cancelling continuations
    assert len(words) == 4 + 12
    assert all(len(x) == 1 for x in words[:4])
    assert all(len(x) == 2 for x in words[4:])
    # canonical order is strictly increasing
    keys = [x.key() for x in words]
    assert keys == sorted(keys)


def test_enumeration_budget():
    with pytest.raises(BudgetError):
        list(reduced_words(AB, 5, max_count=10))
