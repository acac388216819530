import pytest

import cantoract as ca
from cantoract.errors import SchemaError
from cantoract.mealy import (
    MealyMachine,
    adding_machine,
    identity_states,
    is_trivial,
    machine_from_dict,
    machine_to_dict,
    minimize,
)

from conftest import word


def test_adding_machine_sections():
    m = adding_machine(2)
    a = m.state_word("a")
    # carry propagates on 1, stops on 0
    assert m.section(a, (1,)) == (("add", 1),)
    assert m.section(a, (0,)) == (("id", 1),)
    assert m.section(a, (1, 1)) == (("add", 1),)
    assert m.root_permutation(a) == (1, 0)


def test_is_trivial():
    m = adding_machine(2)
    a = m.state_word("a")
    assert is_trivial(m, a + (("add", -1),))
    assert not is_trivial(m, a)
    assert not is_trivial(m, a + a)
    assert is_trivial(m, ())


def test_inverse_section_consistency():
    m = adding_machine(2)
    a = m.state_word("a")
    inv = (("add", -1),)
    # a^-1 acts as -1: transduce a then a^-1 is the identity on strings
    for x in range(16):
        path = tuple((x >> i) & 1 for i in range(4))
        assert m.transduce(inv, m.transduce(a, path)) == path


def test_minimize_merges_duplicate_identity():
    m = MealyMachine(
        2,
        ("add", "id", "id2"),
        {
            "add": {0: "id", 1: "add"},
            "id": {0: "id2", 1: "id"},
            "id2": {0: "id", 1: "id2"},
        },
        {
            "add": {0: 1, 1: 0},
            "id": {0: 0, 1: 1},
            "id2": {0: 0, 1: 1},
        },
        {"a": "add"},
    )
    mm = minimize(m)
    assert len(mm.states) == 2
    assert identity_states(mm) == frozenset({"id"})
    assert mm.generator_map == {"a": "add"}


def test_invertibility_required():
    with pytest.raises(SchemaError):
        MealyMachine(
            2,
            ("q",),
            {"q": {0: "q", 1: "q"}},
            {"q": {0: 0, 1: 0}},  # not a permutation
            {"a": "q"},
        )


def test_machine_dict_round_trip(tmp_path):
    m = adding_machine(3)
    data = machine_to_dict(m)
    m2 = machine_from_dict(data)
    assert m2.states == m.states
    assert m2.root_permutation(m2.state_word("a")) == m.root_permutation(m.state_word("a"))
    import json

    path = tmp_path / "machine.json"
    path.write_text(json.dumps(data))
    m3 = ca.load_machine(path)
    assert m3.alphabet_size == 3


def test_exact_agrees_with_truncation(adding):
    """is_trivial true must imply depth-8 triviality; on short adding-machine
    words the two decisions coincide."""
    backend = adding.mealy
    n = adding.size(8)
    for w in ca.reduced_words(adding.alphabet, 4):
        exact = is_trivial(backend.machine, backend.state_word(w))
        truncated = adding.fixed_count(w, 8) == n
        if exact:
            assert truncated
        assert exact == truncated  # words of length <= 4 cannot hide a 2^8 shift


def test_mealy_chain_against_transduction(adding):
    backend = adding.mealy
    a = word(adding, "a")
    for level in (1, 3, 5):
        perm = adding.level(level).perms["a"]
        for x in range(adding.size(level)):
            path = backend.vertex_path(x, level)
            out = backend.machine.transduce(backend.machine.state_word("a"), path)
            assert perm[x] == sum(c * 2**i for i, c in enumerate(out))
