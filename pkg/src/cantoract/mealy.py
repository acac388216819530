"""Invertible letter transducers acting on a rooted d-ary tree.

A machine state transduces strings letter by letter: it outputs an image
letter and hands the rest of the string to a successor state.  Invertible
machines (each state's output row is a permutation) define tree
automorphisms, and products of states and their inverses form a group.
Unlike truncated towers, these admit exact answers: the section of a word
at a vertex governs the whole subtree below it, so subtree triviality is
decidable by closing the word under sections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import BudgetError, SchemaError

StateLetter = tuple[str, int]  # (state name, sign)
StateWord = tuple[StateLetter, ...]


class MealyMachine:
    def __init__(
        self,
        alphabet_size: int,
        states: tuple[str, ...],
        transitions: dict,
        outputs: dict,
        generator_map: dict,
    ):
        if alphabet_size < 2:
            raise SchemaError(f"alphabet size must be >= 2, got {alphabet_size}")
        self.alphabet_size = alphabet_size
        self.states = tuple(states)
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise SchemaError("duplicate state names")
        self.transitions = {q: dict(transitions[q]) for q in self.states}
        self.outputs = {q: dict(outputs[q]) for q in self.states}
        self.generator_map = dict(generator_map)
        letters = set(range(alphabet_size))
        for q in self.states:
            if set(self.transitions[q]) != letters or set(self.outputs[q]) != letters:
                raise SchemaError(f"state {q!r} is not total over the alphabet")
            for c in letters:
                if self.transitions[q][c] not in state_set:
                    raise SchemaError(f"state {q!r} transitions to unknown state on letter {c}")
            if sorted(self.outputs[q].values()) != sorted(letters):
                raise SchemaError(f"state {q!r} output row is not a permutation (machine not invertible)")
        for gen, q in self.generator_map.items():
            if q not in state_set:
                raise SchemaError(f"generator {gen!r} maps to unknown state {q!r}")
        self._inverse_outputs = {
            q: {v: c for c, v in self.outputs[q].items()} for q in self.states
        }

    def state_word(self, gen: str, sign: int = 1) -> StateWord:
        return ((self.generator_map[gen], 1 if sign > 0 else -1),)

    def step(self, word: StateWord, letter: int) -> tuple[int, StateWord]:
        """Transduce one letter: image letter and the section word below it.

        The rightmost factor reads the input letter first, matching the
        right-to-left action convention for words.
        """
        sections: list[StateLetter] = []
        cur = letter
        for state, sign in reversed(word):
            if sign > 0:
                sections.append((self.transitions[state][cur], 1))
                cur = self.outputs[state][cur]
            else:
                pre = self._inverse_outputs[state][cur]
                sections.append((self.transitions[state][pre], -1))
                cur = pre
        return cur, _reduce_state_word(tuple(reversed(sections)))

    def section(self, word: StateWord, vertex: tuple[int, ...]) -> StateWord:
        """The state word governing the subtree below ``vertex``."""
        for letter in vertex:
            _, word = self.step(word, letter)
        return word

    def root_permutation(self, word: StateWord) -> tuple[int, ...]:
        out = []
        for c in range(self.alphabet_size):
            img, _ = self.step(word, c)
            out.append(img)
        return tuple(out)

    def transduce(self, word: StateWord, string: tuple[int, ...]) -> tuple[int, ...]:
        out = []
        for letter in string:
            img, word = self.step(word, letter)
            out.append(img)
        return tuple(out)


def _reduce_state_word(word: StateWord) -> StateWord:
    stack: list[StateLetter] = []
    for state, sign in word:
        if stack and stack[-1][0] == state and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((state, sign))
    return tuple(stack)


def identity_states(machine: MealyMachine) -> frozenset[str]:
    """States acting as the identity on the whole tree (greatest fixed point)."""
    candidates = {
        q
        for q in machine.states
        if all(machine.outputs[q][c] == c for c in range(machine.alphabet_size))
    }
    changed = True
    while changed:
        changed = False
        for q in list(candidates):
            if any(machine.transitions[q][c] not in candidates for c in range(machine.alphabet_size)):
                candidates.discard(q)
                changed = True
    return frozenset(candidates)


def is_trivial(machine: MealyMachine, word: StateWord, *, max_closure: int = 100_000) -> bool:
    """Exactly decide whether ``word`` acts as the identity on the whole tree.

    Closes the word under sections; the action is trivial iff every reachable
    section fixes every letter at its root.
    """
    trivial = identity_states(machine)
    start = _strip_identity(word, trivial)
    seen: set[StateWord] = set()
    stack = [start]
    while stack:
        w = stack.pop()
        if w in seen:
            continue
        seen.add(w)
        if len(seen) > max_closure:
            raise BudgetError(
                "section_closure",
                f"section closure exceeded {max_closure} words while deciding triviality",
            )
        for c in range(machine.alphabet_size):
            img, sec = machine.step(w, c)
            if img != c:
                return False
            sec = _strip_identity(sec, trivial)
            if sec not in seen:
                stack.append(sec)
    return True


def _strip_identity(word: StateWord, trivial: frozenset[str]) -> StateWord:
    return _reduce_state_word(tuple(l for l in word if l[0] not in trivial))


def minimize(machine: MealyMachine) -> MealyMachine:
    """Merge behaviorally equivalent states by partition refinement.

    The returned machine uses the first original state of each class as the
    class representative, so a duplicated identity state collapses into a
    single class.
    """
    letters = range(machine.alphabet_size)
    # initial partition: by output row
    sig0 = {q: tuple(machine.outputs[q][c] for c in letters) for q in machine.states}
    classes = {}
    for q in machine.states:
        classes.setdefault(sig0[q], []).append(q)
    part = {q: i for i, group in enumerate(classes.values()) for q in group}
    while True:
        sig = {
            q: (part[q], tuple(part[machine.transitions[q][c]] for c in letters))
            for q in machine.states
        }
        new_classes: dict = {}
        for q in machine.states:
            new_classes.setdefault(sig[q], []).append(q)
        new_part = {q: i for i, group in enumerate(new_classes.values()) for q in group}
        if new_part == part:
            break
        part = new_part
    reps: dict[int, str] = {}
    for q in machine.states:
        reps.setdefault(part[q], q)
    rep_of = {q: reps[part[q]] for q in machine.states}
    states = tuple(sorted(set(rep_of.values()), key=machine.states.index))
    transitions = {
        q: {c: rep_of[machine.transitions[q][c]] for c in letters} for q in states
    }
    outputs = {q: {c: machine.outputs[q][c] for c in letters} for q in states}
    generator_map = {g: rep_of[q] for g, q in machine.generator_map.items()}
    return MealyMachine(machine.alphabet_size, states, transitions, outputs, generator_map)


def machine_from_dict(data: dict) -> MealyMachine:
    try:
        alphabet = int(data["alphabet"])
        states = tuple(data["states"])
        transitions = {
            q: {int(c): s for c, s in row.items()} for q, row in data["transitions"].items()
        }
        outputs = {
            q: {int(c): int(v) for c, v in row.items()} for q, row in data["outputs"].items()
        }
        generators = dict(data["generators"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed machine file: {exc}") from exc
    return MealyMachine(alphabet, states, transitions, outputs, generators)


def machine_to_dict(machine: MealyMachine) -> dict:
    return {
        "alphabet": machine.alphabet_size,
        "states": list(machine.states),
        "transitions": {
            q: {str(c): machine.transitions[q][c] for c in range(machine.alphabet_size)}
            for q in machine.states
        },
        "outputs": {
            q: {str(c): machine.outputs[q][c] for c in range(machine.alphabet_size)}
            for q in machine.states
        },
        "generators": dict(machine.generator_map),
    }


def load_machine(path) -> MealyMachine:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"machine file {path} is not valid JSON: {exc}") from exc
    return machine_from_dict(data)


def adding_machine(base: int = 2) -> MealyMachine:
    """The +1 odometer on base-``base`` strings (least significant letter first)."""
    if base < 2:
        raise SchemaError("adding machine needs base >= 2")
    states = ("add", "id")
    transitions = {
        "add": {c: ("add" if c == base - 1 else "id") for c in range(base)},
        "id": {c: "id" for c in range(base)},
    }
    outputs = {
        "add": {c: (c + 1) % base for c in range(base)},
        "id": {c: c for c in range(base)},
    }
    return MealyMachine(base, states, transitions, outputs, {"a": "add"})


@dataclass(frozen=True)
class MealyBackend:
    """Attaches exact-oracle data to a chain built from a machine."""

    machine: MealyMachine
    generator_order: tuple[str, ...]

    def state_word(self, word) -> StateWord:
        letters: list[StateLetter] = []
        for gen, sign in word.letters:
            name = self.generator_order[gen]
            letters.append((self.machine.generator_map[name], sign))
        return _reduce_state_word(tuple(letters))

    def vertex_path(self, vertex: int, level: int) -> tuple[int, ...]:
        d = self.machine.alphabet_size
        path = []
        for _ in range(level):
            path.append(vertex % d)
            vertex //= d
        return tuple(path)
