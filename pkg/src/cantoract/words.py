"""Freely reduced words over a finite generating alphabet.

A word is a tuple of letters ``(generator_index, sign)`` with sign +1 or -1,
kept freely reduced (no adjacent ``g * g^-1`` pair).  The empty word is the
identity and renders as the reserved symbol ``e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .errors import BudgetError, SchemaError

IDENTITY_SYMBOL = "e"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

Letter = tuple[int, int]


@dataclass(frozen=True)
class GeneratorAlphabet:
    """Ordered, distinct generator names; each has an implicit formal inverse."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise SchemaError("alphabet must contain at least one generator")
        seen = set()
        for name in self.names:
            if not name or not _NAME_RE.fullmatch(name):
                raise SchemaError(f"bad generator name: {name!r}")
            if name == IDENTITY_SYMBOL:
                raise SchemaError(f"{IDENTITY_SYMBOL!r} is reserved for the identity word")
            if name in seen:
                raise SchemaError(f"duplicate generator name: {name!r}")
            seen.add(name)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown generator: {name!r}") from None


def _reduce(letters) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for gen, sign in letters:
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; build via :meth:`of` or the word operations."""

    letters: tuple[Letter, ...]

    @staticmethod
    def of(letters) -> "Word":
        return Word(_reduce(letters))

    @staticmethod
    def identity() -> "Word":
        return Word(())

    @staticmethod
    def generator(index: int, sign: int = 1) -> "Word":
        return Word(((index, 1 if sign > 0 else -1),))

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(tuple((g, -s) for g, s in reversed(self.letters)))

    def power(self, k: int) -> "Word":
        if k == 0:
            return Word(())
        base = self if k > 0 else self.inverse()
        out = Word(())
        for _ in range(abs(k)):
            out = out * base
        return out

    def key(self) -> tuple:
        # canonical order: length first, then letters with +1 before -1
        return (len(self.letters), tuple((g, 0 if s > 0 else 1) for g, s in self.letters))


def commutator(u: Word, v: Word) -> Word:
    """Reduced word ``u * v * u^-1 * v^-1``."""
    return u * v * u.inverse() * v.inverse()


def conjugate(t: Word, x: Word) -> Word:
    """Reduced word ``t * x * t^-1``."""
    return t * x * t.inverse()


def render_word(word: Word, alphabet: GeneratorAlphabet) -> str:
    """Render with repeated letters collapsed into powers, e.g. ``a^3*b^-1``."""
    if not word.letters:
        return IDENTITY_SYMBOL
    runs: list[tuple[int, int]] = []  # (gen, signed count)
    for gen, sign in word.letters:
        if runs and runs[-1][0] == gen and (runs[-1][1] > 0) == (sign > 0):
            runs[-1] = (gen, runs[-1][1] + sign)
        else:
            runs.append((gen, sign))
    parts = []
    for gen, count in runs:
        name = alphabet.names[gen]
        parts.append(name if count == 1 else f"{name}^{count}")
    return "*".join(parts)


class _Parser:
    """Recursive-descent parser for the word syntax.

    grammar:  expr := factor ('*' factor)*
              factor := atom ('^' int)?
              atom := name | 'e' | '[' expr ',' expr ']' | '(' expr ')'
    """

    def __init__(self, text: str, alphabet: GeneratorAlphabet):
        self.text = text
        self.pos = 0
        self.alphabet = alphabet

    def parse(self) -> Word:
        word = self._expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise SchemaError(f"unexpected {self.text[self.pos]!r} at column {self.pos} in word {self.text!r}")
        return word

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expr(self) -> Word:
        word = self._factor()
        while self._peek() == "*":
            self.pos += 1
            word = word * self._factor()
        return word

    def _factor(self) -> Word:
        atom = self._atom()
        if self._peek() == "^":
            self.pos += 1
            return atom.power(self._int())
        return atom

    def _int(self) -> int:
        self._skip_ws()
        m = re.match(r"-?\d+", self.text[self.pos:])
        if not m:
            raise SchemaError(f"expected integer exponent at column {self.pos} in {self.text!r}")
        self.pos += len(m.group())
        return int(m.group())

    def _atom(self) -> Word:
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            word = self._expr()
            if self._peek() != ")":
                raise SchemaError(f"missing ')' in word {self.text!r}")
            self.pos += 1
            return word
        if ch == "[":
            self.pos += 1
            u = self._expr()
            if self._peek() != ",":
                raise SchemaError(f"missing ',' in commutator in {self.text!r}")
            self.pos += 1
            v = self._expr()
            if self._peek() != "]":
                raise SchemaError(f"missing ']' in word {self.text!r}")
            self.pos += 1
            return commutator(u, v)
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise SchemaError(f"expected generator name at column {self.pos} in {self.text!r}")
        self.pos = m.end()
        name = m.group()
        if name == IDENTITY_SYMBOL:
            return Word(())
        return Word.generator(self.alphabet.index(name))


def parse_word(text: str, alphabet: GeneratorAlphabet) -> Word:
    return _Parser(text, alphabet).parse()


def reduced_words(
    alphabet: GeneratorAlphabet,
    max_len: int,
    *,
    include_identity: bool = False,
    max_count: int | None = None,
) -> Iterator[Word]:
    """Yield all freely reduced words up to ``max_len`` in canonical order.

    Canonical order is by length, then lexicographic over letters with the
    letter order (gen 0, +1) < (gen 0, -1) < (gen 1, +1) < ...  Raises a
    word-budget error when ``max_count`` is exceeded.
    """
    letters = [(g, s) for g in range(len(alphabet)) for s in (1, -1)]
    count = 0
    if include_identity:
        count += 1
        yield Word(())
    frontier: list[tuple[Letter, ...]] = [()]
    for _ in range(max_len):
        nxt: list[tuple[Letter, ...]] = []
        for prefix in frontier:
            for gen, sign in letters:
                if prefix and prefix[-1] == (gen, -sign):
                    continue
                seq = prefix + ((gen, sign),)
                count += 1
                if max_count is not None and count > max_count:
                    raise BudgetError(
                        "word_budget",
                        f"word enumeration exceeded budget of {max_count} words",
                    )
                yield Word(seq)
                nxt.append(seq)
        frontier = nxt
