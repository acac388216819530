"""Classic and localized coset-fixing criteria, cores, and the subgroup oracle.

The classic check asks, per candidate word, what fraction of level-L points
it fixes; a chain "passes at depth" when every candidate's ratio has fallen
below the tolerance by the report depth.  The localized check replays the
same test inside the fiber of a base-level vertex: candidates are words in
the Schreier generators of the base stabilizer, and words lying in the
depth-truncated core (fixing the whole base fiber) are classified as
indistinguishable from the identity rather than failed.  Verdicts are
always stamped with (depth, word cap, tolerance): passing at a depth is
evidence about the limit, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chain import ChainAction, schreier_generators
from .errors import BudgetError
from .words import Word, reduced_words

PASS = "pass-at-depth"
FAIL = "fail-at-depth"
INDISTINGUISHABLE = "indistinguishable-from-identity"

EVIDENCE_NOTE = (
    "pass-at-depth is finite-depth evidence about a limit statement, not a proof"
)

DEFAULT_TOLERANCE = Fraction(1, 64)
DEFAULT_MAX_SCHREIER = 128


@dataclass(frozen=True)
class WordVerdict:
    word: Word
    verdict: str
    trajectory: tuple[tuple[int, Fraction], ...]  # (level, fixed ratio)


@dataclass(frozen=True)
class FarberReport:
    kind: str  # "farber" | "local-farber"
    base_level: int
    depth: int
    max_word_len: int | None
    tolerance: Fraction
    words: tuple[WordVerdict, ...]
    overall: str
    note: str = EVIDENCE_NOTE


@dataclass(frozen=True)
class DerivedChain:
    """Base-level stabilizer acting on its fiber, truncated at ``depth``.

    ``fibers[i - base_level]`` lists the level-i points over the base
    vertex 0; its size is the subgroup index between the two levels.
    """

    base_level: int
    depth: int
    fibers: tuple[tuple[int, ...], ...]

    def fiber(self, level: int) -> tuple[int, ...]:
        if not self.base_level <= level <= self.depth:
            raise ValueError(f"level {level} outside {self.base_level}..{self.depth}")
        return self.fibers[level - self.base_level]


def derived_chain(chain: ChainAction, base_level: int, depth: int) -> DerivedChain:
    if base_level > depth:
        raise ValueError("base level must not exceed depth")
    fibers = []
    base_size = chain.size(base_level)
    for level in range(base_level, depth + 1):
        fiber = chain.fiber(base_level, level, 0)
        if len(fiber) * base_size != chain.size(level):
            raise AssertionError("fiber size does not match the subgroup index")
        fibers.append(fiber)
    if fibers[0] != (0,):
        raise AssertionError("base fiber must be the basepoint alone")
    return DerivedChain(base_level=base_level, depth=depth, fibers=tuple(fibers))


def core_membership(chain: ChainAction, word: Word, base_level: int, level: int) -> bool:
    """Membership in the depth-truncated core at ``base_level``.

    True iff the word stabilizes the basepoint at ``base_level`` and fixes
    every level-``level`` point of the basepoint fiber, i.e. it acts
    trivially on the coset space between the two stabilizers.
    """
    if base_level > level:
        raise ValueError("core membership needs base_level <= level")
    if not chain.stabilizer_contains(word, base_level):
        return False
    perm = chain.word_permutation(word, level)
    return all(perm[x] == x for x in chain.fiber(base_level, level, 0))


def _verdicts(
    candidates: list[Word],
    *,
    trajectory_of,
    is_core,
    tolerance: Fraction,
    threads: int,
) -> list[WordVerdict]:
    def evaluate(word: Word) -> WordVerdict:
        if is_core(word):
            return WordVerdict(word, INDISTINGUISHABLE, trajectory_of(word))
        traj = trajectory_of(word)
        final = traj[-1][1]
        return WordVerdict(word, PASS if final < tolerance else FAIL, traj)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(evaluate, candidates))
    return [evaluate(word) for word in candidates]


def _overall(words: list[WordVerdict]) -> str:
    return PASS if all(w.verdict != FAIL for w in words) else FAIL


def farber_check(
    chain: ChainAction,
    *,
    words: list[Word] | None = None,
    max_word_len: int = 4,
    depth: int = 10,
    tolerance: Fraction = DEFAULT_TOLERANCE,
    threads: int = 1,
) -> FarberReport:
    """Fixed-coset ratios per candidate word with a depth-stamped verdict.

    Candidates are either the given words or all reduced words up to
    ``max_word_len`` (identity excluded).  A word that fixes every level
    point at the report depth is indistinguishable from the identity there
    and is excluded from the overall verdict.
    """
    if not 0 < tolerance < 1:
        raise ValueError("tolerance must lie strictly between 0 and 1")
    if words is None:
        candidates = list(reduced_words(chain.alphabet, max_word_len))
        cap = max_word_len
    else:
        candidates = [w for w in words]
        cap = None
        if any(not w.letters for w in candidates):
            raise ValueError("candidate words must exclude the identity")
    chain.level(depth)  # materialize once before any parallel sweep

    def trajectory_of(word: Word) -> tuple[tuple[int, Fraction], ...]:
        return tuple(
            (level, Fraction(chain.fixed_count(word, level), chain.size(level)))
            for level in range(1, depth + 1)
        )

    def is_core(word: Word) -> bool:
        return chain.fixed_count(word, depth) == chain.size(depth)

    verdicts = _verdicts(
        candidates,
        trajectory_of=trajectory_of,
        is_core=is_core,
        tolerance=tolerance,
        threads=threads,
    )
    return FarberReport(
        kind="farber",
        base_level=0,
        depth=depth,
        max_word_len=cap,
        tolerance=tolerance,
        words=tuple(verdicts),
        overall=_overall(verdicts),
    )


def local_candidates(
    chain: ChainAction,
    base_level: int,
    max_word_len: int,
    *,
    max_generators: int = DEFAULT_MAX_SCHREIER,
) -> tuple[list[Word], list[Word]]:
    """Schreier alphabet of the base stabilizer and candidate words over it.

    Candidates are all non-backtracking sequences of Schreier letters up to
    ``max_word_len``, freely reduced in the ambient generators and
    deduplicated in enumeration order.  At base level 0 the Schreier
    alphabet is the generator set itself, so the candidates coincide with
    the classic enumeration.
    """
    gens = schreier_generators(chain, base_level)
    if len(gens) > max_generators:
        raise BudgetError(
            "schreier_generators",
            f"{len(gens)} Schreier generators at level {base_level} exceed the "
            f"cap of {max_generators}",
        )
    letters = [(i, s) for i in range(len(gens)) for s in (1, -1)]
    seen: set[tuple] = set()
    out: list[Word] = []
    frontier: list[tuple[tuple[int, int], ...]] = [()]
    for _ in range(max_word_len):
        nxt = []
        for prefix in frontier:
            for idx, sign in letters:
                if prefix and prefix[-1] == (idx, -sign):
                    continue
                seq = prefix + ((idx, sign),)
                nxt.append(seq)
                word = Word.identity()
                for j, s in seq:
                    word = word * (gens[j] if s > 0 else gens[j].inverse())
                if word.letters and word.letters not in seen:
                    seen.add(word.letters)
                    out.append(word)
        frontier = nxt
    return gens, out


def local_farber_check(
    chain: ChainAction,
    base_level: int,
    *,
    max_word_len: int = 4,
    depth: int = 10,
    tolerance: Fraction = DEFAULT_TOLERANCE,
    max_generators: int = DEFAULT_MAX_SCHREIER,
    threads: int = 1,
) -> FarberReport:
    """The fixed-coset test localized to the basepoint fiber at ``base_level``.

    Words in the depth-truncated core represent the identity coset of the
    localized action and are classified indistinguishable; all other
    candidates are scored by the fraction of the base fiber they fix, level
    by level.  With ``base_level=0`` this reduces to the classic check.
    """
    if not 0 < tolerance < 1:
        raise ValueError("tolerance must lie strictly between 0 and 1")
    if base_level >= depth:
        raise ValueError("base level must be smaller than the report depth")
    chain.level(depth)
    derived = derived_chain(chain, base_level, depth)
    _, candidates = local_candidates(
        chain, base_level, max_word_len, max_generators=max_generators
    )
    start = max(base_level, 1)

    def trajectory_of(word: Word) -> tuple[tuple[int, Fraction], ...]:
        traj = []
        for level in range(start, depth + 1):
            fiber = derived.fiber(level)
            perm = chain.word_permutation(word, level)
            fixed = sum(1 for x in fiber if perm[x] == x)
            traj.append((level, Fraction(fixed, len(fiber))))
        return tuple(traj)

    def is_core(word: Word) -> bool:
        return core_membership(chain, word, base_level, depth)

    verdicts = _verdicts(
        candidates,
        trajectory_of=trajectory_of,
        is_core=is_core,
        tolerance=tolerance,
        threads=threads,
    )
    return FarberReport(
        kind="local-farber",
        base_level=base_level,
        depth=depth,
        max_word_len=max_word_len,
        tolerance=tolerance,
        words=tuple(verdicts),
        overall=_overall(verdicts),
    )


@dataclass(frozen=True)
class StabilizerCountReport:
    level: int
    word: Word
    group_order: int
    stabilizer_count: int
    containing_count: int
    conjugacy_ratio: Fraction
    fixed_ratio: Fraction
    identity_holds: bool


def image_group(chain: ChainAction, level: int, max_order: int) -> list[tuple[int, ...]]:
    """All permutations in the finite image at ``level`` (breadth-first closure)."""
    n = chain.size(level)
    lv = chain.level(level)
    gens = [lv.perms[name] for name in chain.alphabet.names]
    identity = tuple(range(n))
    elements = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[v] for v in p)
                if q not in elements:
                    elements.add(q)
                    nxt.append(q)
                    if len(elements) > max_order:
                        raise BudgetError(
                            "group_order",
                            f"image group at level {level} exceeds max_order={max_order} "
                            f"(frontier size {len(nxt)})",
                        )
        frontier = nxt
    return sorted(elements)


def stabilizer_count_oracle(
    chain: ChainAction, word: Word, level: int, max_order: int
) -> StabilizerCountReport:
    """Count distinct point stabilizers in the finite image and verify the
    fibration identity: (stabilizers containing the word) / (distinct
    stabilizers) equals the word's fixed-point ratio.  The identity is
    checked exactly on every call.
    """
    elements = image_group(chain, level, max_order)
    n = chain.size(level)
    stabs = {x: frozenset(p for p in elements if p[x] == x) for x in range(n)}
    distinct = set(stabs.values())
    image = chain.word_permutation(word, level)
    containing = sum(1 for s in distinct if image in s)
    ratio = Fraction(containing, len(distinct))
    fixed = Fraction(chain.fixed_count(word, level), n)
    if ratio != fixed:
        raise AssertionError(
            f"fibration identity failed at level {level}: {ratio} != {fixed}"
        )
    return StabilizerCountReport(
        level=level,
        word=word,
        group_order=len(elements),
        stabilizer_count=len(distinct),
        containing_count=containing,
        conjugacy_ratio=ratio,
        fixed_ratio=fixed,
        identity_holds=True,
    )
