"""Fixed sets, interior bounds, holonomy estimates, and triviality probes.

Everything here is depth-stamped: a depth-N report inspects the tower only
through level N and never claims a limit.  A cylinder counts as interior
evidence for a word's fixed set only when its entire depth-N fiber is fixed
AND the cylinder is shallow enough to have at least as many verified
refinement levels below it as its own depth (level <= N // 2).  Without
that balance rule every fixed point would trivially count as its own fixed
cylinder at level N and the estimates would degenerate; with it, a cylinder
confirmed at depth N may still be refuted at depth N + 1, and reports store
the scan cap so consumers can compare like with like.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chain import ChainAction, Cylinder, PointApprox
from .mealy import is_trivial as mealy_is_trivial
from .words import Word, reduced_words

DEFAULT_WORD_BUDGET = 50_000


def interior_scan_limit(depth: int) -> int:
    """Deepest cylinder level trusted as interior evidence at this depth."""
    return depth // 2


@dataclass(frozen=True)
class FixedSetReport:
    """Per-depth fixed statistics for one word.

    ``fixed_counts[i]`` is the fixed count at level ``i + 1``;
    ``interior_bound`` is the total measure of the maximal cylinders whose
    full depth-``depth`` fiber is fixed (levels up to ``interior_scan_limit``);
    ``hol_estimate`` is the depth-``depth`` fixed measure minus that bound.
    """

    word: Word
    depth: int
    sizes: tuple[int, ...]
    fixed_counts: tuple[int, ...]
    max_fixed_cylinders: tuple[Cylinder, ...]
    interior_bound: Fraction
    hol_estimate: Fraction
    interior_scan_max_level: int
    indistinguishable: bool

    def fixed_ratio(self, level: int) -> Fraction:
        if level < 1 or level > self.depth:
            raise ValueError(f"level {level} outside 1..{self.depth}")
        return Fraction(self.fixed_counts[level - 1], self.sizes[level - 1])


@dataclass(frozen=True)
class DensityProfile:
    """Fixed-set density inside shrinking cylinders around a center point."""

    word: Word
    center: PointApprox
    entries: tuple[Fraction, ...]  # index = cylinder level, 0..depth


@dataclass(frozen=True)
class TrivialityWitness:
    """A word that fixes a whole depth-N cylinder fiber yet moves points.

    ``exact`` is set only when a transducer backend certifies both sides:
    the subtree below the cylinder is genuinely fixed and the word is
    genuinely non-trivial.
    """

    word: Word
    cylinder: Cylinder
    exact: bool


@dataclass(frozen=True)
class LqaScaleEstimate:
    depth: int
    max_word_len: int
    scale_level: int | None  # None means no witness-free scale <= depth

    @property
    def scale(self) -> Fraction | None:
        if self.scale_level is None:
            return None
        return Fraction(1, 2**self.scale_level)


def _require_nonidentity(word: Word):
    if not word.letters:
        raise ValueError("the identity word is excluded from holonomy queries")


def _fully_fixed_by_level(chain: ChainAction, fixed: list[bool], depth: int) -> list[list[bool]]:
    """For each level 0..depth, whether every depth-``depth`` point below is fixed."""
    tables = [fixed]
    cur = fixed
    for level in range(depth, 0, -1):
        parent = chain.level(level).parent
        nxt = [True] * chain.size(level - 1)
        for x, ok in enumerate(cur):
            if not ok:
                nxt[parent[x]] = False
        tables.append(nxt)
        cur = nxt
    tables.reverse()
    return tables


def _maximal_fixed_cylinders(
    chain: ChainAction, tables: list[list[bool]], cap: int
) -> list[Cylinder]:
    out: list[Cylinder] = []
    for level in range(0, cap + 1):
        table = tables[level]
        if level == 0:
            if table[0]:
                return [Cylinder(0, 0)]
            continue
        parent = chain.level(level).parent
        above = tables[level - 1]
        for v, ok in enumerate(table):
            if ok and not above[parent[v]]:
                out.append(Cylinder(level, v))
    return out


def fixed_set_report(chain: ChainAction, word: Word, depth: int) -> FixedSetReport:
    """Fixed counts to ``depth`` plus the interior bound and holonomy estimate.

    The maximal fixed cylinders are found by a top-down scan; their total
    measure lower-bounds the interior of the fixed set as seen at this
    depth, so the holonomy estimate is the depth-stamped measure of fixed
    points not yet explained by any fixed cylinder.
    """
    _require_nonidentity(word)
    sizes = []
    counts = []
    perm_at_depth: tuple[int, ...] = ()
    for level in range(1, depth + 1):
        perm = chain.word_permutation(word, level)
        sizes.append(len(perm))
        counts.append(sum(1 for i, v in enumerate(perm) if i == v))
        if level == depth:
            perm_at_depth = perm
    fixed = [i == v for i, v in enumerate(perm_at_depth)]
    tables = _fully_fixed_by_level(chain, fixed, depth)
    cap = interior_scan_limit(depth)
    cylinders = _maximal_fixed_cylinders(chain, tables, cap)
    interior = sum((Fraction(1, chain.size(c.level)) for c in cylinders), Fraction(0))
    hol = Fraction(counts[-1], sizes[-1]) - interior
    if hol < 0:
        raise AssertionError("interior bound exceeded the fixed measure")
    return FixedSetReport(
        word=word,
        depth=depth,
        sizes=tuple(sizes),
        fixed_counts=tuple(counts),
        max_fixed_cylinders=tuple(cylinders),
        interior_bound=interior,
        hol_estimate=hol,
        interior_scan_max_level=cap,
        indistinguishable=counts[-1] == sizes[-1],
    )


def density_profile(chain: ChainAction, word: Word, center: PointApprox) -> DensityProfile:
    """Exact fixed fraction of the fiber over each ancestor of ``center``."""
    _require_nonidentity(word)
    depth = center.depth
    perm = chain.word_permutation(word, depth)
    entries = []
    for level in range(0, depth + 1):
        anc = chain.ancestor(depth, center.index, level)
        fiber = chain.fiber(level, depth, anc)
        fixed = sum(1 for x in fiber if perm[x] == x)
        entries.append(Fraction(fixed, len(fiber)))
    return DensityProfile(word=word, center=center, entries=tuple(entries))


def _mealy_exact(chain: ChainAction, word: Word, cylinder: Cylinder) -> bool:
    backend = chain.mealy
    state_word = backend.state_word(word)
    if mealy_is_trivial(backend.machine, state_word):
        return False  # word is genuinely the identity; not a witness at all
    path = backend.vertex_path(cylinder.vertex, cylinder.level)
    return mealy_is_trivial(backend.machine, backend.machine.section(state_word, path))


def partial_triviality_witnesses(
    chain: ChainAction,
    max_word_len: int,
    depth: int,
    *,
    max_words: int = DEFAULT_WORD_BUDGET,
) -> list[TrivialityWitness]:
    """Words fixing an entire depth-``depth`` cylinder fiber while moving points.

    Scans all reduced words up to ``max_word_len`` in canonical order and
    returns, per word, its maximal fully fixed cylinders (levels 1 up to the
    interior scan cap).  Each returned witness is re-checked by direct
    permutation evaluation.  Transducer-backed chains upgrade witnesses to
    exact statements where the section oracle certifies them.
    """
    out: list[TrivialityWitness] = []
    cap = interior_scan_limit(depth)
    for word in reduced_words(chain.alphabet, max_word_len, max_count=max_words):
        perm = chain.word_permutation(word, depth)
        fixed = [i == v for i, v in enumerate(perm)]
        if all(fixed):
            continue  # indistinguishable from identity at this depth: moves nothing
        tables = _fully_fixed_by_level(chain, fixed, depth)
        for cyl in _maximal_fixed_cylinders(chain, tables, cap):
            if cyl.level < 1:
                continue
            fiber = chain.fiber(cyl.level, depth, cyl.vertex)
            if any(perm[x] != x for x in fiber):
                raise AssertionError("witness failed direct re-check")
            exact = bool(chain.mealy) and _mealy_exact(chain, word, cyl)
            out.append(TrivialityWitness(word=word, cylinder=cyl, exact=exact))
    return out


def lqa_scale_estimate(
    chain: ChainAction,
    max_word_len: int,
    depth: int,
    *,
    max_words: int = DEFAULT_WORD_BUDGET,
) -> LqaScaleEstimate:
    """Smallest level k with no partial-triviality witness inside any level-k cylinder.

    A witness at scale k is a word (length <= ``max_word_len``) that fixes
    the whole depth-``depth`` fiber of some cylinder strictly below a
    level-k cylinder while moving another point of that same level-k
    fiber.  Witnesses at a scale imply witnesses at every coarser scale, so
    the answer is the first witness-free k; 0 means no witnesses at all
    (quasi-analytic candidate at this depth and word length).
    """
    cap = interior_scan_limit(depth)
    deepest_witness = -1
    for word in reduced_words(chain.alphabet, max_word_len, max_count=max_words):
        perm = chain.word_permutation(word, depth)
        fixed = [i == v for i, v in enumerate(perm)]
        if all(fixed):
            continue
        tables = _fully_fixed_by_level(chain, fixed, depth)
        for m in range(1, cap + 1):
            for u, ok in enumerate(tables[m]):
                if not ok:
                    continue
                # deepest ambient level k < m whose fiber over u's ancestor moves
                for k in range(m - 1, deepest_witness, -1):
                    if not tables[k][chain.ancestor(m, u, k)]:
                        deepest_witness = max(deepest_witness, k)
                        break
    scale = deepest_witness + 1
    if scale > depth:
        return LqaScaleEstimate(depth=depth, max_word_len=max_word_len, scale_level=None)
    return LqaScaleEstimate(depth=depth, max_word_len=max_word_len, scale_level=scale)
