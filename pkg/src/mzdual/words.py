"""Admissible words over {x0, x_half, x1} and their exact combinatorics.

A word is a non-commutative monomial written in composition form as a
sequence of (cut, exponent) blocks, where block i stands for the letter
run ``x_cut x0^(exponent-1)``.  The first cut is always 1 and the last
exponent is at least 2; these two constraints make the associated nested
series converge ("admissibility").  The distinguished empty word plays
the role of the unit.

Everything in this module is exact: coefficients are `fractions.Fraction`
and all operators are pure functions on immutable values.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union


class WordError(ValueError):
    """Raised for malformed or inadmissible word input."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class Cut(enum.Enum):
    """Separator between adjacent blocks: selects strict vs weak chaining."""

    ONE = "1"
    HALF = "1/2"

    @property
    def eps(self) -> int:
        """Indicator of the strict-type cut: 1 for cut 1, 0 for cut 1/2."""
        return 1 if self is Cut.ONE else 0

    @property
    def letter(self) -> str:
        return "1" if self is Cut.ONE else "h"

    def __repr__(self) -> str:  # pragma: no cover - debugging nicety
        return f"Cut.{self.name}"


_LETTER_TO_CUT = {"1": Cut.ONE, "h": Cut.HALF}
# Middle-letter complement under the dual map: e -> 1 - e.
_COMPLEMENT = {"0": "1", "1": "0", "h": "h"}

_PAIR_RE = re.compile(r"^(1|1/2)\s*:\s*(\d+)$")


class Word:
    """An admissible word in canonical composition form (immutable, hashable).

    ``pairs`` is a tuple of (Cut, int) blocks.  The empty tuple encodes the
    unit word.  Invariants (checked on construction): first cut is ONE,
    all exponents >= 1, last exponent >= 2.
    """

    __slots__ = ("pairs", "_hash")

    def __init__(self, pairs: Iterable[tuple[Cut, int]] = ()):
        pairs = tuple((c, int(k)) for c, k in pairs)
        if pairs:
            if pairs[0][0] is not Cut.ONE:
                raise WordError("first cut must be 1", 0)
            for i, (c, k) in enumerate(pairs):
                if not isinstance(c, Cut):
                    raise WordError(f"invalid cut {c!r}", i)
                if k < 1:
                    raise WordError(f"exponent must be >= 1, got {k}", i)
            if pairs[-1][1] < 2:
                raise WordError(
                    f"last exponent must be >= 2, got {pairs[-1][1]}",
                    len(pairs) - 1,
                )
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "_hash", hash(pairs))

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("Word is immutable")

    def __reduce__(self):
        return (Word, (self.pairs,))

    # -- basic structure ----------------------------------------------------

    @property
    def depth(self) -> int:
        """Number of blocks p (0 for the empty word)."""
        return len(self.pairs)

    @property
    def weight(self) -> int:
        """Total letter count, the sum of all exponents."""
        return sum(k for _, k in self.pairs)

    @property
    def is_empty(self) -> bool:
        return not self.pairs

    def exponents(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.pairs)

    def cuts(self) -> tuple[Cut, ...]:
        """All block cuts c_0..c_{p-1}; c_0 is always ONE."""
        return tuple(c for c, _ in self.pairs)

    def inner_cut(self, i: int) -> Cut:
        """Cut c_i sitting between block i and block i+1 (1-based i).

        For i == depth the conventional closing cut is ONE (the series
        definitions append c_p = 1).
        """
        if not 1 <= i <= self.depth:
            raise IndexError(f"cut index {i} out of range 1..{self.depth}")
        if i == self.depth:
            return Cut.ONE
        return self.pairs[i][0]

    # -- conversions ---------------------------------------------------------

    def letters(self) -> str:
        """Letter form over {'1','h','0'}: block (c,k) -> c-letter + '0'*(k-1)."""
        return "".join(c.letter + "0" * (k - 1) for c, k in self.pairs)

    @staticmethod
    def from_letters(text: str) -> "Word":
        """Parse the letter form; inverse of :meth:`letters` on admissible words."""
        if text == "":
            return Word()
        for i, ch in enumerate(text):
            if ch not in ("0", "1", "h"):
                raise WordError(f"invalid letter {ch!r}", i)
        if text[0] == "0":
            raise WordError("word must begin with letter '1'", 0)
        if text[-1] != "0":
            raise WordError("word must end with letter '0'", len(text) - 1)
        pairs = []
        i = 0
        while i < len(text):
            cut = _LETTER_TO_CUT[text[i]]
            j = i + 1
            while j < len(text) and text[j] == "0":
                j += 1
            pairs.append((cut, j - i))
            i = j
        return Word(pairs)

    def __str__(self) -> str:
        if self.is_empty:
            return "(empty)"
        return ",".join(f"{c.value}:{k}" for c, k in self.pairs)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self) -> tuple:
        """Deterministic ordering: by weight, then composition form."""
        return (self.weight, tuple((k, c.value) for c, k in self.pairs))

    def __lt__(self, other: "Word") -> bool:
        return self.sort_key() < other.sort_key()


EMPTY_WORD = Word()


def parse_word(text: str) -> Word:
    """Parse composition syntax ``cut:k,cut:k,...`` or letter syntax over {1,h,0}.

    Composition example: ``"1:1,1/2:2"``.  Letter example: ``"1h0"``.
    Raises :class:`WordError` with position info on malformed input or
    admissibility violations.
    """
    text = text.strip()
    if not text:
        raise WordError("empty word text", 0)
    if ":" in text:
        pairs = []
        pos = 0
        for chunk in text.split(","):
            m = _PAIR_RE.match(chunk.strip())
            if m is None:
                raise WordError(f"malformed pair {chunk.strip()!r}", pos)
            cut = Cut.ONE if m.group(1) == "1" else Cut.HALF
            pairs.append((cut, int(m.group(2))))
            pos += len(chunk) + 1
        return Word(pairs)
    return Word.from_letters(text)


def dual(w: Word) -> Word:
    """The dual word: reverse the middle letters and complement each (e -> 1-e).

    An involution on admissible words; the empty word is its own dual.
    """
    if w.is_empty:
        return w
    s = w.letters()
    middle = s[1:-1]
    flipped = "".join(_COMPLEMENT[ch] for ch in reversed(middle))
    return Word.from_letters("1" + flipped + "0")


# ---------------------------------------------------------------------------
# Linear combinations with exact rational coefficients
# ---------------------------------------------------------------------------

CoeffLike = Union[int, Fraction]


class LinComb:
    """Finite formal sum of words with exact `Fraction` coefficients.

    Zero coefficients are never stored.  Supports +, -, scalar *, and
    linear extension of word maps.  Iteration yields (word, coeff) in the
    canonical word order.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, CoeffLike] | Iterable[tuple[Word, CoeffLike]] = ()):
        acc: dict[Word, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            c = Fraction(c)
            if c:
                acc[w] = acc.get(w, Fraction(0)) + c
                if not acc[w]:
                    del acc[w]
        self._terms = acc

    @staticmethod
    def of(w: Word, coeff: CoeffLike = 1) -> "LinComb":
        return LinComb([(w, coeff)])

    def items(self) -> list[tuple[Word, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: t[0].sort_key())

    def __iter__(self) -> Iterator[tuple[Word, Fraction]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, w: Word) -> Fraction:
        return self._terms.get(w, Fraction(0))

    def __add__(self, other: "LinComb") -> "LinComb":
        out = dict(self._terms)
        for w, c in other._terms.items():
            s = out.get(w, Fraction(0)) + c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        res = LinComb()
        res._terms.update(out)
        return res

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self + (-1) * other

    def __rmul__(self, scalar: CoeffLike) -> "LinComb":
        scalar = Fraction(scalar)
        if not scalar:
            return LinComb()
        res = LinComb()
        res._terms.update({w: scalar * c for w, c in self._terms.items()})
        return res

    def __eq__(self, other) -> bool:
        return isinstance(other, LinComb) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def map_words(self, f: Callable[[Word], Word]) -> "LinComb":
        """Apply a word map linearly (images may merge)."""
        return LinComb((f(w), c) for w, c in self._terms.items())

    def __repr__(self) -> str:
        if not self._terms:
            return "LinComb(0)"
        parts = [f"{c}*[{w}]" for w, c in self.items()]
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        """Serialize as a list of {coeff_num, coeff_den, word} records."""
        return [
            {"coeff_num": c.numerator, "coeff_den": c.denominator, "word": str(w)}
            for w, c in self.items()
        ]

    @staticmethod
    def from_json(records: Iterable[dict]) -> "LinComb":
        return LinComb(
            (parse_word(rec["word"]), Fraction(rec["coeff_num"], rec["coeff_den"]))
            for rec in records
        )


RVector = tuple[int, ...]


def _check_rvector(r: Sequence[int], depth: int) -> RVector:
    rv = tuple(int(x) for x in r)
    if len(rv) != depth:
        raise ValueError(f"r-vector length {len(rv)} != word depth {depth}")
    if any(x < 0 for x in rv):
        raise ValueError("r-vector entries must be >= 0")
    return rv


# ---------------------------------------------------------------------------
# Weight-raising operators
# ---------------------------------------------------------------------------


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of `parts` non-negative integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _bump(w: Word, incr: Sequence[int]) -> Word:
    return Word((c, k + d) for (c, k), d in zip(w.pairs, incr))


def _sigma_binomial(w: Word, r: int, last_offset: int) -> LinComb:
    """Shared core of the two binomial-weighted operators.

    Distributes r extra exponent units over all blocks; block i < p gets
    weight C(k_i + r_i - 1, r_i), the last block C(k_p + r_p - last_offset, r_p)
    with last_offset 2 or 1.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if w.is_empty:
        return LinComb.of(w) if r == 0 else LinComb()
    p = w.depth
    ks = w.exponents()
    out = []
    for incr in compositions(r, p):
        coeff = 1
        for i in range(p - 1):
            coeff *= math.comb(ks[i] + incr[i] - 1, incr[i])
        coeff *= math.comb(ks[-1] + incr[-1] - last_offset, incr[-1])
        if coeff:
            out.append((_bump(w, incr), coeff))
    return LinComb(out)


def sigma_b1(w: Word, r: int) -> LinComb:
    """Binomial operator matching r-fold differentiation of the two-parameter
    series in its second parameter: last-block weight C(k_p + r_p - 2, r_p)."""
    return _sigma_binomial(w, r, last_offset=2)


def sigma_b2(w: Word, r: int) -> LinComb:
    """Binomial operator for the one-parameter Hurwitz family: every block,
    including the last, carries weight C(k_i + r_i - 1, r_i)."""
    return _sigma_binomial(w, r, last_offset=1)


def sigma_eps(w: Word, r: int) -> LinComb:
    """Unit-coefficient operator: distribute r exponent units over the
    effective blocks only (block i < p is effective iff its following cut
    is 1; the last block always is).  Blocks behind a 1/2 cut stay fixed,
    so each monomial appears exactly once.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if w.is_empty:
        return LinComb.of(w) if r == 0 else LinComb()
    p = w.depth
    effective = [i for i in range(p - 1) if w.inner_cut(i + 1).eps == 1] + [p - 1]
    out = []
    for sub in compositions(r, len(effective)):
        incr = [0] * p
        for pos, d in zip(effective, sub):
            incr[pos] = d
        out.append((_bump(w, incr), 1))
    return LinComb(out)


# ---------------------------------------------------------------------------
# Monomial families entering the derivative-expansion identity
# ---------------------------------------------------------------------------


def _slot_multiplicity(d: int, slots: int) -> int:
    """Number of ways to write d as an ordered sum of `slots` non-negatives."""
    if slots == 0:
        return 1 if d == 0 else 0
    return math.comb(d + slots - 1, slots - 1)


def v_y_monomials(w: Word, l: int) -> LinComb:
    """Multiset of bumped words from the slot expansion of a word.

    Block i < p exposes k_i - eps(c_i) slots, the last block k_p - 2 slots;
    each assignment of non-negative slot values with total l bumps block
    exponents by the per-block slot sums.  Coefficients count assignments.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if w.is_empty:
        return LinComb.of(w) if l == 0 else LinComb()
    p = w.depth
    slots = [w.pairs[i][1] - w.inner_cut(i + 1).eps for i in range(p - 1)]
    slots.append(w.pairs[-1][1] - 2)
    out = []
    for incr in compositions(l, p):
        mult = 1
        for d, s in zip(incr, slots):
            mult *= _slot_multiplicity(d, s)
            if not mult:
                break
        if mult:
            out.append((_bump(w, incr), mult))
    return LinComb(out)


def v_prime_monomials(w: Word, l: int) -> LinComb:
    """Multiset of words obtained by inserting runs of the letter '1' after
    each non-initial block cut of `w`, with run lengths summing to l.

    One copy per ordered run-length tuple; duplicate words accumulate
    multiplicity.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if w.is_empty:
        return LinComb.of(w) if l == 0 else LinComb()
    q = w.depth
    out = []
    for runs in compositions(l, q - 1):
        s = w.pairs[0][0].letter + "0" * (w.pairs[0][1] - 1)
        for (c, k), run in zip(w.pairs[1:], runs):
            s += c.letter + "1" * run + "0" * (k - 1)
        out.append((Word.from_letters(s), 1))
    return LinComb(out)


# ---------------------------------------------------------------------------
# Word enumeration
# ---------------------------------------------------------------------------


def words_of_weight(weight: int, depth_max: int | None = None) -> list[Word]:
    """All admissible words of the given weight, in canonical order.

    There are 3^(weight-2) of them for weight >= 2: the middle letters are
    free over the three-letter alphabet.
    """
    if weight < 2:
        return []
    out = []
    for middle in itertools.product("01h", repeat=weight - 2):
        w = Word.from_letters("1" + "".join(middle) + "0")
        if depth_max is None or w.depth <= depth_max:
            out.append(w)
    return sorted(out, key=Word.sort_key)


def words_up_to_weight(weight_max: int, depth_max: int | None = None) -> list[Word]:
    out = []
    for wt in range(2, weight_max + 1):
        out.extend(words_of_weight(wt, depth_max))
    return out


def count_words_recursive(weight: int) -> int:
    """Independent recursive count of admissible words of a given weight.

    Counts compositions (k_1..k_p) of the weight with k_p >= 2 times
    2^(p-1) cut choices; used to cross-check the enumerator.
    """

    def count(remaining: int, first: bool) -> int:
        # words (possibly continuing) using `remaining` letters, where the
        # next block's cut is fixed (first) or free (2 choices)
        total = 0
        factor = 1 if first else 2
        for k in range(1, remaining + 1):
            if k == remaining:
                if k >= 2:
                    total += factor
            else:
                total += factor * count(remaining - k, False)
        return total

    if weight < 2:
        return 0
    return count(weight, True)
