"""Exact arithmetic in Baumslag-Solitar groups BS(m, n) = <a, t | t a^m t^-1 = a^n>.

Elements are stored in Britton normal form

    a^e_1 t^s_1 a^e_2 t^s_2 ... a^e_k t^s_k a^tail

where every exponent sitting in front of a ``t`` lies in ``[0, |n|)`` and every
exponent in front of a ``t^-1`` lies in ``[0, m)``.  Excess is carried to the
right with ``a^n t = t a^m`` and ``a^m t^-1 = t^-1 a^n``.  With that convention
a reduced word has no pinch ``t a^{km} t^-1`` or ``t^-1 a^{kn} t`` left, so two
words represent the same element iff their normal forms coincide.

Exponents are Python ints, so nothing overflows however deep the word goes
into the Bass-Serre tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

from .errors import ValidationError

Syllable = Tuple[int, int]  # (a_exponent, t_sign)
WordPair = Tuple[str, int]  # ("a" | "t", exponent)


@dataclass(frozen=True)
class BsParams:
    """Canonical parameters: ``0 < m < |n|``.  Build through :func:`make_params`."""

    m: int
    n: int
    h: int = field(init=False, compare=False)
    p: int = field(init=False, compare=False)
    q: int = field(init=False, compare=False)

    def __post_init__(self):
        if not (0 < self.m < abs(self.n)):
            raise ValidationError(
                f"BsParams({self.m}, {self.n}) is not canonical; use make_params"
            )
        h = math.gcd(self.m, abs(self.n))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "p", self.m // h)
        object.__setattr__(self, "q", abs(self.n) // h)

    @property
    def divides(self) -> bool:
        """True when m divides n (the case p == 1)."""
        return self.p == 1

    def identity(self) -> "BsElement":
        return BsElement(self, (), 0)

    def a(self, k: int = 1) -> "BsElement":
        return BsElement(self, (), k)

    def t(self, k: int = 1) -> "BsElement":
        sign = 1 if k >= 0 else -1
        return BsElement(self, ((0, sign),) * abs(k), 0)

    def __str__(self):
        return f"BS({self.m},{self.n})"

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "h": self.h, "p": self.p, "q": self.q}

    @classmethod
    def from_json(cls, data: dict) -> "BsParams":
        return cls(int(data["m"]), int(data["n"]))


def make_params(m: int, n: int) -> BsParams:
    """Validate and canonicalize ``(m, n)``.

    ``(n, m)`` presents an isomorphic group (swap ``t`` for ``t^-1``) and
    ``(-m, -n)`` is the same relation, so every valid pair is brought to
    ``0 < m < |n|``.
    """
    m, n = int(m), int(n)
    if m == 0:
        raise ValidationError("m must be nonzero")
    if n == 0:
        raise ValidationError("n must be nonzero")
    if abs(m) == abs(n):
        raise ValidationError(f"|m| must differ from |n| (got m={m}, n={n})")
    if abs(m) > abs(n):
        m, n = n, m
    if m < 0:
        m, n = -m, -n
    return BsParams(m, n)


@dataclass(frozen=True)
class BsElement:
    params: BsParams
    syllables: Tuple[Syllable, ...]
    tail: int

    # -- group operations -------------------------------------------------
    def __mul__(self, other: "BsElement") -> "BsElement":
        return multiply(self, other)

    def inverse(self) -> "BsElement":
        return invert(self)

    def is_identity(self) -> bool:
        return not self.syllables and self.tail == 0

    # -- views --------------------------------------------------------------
    def word(self) -> list:
        """The normal form as a list of ``(generator, exponent)`` pairs."""
        out = []
        for e, s in self.syllables:
            if e:
                out.append(("a", e))
            out.append(("t", s))
        if self.tail:
            out.append(("a", self.tail))
        return out

    @property
    def t_length(self) -> int:
        return len(self.syllables)

    def sort_key(self):
        return (len(self.syllables), self.syllables, abs(self.tail), self.tail)

    def __lt__(self, other: "BsElement") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return format_word(self.word())

    def __repr__(self):
        return f"BsElement({self.params}, {self})"

    def to_json(self) -> dict:
        return {
            "syllables": [[str(e), s] for e, s in self.syllables],
            "tail": str(self.tail),
        }

    @classmethod
    def from_json(cls, params: BsParams, data: dict) -> "BsElement":
        syl = tuple((int(e), int(s)) for e, s in data["syllables"])
        el = cls(params, syl, int(data["tail"]))
        if normalize(params, el.word()) != el:
            raise ValidationError(f"not a normal form: {data}")
        return el


# -- word syntax ------------------------------------------------------------

_TOKEN = re.compile(r"\s*([aAtT])(?:\^\(?(-?\d+)\)?)?\s*")


def parse_word(text: str) -> list:
    """Parse ``"t a^5 T"``-style text into ``(generator, exponent)`` pairs.

    ``A`` and ``T`` are the inverse letters; ``^k`` repeats a token (negative
    ``k`` inverts it).  The empty string is the empty word; ``e``/``1`` are
    accepted for the identity.
    """
    text = text.strip()
    if text in ("", "e", "1", "id"):
        return []
    pos = 0
    out = []
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise ValidationError(f"cannot parse word at {text[pos:]!r}")
        letter, power = match.group(1), match.group(2)
        k = int(power) if power is not None else 1
        if letter in "AT":
            k = -k
        out.append((letter.lower(), k))
        pos = match.end()
    return out


def format_word(pairs: Sequence[WordPair]) -> str:
    if not pairs:
        return "e"
    parts = []
    for gen, k in pairs:
        if k == 1:
            parts.append(gen)
        elif k == -1:
            parts.append(gen.upper())
        else:
            parts.append(f"{gen}^{k}")
    return " ".join(parts)


def _letters(word) -> Iterable[WordPair]:
    """Accept text, a sequence of single letters, or ``(gen, exp)`` pairs."""
    if isinstance(word, str):
        yield from parse_word(word)
        return
    for item in word:
        if isinstance(item, str):
            if item not in ("a", "A", "t", "T"):
                raise ValidationError(f"unknown letter {item!r}")
            yield (item.lower(), 1 if item.islower() else -1)
        else:
            gen, k = item
            if gen not in ("a", "t"):
                raise ValidationError(f"unknown generator {gen!r}")
            yield (gen, int(k))


# -- normalization (stack / leftmost strategy) -----------------------------

def _push_t(params: BsParams, syl: list, tail: int, sign: int) -> int:
    """Append ``t^sign`` to the partial normal form ``syl · a^tail``.

    Mutates ``syl`` and returns the new tail.
    """
    m, n = params.m, params.n
    if sign > 0:
        r = tail % abs(n)
        carry = (tail - r) // n  # a^{carry*n} t = t a^{carry*m}
        if r == 0 and syl and syl[-1][1] < 0:
            e_prev, _ = syl.pop()  # t^-1 a^{carry*n} t = a^{carry*m}
            return e_prev + carry * m
        syl.append((r, 1))
        return carry * m
    r = tail % m
    carry = (tail - r) // m  # a^{carry*m} t^-1 = t^-1 a^{carry*n}
    if r == 0 and syl and syl[-1][1] > 0:
        e_prev, _ = syl.pop()  # t a^{carry*m} t^-1 = a^{carry*n}
        return e_prev + carry * n
    syl.append((r, -1))
    return carry * n


def _feed(params: BsParams, syl: list, tail: int, pairs: Iterable[WordPair]) -> int:
    for gen, k in pairs:
        if gen == "a":
            tail += k
        else:
            sign = 1 if k > 0 else -1
            for _ in range(abs(k)):
                tail = _push_t(params, syl, tail, sign)
    return tail


def normalize(params: BsParams, word) -> BsElement:
    """Britton normal form of ``word`` (text, letters or ``(gen, exp)`` pairs)."""
    syl: list = []
    tail = _feed(params, syl, 0, _letters(word))
    return BsElement(params, tuple(syl), tail)


def _check_same(x: BsElement, y: BsElement):
    if x.params != y.params:
        raise ValidationError(f"mismatched groups {x.params} and {y.params}")


def multiply(x: BsElement, y: BsElement) -> BsElement:
    _check_same(x, y)
    syl = list(x.syllables)
    tail = _feed(x.params, syl, x.tail, y.word())
    return BsElement(x.params, tuple(syl), tail)


def invert(x: BsElement) -> BsElement:
    pairs = [(g, -k) for g, k in reversed(x.word())]
    return normalize(x.params, pairs)


def is_identity(x: BsElement) -> bool:
    return x.is_identity()


def power(x: BsElement, k: int) -> BsElement:
    base = x if k >= 0 else invert(x)
    out = x.params.identity()
    for _ in range(abs(k)):
        out = multiply(out, base)
    return out


def subgroup_membership(x: BsElement, label: str) -> Optional[int]:
    """Return ``z`` with ``x == a^z`` (label ``"a"``) or ``x == t^z`` (``"t"``), else None."""
    if label == "a":
        return None if x.syllables else x.tail
    if label == "t":
        if x.tail or any(e for e, _ in x.syllables):
            return None
        signs = {s for _, s in x.syllables}
        if len(signs) > 1:
            return None
        return sum(s for _, s in x.syllables)
    raise ValidationError(f"label must be 'a' or 't', got {label!r}")


# -- independent rewriting normalizer (test oracle) ------------------------

def normalize_by_rewriting(params: BsParams, word, strategy: str = "rightmost") -> BsElement:
    """Normal form via explicit pinch rewriting followed by one carry pass.

    The word is first brought to alternating form ``a^e0 t^s1 a^e1 ... a^ek``;
    pinches are then removed one at a time (``strategy`` picks the leftmost or
    the rightmost), and finally residues are carried left to right.  This is
    deliberately a different algorithm from :func:`normalize`.
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValidationError(f"unknown strategy {strategy!r}")
    m, n = params.m, params.n
    exps = [0]
    signs: list = []
    for gen, k in _letters(word):
        if gen == "a":
            exps[-1] += k
        else:
            s = 1 if k > 0 else -1
            for _ in range(abs(k)):
                signs.append(s)
                exps.append(0)

    def find_pinch():
        idx = range(len(signs) - 1)
        if strategy == "rightmost":
            idx = reversed(idx)
        for j in idx:
            s1, s2, e = signs[j], signs[j + 1], exps[j + 1]
            if s1 > 0 > s2 and e % m == 0:
                return j, (e // m) * n
            if s1 < 0 < s2 and e % abs(n) == 0:
                return j, (e // n) * m
        return None

    while True:
        hit = find_pinch()
        if hit is None:
            break
        j, replacement = hit
        # t^s1 a^e t^s2 between exps[j] and exps[j+2] collapses to a^replacement
        merged = exps[j] + replacement + exps[j + 2]
        exps[j:j + 3] = [merged]
        del signs[j:j + 2]

    syl = []
    for j, s in enumerate(signs):
        e = exps[j]
        if s > 0:
            r = e % abs(n)
            exps[j + 1] += ((e - r) // n) * m
        else:
            r = e % m
            exps[j + 1] += ((e - r) // m) * n
        syl.append((r, s))
    return BsElement(params, tuple(syl), exps[-1])
