from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from higman_lines.bs_algebra import (
    BsElement,
    BsParams,
    format_word,
    invert,
    is_identity,
    make_params,
    multiply,
    normalize,
    normalize_by_rewriting,
    parse_word,
    power,
    subgroup_membership,
)
from higman_lines.errors import ValidationError

GROUPS = [(1, 2), (2, 3), (2, 4), (2, -3), (3, 5)]

letters = st.lists(st.sampled_from("aAtT"), max_size=16)
group = st.sampled_from(GROUPS).map(lambda mn: make_params(*mn))


def test_make_params_examples():
    p = make_params(2, 4)
    assert (p.m, p.n, p.h, p.p, p.q) == (2, 4, 2, 1, 2)
    assert make_params(4, 2) == p
    assert make_params(-2, -3) == make_params(2, 3)
    assert make_params(3, -2) == make_params(-2, 3) == BsParams(2, -3)
    with pytest.raises(ValidationError):
        make_params(2, 2)
    with pytest.raises(ValidationError):
        make_params(0, 3)
    with pytest.raises(ValidationError):
        make_params(2, -2)
    with pytest.raises(ValidationError):
        BsParams(3, 2)


@pytest.mark.parametrize("m,n", [(2, 3), (4, 6), (3, -9), (6, 10)])
def test_params_invariants(m, n):
    import math

    p = make_params(m, n)
    assert 0 < p.m < abs(p.n)
    assert p.h == math.gcd(p.m, abs(p.n))
    assert p.p * p.h == p.m and p.q * p.h == abs(p.n)
    assert math.gcd(p.p, p.q) == 1


def test_normalize_examples():
    assert normalize(make_params(1, 2), "t a T") == make_params(1, 2).a(2)
    g = normalize(make_params(2, 3), "t a^5 T")
    assert str(g) == "t a T a^6"
    assert g.syllables == ((0, 1), (1, -1)) and g.tail == 6
    p = make_params(2, 3)
    assert is_identity(multiply(normalize(p, "t a^2 T"), p.a(-3)))


def test_word_input_forms_agree():
    p = make_params(2, 3)
    assert normalize(p, "t a^5 T") == normalize(p, ["t", "a", "a", "a", "a", "a", "T"])
    assert normalize(p, [("t", 1), ("a", 5), ("t", -1)]) == normalize(p, "t a^(5) t^-1")
    assert normalize(p, "") == p.identity() == normalize(p, "e")
    with pytest.raises(ValidationError):
        parse_word("t b")
    with pytest.raises(ValidationError):
        normalize(p, ["x"])


def test_format_parse_roundtrip():
    pairs = [("t", 1), ("a", -3), ("t", -1), ("a", 2)]
    assert parse_word(format_word(pairs)) == pairs
    assert format_word([]) == "e"


def test_subgroup_membership_examples():
    p12, p23 = make_params(1, 2), make_params(2, 3)
    assert subgroup_membership(p23.a(5), "a") == 5
    assert subgroup_membership(normalize(p12, "t a T"), "a") == 2
    assert subgroup_membership(normalize(p23, "t a T"), "a") is None
    assert subgroup_membership(p23.t(3), "t") == 3
    assert subgroup_membership(p23.t(-2), "t") == -2
    assert subgroup_membership(normalize(p23, "t a"), "t") is None
    with pytest.raises(ValidationError):
        subgroup_membership(p23.a(1), "x")


def test_mixed_groups_rejected():
    with pytest.raises(ValidationError):
        multiply(make_params(1, 2).a(1), make_params(2, 3).a(1))


def test_power_and_identity():
    p = make_params(2, 3)
    x = normalize(p, "t a T a")
    assert power(x, 3) == multiply(x, multiply(x, x))
    assert is_identity(multiply(power(x, -2), power(x, 2)))
    assert multiply(x, p.identity()) == x


def test_residue_ranges_and_no_pinch():
    rng = random.Random(7)
    for mn in GROUPS:
        p = make_params(*mn)
        for _ in range(300):
            g = normalize(p, "".join(rng.choice("aAtT") for _ in range(rng.randint(0, 16))))
            for (e, s), nxt in itertools.zip_longest(g.syllables, g.syllables[1:]):
                assert 0 <= e < (abs(p.n) if s > 0 else p.m)
                if nxt is not None and nxt[1] != s:
                    assert nxt[0] != 0


@settings(max_examples=300, deadline=None)
@given(group, letters)
def test_normalize_idempotent(p, word):
    g = normalize(p, word)
    assert normalize(p, g.word()) == g


@settings(max_examples=300, deadline=None)
@given(group, letters)
def test_inverse_cancels(p, word):
    g = normalize(p, word)
    assert multiply(g, invert(g)).is_identity()
    assert multiply(invert(g), g).is_identity()


@settings(max_examples=300, deadline=None)
@given(group, letters)
def test_rewriting_strategies_agree(p, word):
    g = normalize(p, word)
    assert normalize_by_rewriting(p, word, "leftmost") == g
    assert normalize_by_rewriting(p, word, "rightmost") == g


@settings(max_examples=200, deadline=None)
@given(group, letters, letters, letters)
def test_associativity(p, w1, w2, w3):
    x, y, z = (normalize(p, w) for w in (w1, w2, w3))
    assert multiply(multiply(x, y), z) == multiply(x, multiply(y, z))
    assert multiply(multiply(x, y), z) == normalize(p, list(w1) + list(w2) + list(w3))


@settings(max_examples=100, deadline=None)
@given(group, letters)
def test_json_roundtrip(p, word):
    g = normalize(p, word)
    assert BsElement.from_json(p, g.to_json()) == g
    assert BsParams.from_json(p.to_json()) == p


def test_from_json_rejects_non_normal_form():
    p = make_params(2, 3)
    with pytest.raises(ValidationError):
        BsElement.from_json(p, {"syllables": [["5", 1]], "tail": "0"})


def test_big_exponents_do_not_overflow():
    p = make_params(2, 3)
    g = normalize(p, [("t", -40), ("a", 3 ** 40), ("t", 40)])
    assert subgroup_membership(g, "a") == 2 ** 40
