import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecplastic.errors import IndexBeyondSupport, ProfileFormatError
from lecplastic.profile import (
    INFINITE,
    Atom,
    GeometricSequence,
    TauCertificate,
    FailureWitness,
    FailureKind,
    enumerate_axis,
    find_tau,
    iter_axes,
    locate,
    loads_profile,
    parse_rational,
    position_of,
    profile_to_dict,
    profile_from_dict,
    validate_profile,
)
from lecplastic import oracle

from conftest import TWO_ATOMS, atom, dec, inc, profile, valid_profiles


# -- rational grammar -------------------------------------------------------


@pytest.mark.parametrize("text, value", [
    ("3/2", F(3, 2)), ("1", F(1)), ("-4/6", F(-2, 3)), ("+7", F(7)), ("0", F(0)),
])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1.5", " 1", "1/0", "a", "", "1/-2", "3//2", 3])
def test_parse_rational_rejects(text):
    with pytest.raises(ProfileFormatError):
        parse_rational(text)


# -- file format ------------------------------------------------------------


def test_json_round_trip():
    p = profile(atom(2, 2), dec(1, F(1, 2), F(1, 2)), atom(F(1, 3), INFINITE))
    assert profile_from_dict(json.loads(json.dumps(profile_to_dict(p)))).components == p.components


@pytest.mark.parametrize("doc", [
    "{not json",
    '{"name": "x"}',
    '{"name": "x", "components": []}',
    '{"name": "x", "components": [], "extra": 1}',
    '{"name": "x", "components": [{"kind": "atom", "value": "1"}]}',
    '{"name": "x", "components": [{"kind": "atom", "value": "1", "multiplicity": 1, "colour": 2}]}',
    '{"name": "x", "components": [{"kind": "atom", "value": "1", "multiplicity": 0}]}',
    '{"name": "x", "components": [{"kind": "atom", "value": "1", "multiplicity": true}]}',
    '{"name": "x", "components": [{"kind": "atom", "value": "1", "multiplicity": "many"}]}',
    '{"name": "x", "components": [{"kind": "blob"}]}',
    '{"name": "x", "components": [{"kind": "sequence", "limit": "1", "direction": "up", '
    '"gap": "1", "ratio": "1/2"}]}',
])
def test_malformed_profiles(doc):
    with pytest.raises(ProfileFormatError):
        loads_profile(doc)


# -- validation -------------------------------------------------------------


def test_validate_examples():
    assert validate_profile(TWO_ATOMS).ok
    assert validate_profile(profile(atom(1))).ok
    res = validate_profile(profile(atom(F(3, 2)), dec(1, F(1, 2), F(1, 2))))
    assert res.code == "COLLISION" and res.components == (0, 1)
    assert "3/2" in res.message


@pytest.mark.parametrize("p, code", [
    (profile(atom(0)), "NONPOSITIVE_VALUE"),
    (profile(atom(-1)), "NONPOSITIVE_VALUE"),
    (profile(dec(0, 1, F(1, 2))), "NONPOSITIVE_VALUE"),
    (profile(dec(1, 0, F(1, 2))), "NONPOSITIVE_VALUE"),
    (profile(dec(1, 1, 1)), "BAD_RATIO"),
    (profile(dec(1, 1, 0)), "BAD_RATIO"),
    (profile(inc(1, 1, F(1, 2))), "NEGATIVE_START"),
    (profile(atom(1), atom(1, INFINITE)), "COLLISION"),
    (profile(inc(2, F(1, 2), F(1, 2)), dec(1, F(1, 2), F(1, 2))), "COLLISION"),  # both hit 3/2
])
def test_validate_rejects(p, code):
    assert validate_profile(p).code == code


def test_limit_is_not_a_value():
    assert validate_profile(profile(atom(1, INFINITE), dec(1, 1, F(1, 2)), inc(1, F(1, 2), F(1, 2)))).ok


def _brute_force_meeting(a, b, terms=80):
    va = {a.term(k) for k in range(1, terms)}
    return any(b.term(k) in va for k in range(1, terms))


@pytest.mark.parametrize("a, b", [
    # same limit and direction, ratios multiplicatively dependent: 4^-i = 2^-(j+3)
    (dec(1, 1, F(1, 4)), dec(1, F(1, 8), F(1, 2))),
    # dependent, with no solution: 3 * 4^-i = 2^-j
    (dec(1, 3, F(1, 4)), dec(1, 1, F(1, 2))),
    # independent ratios: (1/2)^2 = (27/4) (1/3)^3
    (inc(8, 1, F(1, 2)), inc(8, F(27, 4), F(1, 3))),
    (inc(8, 1, F(1, 2)), inc(8, F(27, 5), F(1, 3))),
    # same shape, shifted start: identical tails
    (dec(2, F(1, 2), F(1, 2)), dec(2, F(1, 8), F(1, 2))),
    # ratios 4/9 and 2/3 are dependent; 16/81 = (2/3)^4
    (dec(1, 1, F(4, 9)), dec(1, F(16, 81), F(2, 3))),
    # different limits
    (dec(1, F(1, 4), F(1, 2)), inc(F(3, 2), F(1, 4), F(1, 2))),
    (dec(1, F(1, 4), F(1, 2)), inc(F(3, 2), F(1, 5), F(1, 3))),
    (dec(1, 1, F(1, 2)), dec(F(3, 2), F(1, 2), F(1, 2))),
    (dec(F(1, 2), F(1, 4), F(1, 2)), dec(1, F(1, 4), F(1, 3))),
])
def test_sequence_collisions_match_brute_force(a, b):
    expected = _brute_force_meeting(a, b)
    got = validate_profile(profile(a, b)).code == "COLLISION"
    assert got == expected


@settings(max_examples=300)
@given(
    st.sampled_from([F(1), F(3, 2)]),
    st.sampled_from([F(1), F(1, 2), F(1, 3), F(3, 4), F(2, 9), F(1, 8), F(5, 12)]),
    st.sampled_from([F(1), F(1, 2), F(1, 3), F(3, 4), F(2, 9), F(1, 8), F(5, 12)]),
    st.sampled_from([F(1, 2), F(1, 4), F(1, 8), F(1, 3), F(1, 9), F(2, 3), F(4, 9), F(1, 6)]),
    st.sampled_from([F(1, 2), F(1, 4), F(1, 8), F(1, 3), F(1, 9), F(2, 3), F(4, 9), F(1, 6)]),
    st.booleans(),
)
def test_same_limit_collisions_match_brute_force(limit, ga, gb, ra, rb, decreasing):
    make = dec if decreasing else inc
    a, b = make(limit + 2, ga, ra), make(limit + 2, gb, rb)
    # every solution of ga ra^i = gb rb^j with these small primes has i, j < 60
    expected = _brute_force_meeting(a, b, terms=60)
    assert (validate_profile(profile(a, b)).code == "COLLISION") == expected


def test_index_of():
    s = dec(1, F(1, 2), F(1, 2))
    assert [s.index_of(v) for v in (F(3, 2), F(5, 4), F(9, 8), F(1), F(7, 4), F(11, 10))] == \
        [1, 2, 3, None, None, None]


# -- enumeration ------------------------------------------------------------


def test_enumerate_examples():
    assert [enumerate_axis(TWO_ATOMS, n) for n in range(4)] == [1, F(1, 2), 1, F(1, 2)]
    p = profile(atom(2, 2), dec(1, F(1, 2), F(1, 2)))
    assert [enumerate_axis(p, n) for n in range(5)] == [2, F(3, 2), 2, F(5, 4), F(9, 8)]
    with pytest.raises(IndexBeyondSupport):
        enumerate_axis(profile(atom(1)), 1)


def _naive_round_robin(p, rounds):
    out = []
    for j in range(rounds):
        for i, c in enumerate(p.components):
            if isinstance(c, Atom):
                if c.multiplicity == INFINITE or j < c.multiplicity:
                    out.append((c.value, i, j))
            else:
                out.append((c.term(j + 1), i, j))
    return out


@settings(max_examples=60, deadline=None)
@given(valid_profiles())
def test_enumerate_matches_naive_simulation(p):
    expected = _naive_round_robin(p, 100)
    for n, (value, comp, occ) in enumerate(expected):
        assert locate(p, n) == (comp, occ)
        assert position_of(p, comp, occ) == n
        assert enumerate_axis(p, n) == value
    streamed = []
    for item in iter_axes(p):
        if len(streamed) == len(expected):
            break
        streamed.append(item)
    assert streamed == expected


def test_finite_profile_support():
    p = profile(atom(1, 3), atom(2, 1))
    assert [enumerate_axis(p, n) for n in range(4)] == [1, 2, 1, 1]
    with pytest.raises(IndexBeyondSupport):
        enumerate_axis(p, 4)


# -- threshold --------------------------------------------------------------


def test_find_tau_examples():
    f = find_tau(TWO_ATOMS)
    assert isinstance(f, FailureWitness) and f.kind is FailureKind.TWO_INFINITE_ATOMS
    assert (f.r, f.R) == (F(1, 2), 1)

    cert = find_tau(profile(atom(1, INFINITE), dec(1, 1, F(1, 2)), inc(1, F(1, 2), F(1, 2))))
    assert isinstance(cert, TauCertificate) and cert.tau == 1 and cert.has_infinite_atom

    p = profile(inc(2, F(1, 2), F(1, 2)), dec(1, F(1, 4), F(1, 2)))
    f = find_tau(p)
    assert f.kind is FailureKind.INC_LIMIT_ABOVE_DEC_LIMIT and (f.r, f.R) == (1, 2)
    assert oracle.decide_by_tau_enumeration(p).value == "not_plastic"


@pytest.mark.parametrize("p, tau", [
    (profile(atom(3), atom(1), atom(2)), F(1)),
    (profile(dec(2, 1, F(1, 2)), atom(1)), F(2)),
    (profile(inc(2, 1, F(1, 2)), dec(3, 1, F(1, 2))), F(2)),
    (profile(inc(2, 1, F(1, 2)), atom(5, INFINITE), dec(5, 1, F(1, 2))), F(5)),
])
def test_tau_precedence(p, tau):
    assert find_tau(p).tau == tau


@settings(max_examples=200, deadline=None)
@given(valid_profiles())
def test_tau_side_constraints(p):
    cert = find_tau(p)
    if not isinstance(cert, TauCertificate):
        return
    for value, comp, _ in _naive_round_robin(p, 30):
        c = p.components[comp]
        if value > cert.tau:
            assert comp in cert.a_plus_components
            assert (isinstance(c, Atom) and not c.is_infinite) or \
                (isinstance(c, GeometricSequence) and c.decreasing)
        elif value < cert.tau:
            assert comp in cert.a_minus_components
            assert (isinstance(c, Atom) and not c.is_infinite) or \
                (isinstance(c, GeometricSequence) and not c.decreasing)
    for c in p.components:
        if isinstance(c, GeometricSequence):
            assert (c.limit >= cert.tau) if c.decreasing else (c.limit <= cert.tau)
