from fractions import Fraction as F

import pytest
from hypothesis import strategies as st

from lecplastic.cli import read_profile
from lecplastic.profile import INFINITE, Atom, Direction, GeometricSequence, SemiAxisProfile, validate_profile


def atom(v, m=1):
    return Atom(F(v), m)


def dec(limit, gap, ratio):
    return GeometricSequence(F(limit), Direction.DECREASING, F(gap), F(ratio))


def inc(limit, gap, ratio):
    return GeometricSequence(F(limit), Direction.INCREASING, F(gap), F(ratio))


def profile(*components, name="test"):
    return SemiAxisProfile(name, components)


TWO_ATOMS = profile(atom(1, INFINITE), atom(F(1, 2), INFINITE), name="two-atoms")
INC2_DEC1 = profile(inc(2, F(1, 2), F(1, 2)), dec(1, F(1, 4), F(1, 2)), name="inc2-dec1")
ATOM1_INC2 = profile(atom(1, INFINITE), inc(2, F(1, 2), F(1, 2)), name="atom1-inc2")


@pytest.fixture(params=["two-atoms", "inc2-dec1", "atom1-inc2"])
def not_plastic_bundled(request):
    return read_profile(f"bundled:{request.param}")


_values = st.sampled_from([F(1, 2), F(1), F(3, 2), F(2), F(5, 2)])
_atoms = st.builds(Atom, _values, st.sampled_from([1, 2, 3, INFINITE]))
_seqs = st.builds(
    GeometricSequence,
    _values,
    st.sampled_from(list(Direction)),
    st.sampled_from([F(1, 4), F(1, 5), F(1, 7)]),
    st.sampled_from([F(1, 2), F(1, 3), F(2, 3)]),
)
components = st.one_of(_atoms, _seqs)


@st.composite
def valid_profiles(draw, max_components=4):
    comps = draw(st.lists(components, min_size=1, max_size=max_components))
    p = SemiAxisProfile("h", tuple(comps))
    from hypothesis import assume

    assume(validate_profile(p).ok)
    return p
