import pytest
from hypothesis import given, strategies as st

from separoid.errors import UnknownVariable
from separoid.universe import (
    ComplementarityDecl,
    ReductionRegistry,
    Universe,
    VarSet,
    approx_equal,
    canonicalize,
    is_reduction,
    join,
    statement,
    well_formed,
)

from conftest import ci, vs


@pytest.fixture
def uni():
    return Universe.of(stochastic=["X", "Y", "Z", "W", "V"], decision=["Th", "Ph", "K"])


def test_canonicalize_sorts_and_dedupes(uni):
    s = statement(uni, ["Y", "X"], ["Z", "Z"], [])
    out = canonicalize(uni, s)
    assert out.left.names == ("X", "Y")
    assert out.right.names == ("Z",)
    assert out.cond.names == ()


def test_canonicalize_idempotent(uni):
    s = statement(uni, ["X", "Y"], ["Th"], ["Z"])
    assert canonicalize(uni, canonicalize(uni, s)) == canonicalize(uni, s)


def test_canonicalize_unknown_variable(uni):
    with pytest.raises(UnknownVariable):
        statement(uni, ["X"], ["Q"], [])
    bad = ci(["X", "Th"], ["Z"])  # decision name in a stochastic field
    with pytest.raises(UnknownVariable):
        canonicalize(uni, bad)


def test_join_examples():
    a, b = vs(["X"], ["Th"]), vs(["Y"])
    assert join(a, b) == vs(["X", "Y"], ["Th"])
    assert join(a, a) == a
    assert join(a, b) == join(b, a)


names_st = st.sets(st.sampled_from(["X", "Y", "Z", "W"]))
dec_st = st.sets(st.sampled_from(["Th", "Ph"]))
varset_st = st.builds(lambda s, d: vs(s, d), names_st, dec_st)


@given(varset_st, varset_st, varset_st)
def test_join_is_semilattice(a, b, c):
    assert join(a, join(b, c)) == join(join(a, b), c)
    assert join(a, b) == join(b, a)
    assert join(a, a) == a


def test_is_reduction_examples(uni):
    reg = ReductionRegistry(uni)
    assert is_reduction(vs(["X"]), vs(["X"]), reg)
    reg.register("W", "Y")
    assert is_reduction(vs(["W"]), vs(["Y", "Z"]), reg)
    reg.register("V", "W")
    assert is_reduction(vs(["V"]), vs(["Y"]), reg)  # transitive closure
    assert not is_reduction(vs(["Z"]), vs(["Y"]), reg)


@given(st.lists(st.tuples(st.sampled_from("XYZWV"), st.sampled_from("XYZWV")), max_size=8),
       st.sets(st.sampled_from("XYZWV")), st.sets(st.sampled_from("XYZWV")),
       st.sets(st.sampled_from("XYZWV")))
def test_is_reduction_quasiorder(pairs, a, b, c):
    reg = ReductionRegistry()
    for child, parent in pairs:
        reg.register(child, parent)
    A, B, C = vs(a), vs(b), vs(c)
    assert is_reduction(A, A, reg)  # reflexive
    if is_reduction(A, B, reg) and is_reduction(B, C, reg):
        assert is_reduction(A, C, reg)  # transitive


def test_reduction_refuses_kind_mixing(uni):
    reg = ReductionRegistry(uni)
    with pytest.raises(ValueError):
        reg.register("Th", "X")
    with pytest.raises(ValueError):
        reg.register("X", "Th")


def test_well_formed_examples():
    comp = ComplementarityDecl.of(["Th", "Ph"], ["K", "Th", "Ph"])
    good = ci(["X"], ["Y"], ["Z"], rdec=["Th"], cdec=["Ph"])
    assert well_formed(good, comp)
    missing = ci(["X"], ["Y"], ["Z"], rdec=["Th"])
    assert not well_formed(missing, comp)  # {Th} alone is not declared
    general = ci(["X"], ["Y"], ["Z"], ldec=["K"], rdec=["Th"], cdec=["Ph"])
    assert well_formed(general, comp, general=True)
    assert not well_formed(general, comp)  # decision name on the left needs the flag


def test_approx_equal_uses_mutual_reduction(uni):
    reg = ReductionRegistry(uni)
    reg.register("W", "Y")
    reg.register("Y", "W")
    assert approx_equal(vs(["W"]), vs(["Y"]), reg)
    assert not approx_equal(vs(["W"]), vs(["Z"]), reg)
    assert approx_equal(vs(["X"]), vs(["X"]))


def test_universe_rejects_duplicate_kind_change():
    u = Universe.of(stochastic=["X"])
    with pytest.raises(ValueError):
        u.declare("X", "decision")
