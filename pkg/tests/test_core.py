"""Relations, operations, minors, and preservation on small domains."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clonekit.core import (
    Domain,
    Operation,
    Partition,
    Relation,
    Structure,
    all_tuples,
    compose,
    constant,
    decode,
    encode,
    has_parallelogram,
    is_congruence,
    preserves,
    projection,
    take_minor,
)
from clonekit.errors import ArgumentError


def op3(fn, arity=3):
    return Operation.from_callable(3, arity, fn)


MINORITY2 = Operation.from_callable(2, 3, lambda x, y, z: x ^ y ^ z)
AFFINE3 = Operation.from_callable(3, 3, lambda x, y, z: (x - y + z) % 3)


class TestEncoding:
    def test_encode_decode_roundtrip(self):
        for size in (2, 3, 4):
            for arity in (1, 2, 3):
                for tup in itertools.product(range(size), repeat=arity):
                    assert decode(encode(tup, size), arity, size) == tup

    def test_encode_is_big_endian(self):
        # leftmost coordinate is the most significant digit
        assert encode((1, 0), 3) == 3
        assert encode((0, 1), 3) == 1
        assert encode((2, 1, 0), 3) == 2 * 9 + 1 * 3

    def test_all_tuples_order_matches_encode(self):
        tups = all_tuples(2, 3)
        for i, row in enumerate(tups):
            assert encode(tuple(row), 3) == i


class TestOperation:
    def test_call_matches_callable(self):
        f = AFFINE3
        for t in itertools.product(range(3), repeat=3):
            assert f(*t) == (t[0] - t[1] + t[2]) % 3

    def test_table_validation(self):
        with pytest.raises(ArgumentError):
            Operation.from_table(3, 2, [0] * 8)  # wrong length
        with pytest.raises(ArgumentError):
            Operation.from_table(3, 1, [0, 1, 3])  # value out of range
        with pytest.raises(ArgumentError):
            Operation.from_table(3, 0, [])

    def test_table_is_immutable(self):
        f = projection(3, 2, 0)
        with pytest.raises(ValueError):
            f.table[0] = 1

    def test_equality_and_hash(self):
        f = op3(lambda x, y, z: (x - y + z) % 3)
        g = Operation.from_table(3, 3, f.table)
        assert f == g and hash(f) == hash(g)
        assert f != projection(3, 3, 0)

    def test_graph(self):
        f = projection(3, 1, 0)
        assert sorted(f.graph().tuples()) == [(0, 0), (1, 1), (2, 2)]
        g = AFFINE3.graph()
        assert g.arity == 4 and len(g) == 27
        assert all((x - y + z) % 3 == w for (x, y, z, w) in g.tuples())

    def test_is_idempotent(self):
        assert AFFINE3.is_idempotent()
        assert projection(3, 2, 1).is_idempotent()
        assert not constant(3, 2, arity=2).is_idempotent()

    def test_projection_values(self):
        p = projection(3, 3, 1)
        for t in itertools.product(range(3), repeat=3):
            assert p(*t) == t[1]


class TestMinorsAndComposition:
    def test_identity_minor(self):
        f = AFFINE3
        assert take_minor(f, [0, 1, 2]) == f

    def test_argument_permutation(self):
        f = op3(lambda x, y, z: (x + 2 * y) % 3)
        g = take_minor(f, [1, 0, 2])
        for t in itertools.product(range(3), repeat=3):
            assert g(*t) == f(t[1], t[0], t[2])

    def test_diagonal_identification(self):
        # x ^ y ^ z with y = z collapses to first projection
        m = take_minor(MINORITY2, [0, 1, 1])
        assert m.arity == 2
        assert m == projection(2, 2, 0)

    def test_padding_arity(self):
        f = projection(3, 1, 0)
        g = take_minor(f, [2], arity=4)
        assert g.arity == 4
        assert g == projection(3, 4, 2)

    def test_sigma_validation(self):
        with pytest.raises(ArgumentError):
            take_minor(AFFINE3, [0, 1])
        with pytest.raises(ArgumentError):
            take_minor(AFFINE3, [0, 1, 3], arity=3)

    def test_compose_matches_pointwise(self):
        f = AFFINE3
        gs = [projection(3, 2, 0), projection(3, 2, 1), constant(3, 1, arity=2)]
        h = compose(f, gs)
        for t in itertools.product(range(3), repeat=2):
            assert h(*t) == f(t[0], t[1], 1)

    def test_compose_with_projections_is_minor(self):
        f = AFFINE3
        sigma = [1, 0, 1]
        h = compose(f, [projection(3, 2, s) for s in sigma])
        assert h == take_minor(f, sigma, arity=2)


class TestRelation:
    def test_from_tuples_and_contains(self):
        r = Relation.from_tuples(3, 2, [(0, 1), (1, 2)])
        assert (0, 1) in r and (1, 2) in r and (2, 0) not in r
        assert len(r) == 2

    def test_tuples_sorted_lexicographically(self):
        r = Relation.from_tuples(3, 2, [(2, 0), (0, 1), (1, 2)])
        assert r.tuples() == [(0, 1), (1, 2), (2, 0)]

    def test_equality_relation(self):
        eq = Relation.equality(3)
        assert sorted(eq.tuples()) == [(0, 0), (1, 1), (2, 2)]

    def test_full_empty(self):
        assert len(Relation.full(3, 2)) == 9
        assert Relation.empty(3, 2).is_empty()
        assert Relation.full(3, 2).is_full()

    def test_intersect_complement(self):
        r = Relation.from_tuples(3, 1, [(0,), (1,)])
        s = Relation.from_tuples(3, 1, [(1,), (2,)])
        assert r.intersect(s).tuples() == [(1,)]
        assert sorted(r.complement().tuples()) == [(2,)]

    def test_permuted(self):
        r = Relation.from_tuples(3, 3, [(0, 1, 2)])
        # coordinate i of the result reads coordinate perm[i] of the original
        q = r.permuted([2, 0, 1])
        assert q.tuples() == [(2, 0, 1)]

    def test_projected(self):
        r = Relation.from_tuples(3, 3, [(0, 1, 2), (0, 2, 2), (1, 1, 0)])
        p = r.projected([0, 2])
        assert sorted(p.tuples()) == [(0, 2), (1, 0)]
        # projection may also reorder
        q = r.projected([2, 0])
        assert sorted(q.tuples()) == [(0, 1), (2, 0)]

    def test_identified(self):
        r = Relation.from_tuples(3, 3, [(0, 0, 1), (0, 1, 2), (2, 2, 2)])
        d = r.identified(0, 1)
        assert sorted(d.tuples()) == [(0, 1), (2, 2)]

    def test_product(self):
        r = Relation.from_tuples(3, 1, [(0,), (1,)])
        s = Relation.from_tuples(3, 1, [(2,)])
        assert sorted(r.product(s).tuples()) == [(0, 2), (1, 2)]

    def test_relabeled(self):
        r = Relation.from_tuples(3, 2, [(0, 1), (1, 2)])
        q = r.relabeled((1, 2, 0))
        assert sorted(q.tuples()) == [(1, 2), (2, 0)]

    def test_validation(self):
        with pytest.raises(ArgumentError):
            Relation.from_tuples(3, 2, [(0, 3)])
        with pytest.raises(ArgumentError):
            Relation.from_tuples(3, 2, [(0,)])
        with pytest.raises(ArgumentError):
            Relation.from_tuples(3, 2, [(0, 1)]).projected([0, 0])


class TestPreservation:
    def test_projection_preserves_everything(self):
        rels = [
            Relation.from_tuples(3, 2, [(0, 1), (1, 2), (2, 0)]),
            Relation.from_tuples(3, 3, [(0, 0, 0), (1, 2, 0)]),
            Relation.empty(3, 2),
            Relation.full(3, 2),
        ]
        for r in rels:
            assert preserves(projection(3, 3, 1), r)

    def test_affine_preserves_affine_graph(self):
        plus = Relation.from_tuples(
            3, 3, [t for t in itertools.product(range(3), repeat=3)
                   if (t[0] + t[1]) % 3 == t[2]]
        )
        assert preserves(AFFINE3, plus)

    def test_violation_detected(self):
        # max(x,y) does not preserve the graph of negation on {0,1}
        neg = Relation.from_tuples(2, 2, [(0, 1), (1, 0)])
        mx = Operation.from_callable(2, 2, lambda x, y: max(x, y))
        assert not preserves(mx, neg)
        assert preserves(MINORITY2, neg)

    def test_unary_preservation_is_closure_under_op(self):
        sub = Relation.from_tuples(3, 1, [(0,), (1,)])
        f = Operation.from_callable(3, 1, lambda x: (x + 1) % 3)
        assert not preserves(f, sub)
        g = Operation.from_callable(3, 1, lambda x: 1 if x == 0 else x)
        assert preserves(g, sub)


class TestPartition:
    def test_from_blocks_and_back(self):
        p = Partition.from_blocks(3, [(0, 2), (1,)])
        assert p.num_blocks == 2
        assert sorted(tuple(sorted(b)) for b in p.blocks()) == [(0, 2), (1,)]

    def test_as_relation_is_equivalence(self):
        p = Partition.from_blocks(3, [(0, 2), (1,)])
        r = p.as_relation()
        assert sorted(r.tuples()) == [(0, 0), (0, 2), (1, 1), (2, 0), (2, 2)]

    def test_refines(self):
        bottom = Partition.from_blocks(3, [(0,), (1,), (2,)])
        top = Partition.from_blocks(3, [(0, 1, 2)])
        mid = Partition.from_blocks(3, [(0, 2), (1,)])
        assert bottom.refines(mid) and mid.refines(top)
        assert not top.refines(mid)
        assert bottom.is_discrete() and top.is_all()

    def test_is_congruence(self):
        p = Partition.from_blocks(3, [(0, 1), (2,)])
        f = Operation.from_callable(3, 1, lambda x: 0 if x < 2 else 2)
        g = Operation.from_callable(3, 1, lambda x: (x + 1) % 3)
        assert is_congruence(p, [f])
        assert not is_congruence(p, [g])


class TestStructure:
    def test_make_and_get(self):
        r = Relation.from_tuples(3, 2, [(0, 1)])
        s = Structure.make(3, [("edge", r)])
        assert s.get("edge") == r
        assert s.names == ("edge",)

    def test_extended(self):
        r = Relation.from_tuples(3, 2, [(0, 1)])
        s = Structure.make(3, [("edge", r)])
        t = s.extended(("loop", Relation.equality(3)))
        assert set(t.names) == {"edge", "loop"}
        assert s.names == ("edge",)

    def test_relabeled_acts_on_all_relations(self):
        r = Relation.from_tuples(3, 2, [(0, 1)])
        s = Structure.make(3, [("edge", r)]).relabeled((1, 0, 2))
        assert s.get("edge").tuples() == [(1, 0)]

    def test_restricted(self):
        r = Relation.from_tuples(3, 2, [(0, 1), (1, 2), (0, 2)])
        s = Structure.make(3, [("edge", r)])
        sub, emb = s.restricted([0, 2])
        assert sub.domain.size == 2
        assert sub.get("edge").tuples() == [(emb[0], emb[2])]


class TestParallelogram:
    def test_affine_graph_has_it(self):
        plus = Relation.from_tuples(
            3, 3, [t for t in itertools.product(range(3), repeat=3)
                   if (t[0] + t[1]) % 3 == t[2]]
        )
        assert has_parallelogram(plus)

    def test_generic_relation_lacks_it(self):
        r = Relation.from_tuples(3, 2, [(0, 0), (0, 1), (1, 0), (2, 2)])
        assert not has_parallelogram(r)


# --- property tests ------------------------------------------------------

tables3_2 = st.lists(st.integers(0, 2), min_size=9, max_size=9)
tables3_3 = st.lists(st.integers(0, 2), min_size=27, max_size=27)
perm3 = st.permutations(range(3))
tuple_sets = st.sets(
    st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=9
)


@settings(max_examples=60, deadline=None)
@given(tables3_3, st.permutations(range(3)))
def test_minor_of_minor_composes(table, sig):
    f = Operation.from_table(3, 3, table)
    sig = list(sig)
    g = take_minor(f, sig)
    h = take_minor(g, [1, 0, 2])
    tau = [0] * 3
    for i, v in enumerate(sig):
        tau[i] = [1, 0, 2][v]
    assert h == take_minor(f, tau)


@settings(max_examples=60, deadline=None)
@given(tables3_2, tuple_sets, perm3)
def test_preservation_is_relabeling_invariant(table, tups, perm):
    f = Operation.from_table(3, 2, table)
    r = Relation.from_tuples(3, 2, list(tups))
    # conjugate the operation by the relabeling
    inv = [0] * 3
    for i, v in enumerate(perm):
        inv[v] = i
    conj = Operation.from_callable(3, 2, lambda x, y: perm[f(inv[x], inv[y])])
    assert preserves(f, r) == preserves(conj, r.relabeled(perm))


@settings(max_examples=60, deadline=None)
@given(tuple_sets, perm3)
def test_relabel_roundtrip(tups, perm):
    r = Relation.from_tuples(3, 2, list(tups))
    inv = [0] * 3
    for i, v in enumerate(perm):
        inv[v] = i
    assert r.relabeled(perm).relabeled(inv) == r


@settings(max_examples=40, deadline=None)
@given(tables3_2)
def test_graph_membership_matches_calls(table):
    f = Operation.from_table(3, 2, table)
    g = f.graph()
    for x, y in itertools.product(range(3), repeat=2):
        assert (x, y, f(x, y)) in g
    assert len(g) == 9
