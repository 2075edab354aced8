"""The named relation/structure/operation inventory over {0,1,2}."""

import itertools

import pytest

from clonekit.catalog import (
    boolean_minority,
    builtin_operation,
    inventory,
    operation_keys,
    relation_keys,
    standard_relation,
    standard_structure,
    structure_keys,
    t_mu,
)
from clonekit.commutator import is_malcev_op
from clonekit.core import Partition, Relation, preserves
from clonekit.errors import ArgumentError, LookupKeyError


class TestRelationFamilies:
    def test_key_inventory(self):
        keys = relation_keys()
        assert len(keys) == len(set(keys)) == 52
        for i in range(3):
            for stem in ("mu", "rho", "psi"):
                assert f"{stem}{i}" in keys
            assert f"psi{i}'" in keys
            assert f"T{i}" in keys and f"T{i}'" in keys and f"Tmu{i}" in keys
        assert {"phi", "phi^-1", "tau0", "tau1", "T", "Tmu", "u012"} <= set(keys)

    def test_unknown_key(self):
        with pytest.raises(LookupKeyError, match="nope"):
            standard_relation("nope")

    @pytest.mark.parametrize("i", range(3))
    def test_mu_shape(self, i):
        mu = standard_relation(f"mu{i}")
        others = [x for x in range(3) if x != i]
        expect = {(i, i)} | {(a, b) for a in others for b in others}
        assert set(mu.tuples()) == expect

    @pytest.mark.parametrize("i", range(3))
    def test_rho_is_complement_of_mu(self, i):
        mu = standard_relation(f"mu{i}")
        rho = standard_relation(f"rho{i}")
        assert rho == mu.complement()

    @pytest.mark.parametrize("i", range(3))
    def test_psi_is_transposition_graph(self, i):
        psi = standard_relation(f"psi{i}")
        a, b = [x for x in range(3) if x != i]
        assert set(psi.tuples()) == {(i, i), (a, b), (b, a)}
        prime = standard_relation(f"psi{i}'")
        assert set(prime.tuples()) == {(a, b), (b, a)}

    def test_phi_is_a_cyclic_shift(self):
        phi = standard_relation("phi")
        fwd = dict(phi.tuples())
        assert len(fwd) == 3
        assert fwd[fwd[fwd[0]]] == 0 and fwd[0] != 0
        assert standard_relation("phi^-1") == phi.permuted([1, 0])

    def test_phi_primes_are_two_point_partial_bijections(self):
        for j in range(6):
            r = standard_relation(f"phi{j}'")
            assert r.arity == 2 and len(r) == 2
            xs = [t[0] for t in r.tuples()]
            ys = [t[1] for t in r.tuples()]
            assert len(set(xs)) == 2 and len(set(ys)) == 2
            assert standard_relation(f"phi{j}'^-1") == r.permuted([1, 0])

    def test_taus_are_two_valued_map_graphs(self):
        assert set(standard_relation("tau0").tuples()) == {(0, 0), (1, 0), (2, 1)}
        assert set(standard_relation("tau1").tuples()) == {(0, 1), (1, 1), (2, 0)}
        for k in (0, 1):
            fwd = dict(standard_relation(f"tau{k}").tuples())
            assert len(fwd) == 3 and len(set(fwd.values())) == 2

    def test_affine_graph(self):
        T = standard_relation("T")
        assert T.arity == 4 and len(T) == 27
        assert all((x - y + z) % 3 == u for (x, y, z, u) in T.tuples())

    @pytest.mark.parametrize("i", range(3))
    def test_t_prime_is_minority_graph_off_i(self, i):
        r = standard_relation(f"T{i}'")
        others = [x for x in range(3) if x != i]
        expect = {
            (x, y, z, boolean_minority(x, y, z))
            for x in others for y in others for z in others
        }
        assert set(r.tuples()) == expect
        glued = standard_relation(f"T{i}")
        assert set(glued.tuples()) == expect | {(i, i, i, i)}

    @pytest.mark.parametrize("i", range(3))
    def test_tmu_is_blockwise_parity(self, i):
        r = standard_relation(f"Tmu{i}")
        b = [0 if x != i else 1 for x in range(3)]
        assert set(r.tuples()) == {
            t for t in itertools.product(range(3), repeat=4)
            if b[t[3]] == b[t[0]] ^ b[t[1]] ^ b[t[2]]
        }
        assert len(r) == 41

    def test_tmu_alias(self):
        assert standard_relation("Tmu") == standard_relation("Tmu2")

    def test_tmu_rejects_wrong_partition(self):
        with pytest.raises(ArgumentError, match="2-block"):
            t_mu(Partition.from_blocks(3, [(0,), (1,), (2,)]))

    def test_s_relations(self):
        s = standard_relation("S01")
        assert set(s.tuples()) == {
            (0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1), (0, 1, 2), (1, 0, 2)
        }
        for a, b in itertools.permutations(range(3), 2):
            r = standard_relation(f"S{a}{b}")
            assert r.arity == 3 and len(r) == 6

    def test_unary_subsets(self):
        assert standard_relation("u012").is_full()
        for i in range(3):
            assert standard_relation(f"u{i}").tuples() == [(i,)]
        assert standard_relation("u01").tuples() == [(0,), (1,)]


class TestStructures:
    def test_key_inventory(self):
        keys = structure_keys()
        assert {"M0", "M0'", "M1", "M1'", "M1''", "H", "H'", "C2*", "C2**",
                "Z3", "Z2", "C3", "D", "L2", "C2rep", "I2", "Ttop",
                "C2", "B2", "Z2bool"} <= set(keys)

    def test_unknown_key(self):
        with pytest.raises(LookupKeyError):
            standard_structure("nope")

    def test_domains(self):
        assert standard_structure("M0").domain.size == 3
        assert standard_structure("C2").domain.size == 2
        assert standard_structure("Ttop").relations == ()

    def test_named_relations_match_catalog(self):
        m0 = standard_structure("M0")
        for name, rel in m0.relations:
            assert rel == standard_relation(name)

    def test_z3_carries_the_affine_graph(self):
        z3 = standard_structure("Z3")
        assert z3.get("T") == standard_relation("T")


class TestOperations:
    def test_key_inventory(self):
        assert set(operation_keys()) == {"d0", "d1", "d2", "g", "maj5ext", "fk"}
        with pytest.raises(LookupKeyError):
            builtin_operation("nope")

    @pytest.mark.parametrize("key", ["d0", "d1", "d2", "g"])
    def test_displaced_minorities_are_malcev(self, key):
        assert is_malcev_op(builtin_operation(key))

    @pytest.mark.parametrize("i", range(3))
    def test_d_i_values(self, i):
        d = builtin_operation(f"d{i}")
        assert d(0, 1, 2) == i and d(2, 1, 0) == i
        assert d(0, 0, 1) == 1 and d(1, 0, 0) == 1 and d(0, 1, 0) == 1

    def test_g_returns_first_on_rainbows(self):
        g = builtin_operation("g")
        for t in itertools.permutations(range(3)):
            assert g(*t) == t[0]
        assert g(2, 2, 1) == 1

    def test_maj5ext(self):
        f = builtin_operation("maj5ext")
        assert f.arity == 5
        assert f(0, 1, 0, 1, 1) == 1 and f(0, 1, 0, 1, 0) == 0
        assert f(0, 1, 2, 1, 1) == 2

    def test_fk_parity_family(self):
        f = builtin_operation("fk", params=(("k", 1),))
        assert f.arity == 3
        assert f(0, 1, 1) == 0 and f(1, 1, 1) == 1
        assert f(2, 1, 1) == 2 and f(2, 2, 1) == 1
        with pytest.raises(ArgumentError):
            builtin_operation("fk")

    def test_boolean_minority_rejects_rainbow(self):
        with pytest.raises(ArgumentError):
            boolean_minority(0, 1, 2)


class TestGoldenInventory:
    def test_counts(self):
        inv = inventory()
        assert len(inv["relations"]) == 52
        assert len(inv["structures"]) == 20
        assert set(inv["operations"]) == set(operation_keys())

    def test_relation_sizes_frozen(self):
        inv = inventory()
        sizes = {k: len(v["tuples"]) for k, v in inv["relations"].items()}
        assert sizes["T"] == 27 and sizes["Tmu"] == 41
        assert sizes["mu0"] == 5 and sizes["rho0"] == 4
        assert sizes["psi1"] == 3 and sizes["psi1'"] == 2
        assert sizes["T0"] == 9 and sizes["T0'"] == 8
        assert sizes["S12"] == 6 and sizes["u012"] == 3

    def test_inventory_is_deterministic(self):
        assert inventory() == inventory()

    def test_every_structure_relation_has_a_malcev_polymorphism_witness(self):
        # d2 preserves the defining relations of M0 (sanity link between the
        # relation and operation sides of the catalog)
        d2 = builtin_operation("d2")
        m0 = standard_structure("M0")
        for _, rel in m0.relations:
            assert preserves(d2, rel)
