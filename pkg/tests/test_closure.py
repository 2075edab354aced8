"""Pp-definability: derivations replay exactly, refutations re-verify."""

import itertools

import pytest

from clonekit.catalog import standard_relation, standard_structure
from clonekit.closure import (
    Derivation,
    check_refutation,
    derive_all,
    find_violation,
    pp_closure,
    pp_definable,
    replay_derivation,
    verify_derivation,
)
from clonekit.core import Operation, Relation, Structure, preserves
from clonekit.errors import ArgumentError, InputFormatError, VerificationError


def rel3(arity, tups):
    return Relation.from_tuples(3, arity, tups)


LEQ = Relation.from_tuples(2, 2, [(0, 0), (0, 1), (1, 1)])
NEQ = Relation.from_tuples(2, 2, [(0, 1), (1, 0)])


class TestReplay:
    def test_premise_and_permute(self):
        d = Derivation((("premise", "phi"), ("permute", 0, (1, 0))))
        out = d.replay([("phi", standard_relation("phi"))])
        assert out == standard_relation("phi^-1")

    def test_product_then_project_is_identity(self):
        phi = standard_relation("phi")
        d = Derivation((
            ("premise", "phi"),
            ("full", 1),
            ("product", 0, 1),
            ("project", 2, (0, 1)),
        ))
        assert d.replay([("phi", phi)]) == phi

    def test_intersect(self):
        d = Derivation((
            ("premise", "a"),
            ("premise", "b"),
            ("intersect", 0, 1),
        ))
        a = rel3(2, [(0, 1), (1, 2), (2, 2)])
        b = rel3(2, [(1, 2), (0, 0)])
        assert d.replay([("a", a), ("b", b)]) == a.intersect(b)

    def test_equality_and_identify(self):
        d = Derivation((
            ("premise", "r"),
            ("identify", 0, 0, 1),
        ))
        r = rel3(2, [(0, 0), (1, 2), (2, 2)])
        assert d.replay([("r", r)]).tuples() == [(0,), (2,)]

    def test_unknown_premise(self):
        d = Derivation((("premise", "ghost"),))
        with pytest.raises(InputFormatError, match="ghost"):
            d.replay([("r", LEQ)])

    def test_forward_reference_rejected(self):
        with pytest.raises(InputFormatError, match="not earlier"):
            replay_derivation((("permute", 1, (0, 1)), ("equality",)), [], 3)

    def test_verify_derivation_detects_mismatch(self):
        d = Derivation((("premise", "r"),))
        with pytest.raises(VerificationError):
            verify_derivation(d, [("r", LEQ)], NEQ, 2)


class TestPpClosure:
    def test_contains_premises_equality_and_projections(self):
        phi = standard_relation("phi")
        res = pp_closure([("phi", phi)], max_arity=2, aux_budget=1)
        assert phi in res
        assert Relation.equality(3) in res
        assert phi.projected([0]) in res
        assert not res.budget_limited

    def test_all_derivations_replay(self):
        mu2 = standard_relation("mu2")
        named = [("mu2", mu2)]
        res = pp_closure(named, max_arity=2, aux_budget=1)
        for rel in res:
            assert res.derivations[rel].replay(named) == rel

    def test_monotone_in_budget(self):
        named = [("tau0", standard_relation("tau0"))]
        small = pp_closure(named, max_arity=2, aux_budget=0)
        big = pp_closure(named, max_arity=2, aux_budget=2)
        assert set(small.relations) <= set(big.relations)

    def test_budget_truncation_is_flagged(self):
        named = [("T", standard_relation("T"))]
        res = pp_closure(named, max_arity=4, aux_budget=2, ops_budget=200)
        assert res.budget_limited

    def test_composition_of_graphs_is_derivable(self):
        # phi o phi = phi^-1 for the 3-cycle
        phi = standard_relation("phi")
        res = pp_closure([("phi", phi)], max_arity=2, aux_budget=1)
        assert standard_relation("phi^-1") in res


class TestFindViolation:
    def test_none_when_preserved(self):
        f = Operation.from_callable(2, 3, lambda x, y, z: x ^ y ^ z)
        assert find_violation(f, NEQ) is None

    def test_matrix_when_violated(self):
        mx = Operation.from_callable(2, 2, lambda x, y: max(x, y))
        matrix = find_violation(mx, NEQ)
        assert matrix is not None
        img = tuple(mx(*[row[j] for row in matrix]) for j in range(2))
        assert img not in NEQ
        for row in matrix:
            assert row in NEQ

    def test_check_refutation_validates(self):
        mx = Operation.from_callable(2, 2, lambda x, y: max(x, y))
        matrix = find_violation(mx, NEQ)
        check_refutation([("leq", LEQ)], NEQ, mx, matrix)
        with pytest.raises(VerificationError):
            # operation violates its own premise list
            check_refutation([("neq", NEQ)], NEQ, mx, matrix)


class TestPpDefinable:
    def test_premise_is_definable_with_one_step(self):
        phi = standard_relation("phi")
        ans = pp_definable([("phi", phi)], phi)
        assert ans.verdict == "definable"
        assert len(ans.proof) == 1

    def test_inverse_graph_definable(self):
        phi = standard_relation("phi")
        ans = pp_definable([("phi", phi)], standard_relation("phi^-1"))
        assert ans.verdict == "definable"
        assert ans.proof.replay([("phi", phi)]) == standard_relation("phi^-1")

    def test_neq_from_leq_is_not_definable(self):
        ans = pp_definable([("leq", LEQ)], NEQ)
        assert ans.verdict == "not-definable"
        op, matrix = ans.refutation
        assert preserves(op, LEQ) and not preserves(op, NEQ)

    def test_mu_from_psi_is_not_definable(self):
        # psi2 admits the transposition (0 1) as a symmetry, mu2 does too,
        # but a constant-to-2... use a refutation search to decide
        ans = pp_definable([("psi2", standard_relation("psi2"))],
                           standard_relation("mu2"))
        assert ans.verdict in ("definable", "not-definable")
        if ans.verdict == "not-definable":
            op, _ = ans.refutation
            assert preserves(op, standard_relation("psi2"))
            assert not preserves(op, standard_relation("mu2"))

    def test_structure_accepted_as_premises(self):
        m0 = standard_structure("M0")
        ans = pp_definable(m0, standard_relation("psi2"))
        assert ans.verdict == "definable"

    def test_arity_cap_on_targets(self):
        with pytest.raises(ArgumentError, match="arity 4"):
            pp_definable([("r", LEQ)], Relation.full(2, 5))

    def test_certificates_beat_budgets(self):
        # with tiny budgets the answer may degrade to unknown, but a
        # certificate, when produced, must still verify
        phi = standard_relation("phi")
        ans = pp_definable([("phi", phi)], standard_relation("phi^-1"),
                           aux_budget=0, ops_budget=50, matrix_budget=10)
        assert ans.verdict in ("definable", "unknown")
        if ans.verdict == "unknown":
            assert any("budget" in n or "exhausted" in n for n in ans.notes)


class TestDeriveAll:
    def test_batch_matches_singletons(self):
        phi = standard_relation("phi")
        named = [("phi", phi)]
        targets = [standard_relation("phi^-1"), phi.projected([0])]
        proofs, truncated = derive_all(named, targets, aux_budget=1,
                                       ops_budget=500_000, max_relations=2000)
        assert not truncated
        for proof, target in zip(proofs, targets):
            assert proof is not None
            assert proof.replay(named) == target

    def test_unreachable_target_is_none(self):
        proofs, _ = derive_all([("leq", LEQ)], [NEQ], aux_budget=1,
                               ops_budget=100_000, max_relations=1000)
        assert proofs == [None]
