"""Minor conditions: term syntax, validation, and the builtin library."""

import pytest

from clonekit.conditions import (
    Identity,
    MinorCondition,
    Term,
    app,
    builtin_condition,
    var,
)
from clonekit.errors import ArgumentError, LookupKeyError


class TestTerms:
    def test_var_and_app(self):
        assert var(3) == Term(None, (3,))
        assert app("f", 0, 1) == Term("f", (0, 1))

    def test_bare_term_has_one_variable(self):
        with pytest.raises(ArgumentError):
            Term(None, (0, 1))

    def test_negative_variable_rejected(self):
        with pytest.raises(ArgumentError):
            app("f", -1)

    def test_identity_variables(self):
        ident = Identity(app("f", 0, 2), var(1))
        assert ident.variables() == (0, 1, 2)


class TestConditionValidation:
    def test_duplicate_symbols(self):
        with pytest.raises(ArgumentError, match="duplicate"):
            MinorCondition((("f", 2), ("f", 3)), ())

    def test_zero_arity(self):
        with pytest.raises(ArgumentError, match="arity"):
            MinorCondition((("f", 0),), ())

    def test_undeclared_symbol_in_identity(self):
        with pytest.raises(ArgumentError, match="undeclared"):
            MinorCondition(
                (("f", 2),), (Identity(app("g", 0, 1), var(0)),)
            )

    def test_arity_mismatch_in_identity(self):
        with pytest.raises(ArgumentError, match="arity"):
            MinorCondition((("f", 2),), (Identity(app("f", 0), var(0)),))

    def test_arity_of(self):
        cond = MinorCondition((("f", 2), ("g", 4)), ())
        assert cond.arity_of("g") == 4
        with pytest.raises(ArgumentError):
            cond.arity_of("h")


class TestBuiltins:
    @pytest.mark.parametrize(
        "name,nsyms,nidents",
        [
            ("malcev", 1, 2),
            ("quasi-malcev", 1, 2),
            ("majority", 1, 3),
            ("quasi-majority", 1, 3),
            ("minority", 1, 3),
            ("quasi-minority", 1, 3),
            ("sigma1", 1, 4),
            ("sigma2", 1, 3),
            ("dependence", 1, 1),
        ],
    )
    def test_shapes(self, name, nsyms, nidents):
        cond = builtin_condition(name)
        assert len(cond.symbols) == nsyms
        assert len(cond.identities) == nidents

    def test_malcev_has_bare_sides(self):
        cond = builtin_condition("malcev")
        assert all(i.rhs.symbol is None for i in cond.identities)

    def test_quasi_malcev_has_no_bare_sides(self):
        cond = builtin_condition("quasi-malcev")
        for i in cond.identities:
            assert i.lhs.symbol is not None and i.rhs.symbol is not None

    def test_cyclic_family(self):
        c3 = builtin_condition("cyc3")
        assert c3.symbols == (("c", 3),)
        (ident,) = c3.identities
        assert ident.lhs.args == (0, 1, 2) and ident.rhs.args == (1, 2, 0)
        with pytest.raises(ArgumentError):
            builtin_condition("cyc1")

    def test_symmetric_family(self):
        s2 = builtin_condition("sym-2")
        assert len(s2.identities) == 1
        s4 = builtin_condition("sym-4")
        assert len(s4.identities) == 2

    def test_sigma2_is_symmetric_plus_block_shift(self):
        cond = builtin_condition("sigma2")
        assert cond.arity_of("f") == 5
        last = cond.identities[-1]
        assert last.lhs.args == (0, 0, 1, 1, 2)
        assert last.rhs.args == (0, 1, 1, 2, 2)

    def test_unknown_name(self):
        with pytest.raises(LookupKeyError):
            builtin_condition("nope")
        with pytest.raises(LookupKeyError):
            builtin_condition("cycx")
