"""The canonical text format: deterministic output, strict parsing."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clonekit.core import Operation, Relation, Structure
from clonekit.errors import InputFormatError
from clonekit.fmt import (
    load_operation,
    load_structure,
    operation_dumps,
    operation_loads,
    structure_dumps,
    structure_loads,
)


def sample_structure():
    return Structure.make(
        3,
        [
            ("edge", Relation.from_tuples(3, 2, [(0, 1), (1, 2)])),
            ("unit", Relation.from_tuples(3, 1, [(2,)])),
        ],
    )


class TestRoundtrip:
    def test_structure(self):
        s = sample_structure()
        assert structure_loads(structure_dumps(s)) == s

    def test_operation(self):
        f = Operation.from_callable(3, 2, lambda x, y: (x + y) % 3)
        assert operation_loads(operation_dumps(f)) == f

    def test_dumps_is_deterministic(self):
        s = sample_structure()
        assert structure_dumps(s) == structure_dumps(structure_loads(structure_dumps(s)))

    def test_tuples_emitted_sorted(self):
        a = Structure.make(3, [("r", Relation.from_tuples(3, 2, [(2, 2), (0, 1)]))])
        b = Structure.make(3, [("r", Relation.from_tuples(3, 2, [(0, 1), (2, 2)]))])
        assert structure_dumps(a) == structure_dumps(b)

    def test_file_roundtrip(self, tmp_path):
        s = sample_structure()
        p = tmp_path / "s.json"
        p.write_text(structure_dumps(s))
        assert load_structure(str(p)) == s
        f = Operation.from_callable(3, 1, lambda x: (x + 1) % 3)
        q = tmp_path / "f.json"
        q.write_text(operation_dumps(f))
        assert load_operation(str(q)) == f


class TestStrictParsing:
    def test_bad_json_reports_position(self):
        with pytest.raises(InputFormatError, match="line 1"):
            structure_loads("{nope")

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ('{"relations": {}}', "missing key 'domain'"),
            ('{"domain": 3}', "missing key 'relations'"),
            ('{"domain": 3, "relations": {}, "x": 1}', "unexpected keys"),
            ('{"domain": "3", "relations": {}}', "expected an integer"),
            ('{"domain": 0, "relations": {}}', "must be >= 1"),
            (
                '{"domain": 3, "relations": {"r": {"arity": 2}}}',
                "missing key 'tuples'",
            ),
            (
                '{"domain": 3, "relations": {"r": {"arity": 2, "tuples": [[0]]}}}',
                "expected 2 entries",
            ),
            (
                '{"domain": 3, "relations": {"r": {"arity": 1, "tuples": [[5]]}}}',
                "outside domain",
            ),
        ],
    )
    def test_structure_errors_name_the_path(self, text, fragment):
        with pytest.raises(InputFormatError, match=fragment):
            structure_loads(text)

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ('{"domain": 3, "arity": 2}', "missing key 'table'"),
            ('{"domain": 3, "arity": 2, "table": [0, 1]}', "expected 9 entries"),
            (
                '{"domain": 2, "arity": 1, "table": [0, 2]}',
                r"table\[1\].*outside domain",
            ),
            ('{"domain": 2, "arity": 1, "table": [0, true]}', "expected an integer"),
        ],
    )
    def test_operation_errors_name_the_path(self, text, fragment):
        with pytest.raises(InputFormatError, match=fragment):
            operation_loads(text)

    def test_booleans_are_not_integers(self):
        with pytest.raises(InputFormatError):
            structure_loads('{"domain": true, "relations": {}}')


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=27, max_size=27))
def test_operation_roundtrip_property(table):
    f = Operation.from_table(3, 3, table)
    assert operation_loads(operation_dumps(f)) == f


@settings(max_examples=40, deadline=None)
@given(
    st.sets(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=0, max_size=9)
)
def test_structure_roundtrip_property(tups):
    s = Structure.make(3, [("r", Relation.from_tuples(3, 2, list(tups)))])
    assert structure_loads(structure_dumps(s)) == s
