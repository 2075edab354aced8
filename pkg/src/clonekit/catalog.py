"""Catalog of the standard relations, structures and operations on {0,1,2}
that the rest of the package builds on.

Binary relations come in named families: ``mu<i>`` (the equivalence with
blocks {i} and the rest), ``rho<i>`` (its complement), ``psi<i>`` (graph of
the transposition fixing i), ``psi<i>'`` (the same graph restricted off i),
``phi`` (graph of the cycle 0->1->2->0) with ``phi^-1``, ``phi<j>'`` (the six
partial bijections between distinct 2-element subsets that are restrictions
of the cycle or its compositions) with inverses ``phi<j>'^-1``, and
``tau0``/``tau1`` (graphs of the two collapse maps onto {0,1} with kernel
mu2).  The 4-ary family holds the affine graph ``T`` of x-y+z mod 3, the
glued-minority graphs ``T<i>`` / ``T<i>'``, and the quotient-minority graph
``Tmu`` (parametrized by a 2-block partition, defaulting to mu2); ``S01``
and friends are the ternary mixed relations.  Unary subsets are ``u0``,
``u01``, ``u012``, etc.

All lookups are by exact key; unknown keys raise LookupKeyError.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping

from .core import Domain, Operation, Partition, Relation, Structure
from .errors import ArgumentError, LookupKeyError

DOM3 = Domain(3)
DOM2 = Domain(2)


def _graph_of_map(pairs: Iterable[tuple[int, int]]) -> Relation:
    return Relation.from_tuples(DOM3, 2, list(pairs))


def boolean_minority(x: int, y: int, z: int) -> int:
    """The odd-one-out on arguments taking at most two distinct values."""
    if x == y:
        return z
    if x == z:
        return y
    if y == z:
        return x
    raise ArgumentError(f"arguments {(x, y, z)} take three distinct values")


def _mu(i: int) -> Relation:
    others = [x for x in range(3) if x != i]
    pairs = [(i, i)] + [(a, b) for a in others for b in others]
    return _graph_of_map(pairs)


def _rho(i: int) -> Relation:
    return _mu(i).complement()


def _psi(i: int) -> Relation:
    a, b = [x for x in range(3) if x != i]
    return _graph_of_map([(i, i), (a, b), (b, a)])


def _psi_prime(i: int) -> Relation:
    a, b = [x for x in range(3) if x != i]
    return _graph_of_map([(a, b), (b, a)])


_PHI = _graph_of_map([(0, 1), (1, 2), (2, 0)])
_PHI_INV = _PHI.permuted([1, 0])

_PHI_PRIME = {
    0: _graph_of_map([(1, 2), (2, 0)]),
    1: _graph_of_map([(0, 1), (2, 0)]),
    2: _graph_of_map([(0, 1), (1, 2)]),
    3: _graph_of_map([(1, 2), (0, 0)]),
    4: _graph_of_map([(0, 2), (1, 1)]),
    5: _graph_of_map([(0, 1), (2, 2)]),
}

_TAU0 = _graph_of_map([(0, 0), (1, 0), (2, 1)])
_TAU1 = _graph_of_map([(0, 1), (1, 1), (2, 0)])


def _affine_graph() -> Relation:
    tuples = [
        (x, y, z, (x - y + z) % 3) for x in range(3) for y in range(3) for z in range(3)
    ]
    return Relation.from_tuples(DOM3, 4, tuples)


def _t_prime(i: int) -> Relation:
    others = [x for x in range(3) if x != i]
    tuples = [
        (x, y, z, boolean_minority(x, y, z))
        for x in others
        for y in others
        for z in others
    ]
    return Relation.from_tuples(DOM3, 4, tuples)


def _t_glued(i: int) -> Relation:
    base = _t_prime(i)
    return Relation.from_tuples(DOM3, 4, base.tuples() + [(i, i, i, i)])


def t_mu(partition: Partition | None = None) -> Relation:
    """The graph of quotient minority: (x,y,z,u) with u's block equal to the
    Boolean minority of the blocks of x, y, z.  Needs a 2-block partition."""
    if partition is None:
        partition = Partition.from_blocks(DOM3, [[0, 1], [2]])
    if partition.num_blocks != 2:
        raise ArgumentError(
            f"quotient minority needs a 2-block partition, got {partition.num_blocks} blocks"
        )
    b = partition.block_of
    s = partition.domain.size
    tuples = [
        (x, y, z, u)
        for x in range(s)
        for y in range(s)
        for z in range(s)
        for u in range(s)
        if b[u] == b[x] ^ b[y] ^ b[z]
    ]
    return Relation.from_tuples(partition.domain, 4, tuples)


def _s_mixed(a: int, b: int) -> Relation:
    if a == b or not (0 <= a < 3 and 0 <= b < 3):
        raise ArgumentError(f"S needs two distinct elements of {{0,1,2}}, got {a},{b}")
    c = 3 - a - b
    tuples = [(a, a, a), (a, a, b), (b, b, a), (b, b, b), (a, b, c), (b, a, c)]
    return Relation.from_tuples(DOM3, 3, tuples)


def _subset_rel(elems: Iterable[int], domain: Domain = DOM3) -> Relation:
    return Relation.from_tuples(domain, 1, [(e,) for e in elems])


def _build_relations() -> dict[str, Relation]:
    rels: dict[str, Relation] = {}
    for i in range(3):
        rels[f"mu{i}"] = _mu(i)
        rels[f"rho{i}"] = _rho(i)
        rels[f"psi{i}"] = _psi(i)
        rels[f"psi{i}'"] = _psi_prime(i)
    rels["phi"] = _PHI
    rels["phi^-1"] = _PHI_INV
    for j in range(6):
        rels[f"phi{j}'"] = _PHI_PRIME[j]
        rels[f"phi{j}'^-1"] = _PHI_PRIME[j].permuted([1, 0])
    rels["tau0"] = _TAU0
    rels["tau1"] = _TAU1
    rels["T"] = _affine_graph()
    for i in range(3):
        rels[f"T{i}'"] = _t_prime(i)
        rels[f"T{i}"] = _t_glued(i)
        rels[f"Tmu{i}"] = t_mu(Partition.from_blocks(DOM3, [[x for x in range(3) if x != i], [i]]))
    rels["Tmu"] = rels["Tmu2"]
    for a in range(3):
        for b in range(3):
            if a != b:
                rels[f"S{a}{b}"] = _s_mixed(a, b)
    rels["u012"] = _subset_rel([0, 1, 2])
    for i in range(3):
        rels[f"u{i}"] = _subset_rel([i])
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        rels[f"u{a}{b}"] = _subset_rel([a, b])
    return rels


_RELATIONS = _build_relations()


def standard_relation(key: str) -> Relation:
    try:
        return _RELATIONS[key]
    except KeyError:
        raise LookupKeyError(f"unknown relation key {key!r}") from None


def relation_keys() -> tuple[str, ...]:
    return tuple(_RELATIONS)


# ---------------------------------------------------------------------------
# structures


def _struct3(*names: str) -> Structure:
    return Structure(DOM3, tuple((n, standard_relation(n)) for n in names))


def _build_structures() -> dict[str, Structure]:
    neq2 = Relation.from_tuples(DOM2, 2, [(0, 1), (1, 0)])
    or2 = Relation.from_tuples(DOM2, 2, [(0, 1), (1, 0), (1, 1)])
    u2_0 = _subset_rel([0], DOM2)
    u2_1 = _subset_rel([1], DOM2)
    affine2 = Relation.from_tuples(
        DOM2,
        4,
        [
            (x, y, z, x ^ y ^ z)
            for x in range(2)
            for y in range(2)
            for z in range(2)
        ],
    )
    structures = {
        # three-element standard structures
        "M0": _struct3("psi2", "rho2", "u01", "u0", "u1", "u2"),
        "M0'": _struct3("psi2", "rho2", "tau0", "tau1", "u01", "u0", "u1", "u2"),
        "M1": _struct3("psi2", "mu2", "u0", "u1", "u2"),
        "M1'": _struct3("psi2'", "psi2", "mu2", "u01", "u0", "u1", "u2"),
        "M1''": _struct3(
            "psi2", "psi2'", "mu2", "u01", "u12", "u02", "u0", "u1", "u2"
        ),
        "H": _struct3(
            "mu2", "tau0", "tau1", "psi2'", "rho2", "u02", "u12", "u0", "u1", "u2"
        ),
        "H'": _struct3("tau0", "psi2'", "u02", "u12"),
        "C2*": _struct3(
            "psi2",
            "psi0'",
            "psi1'",
            "psi2'",
            "phi0'",
            "phi1'",
            "phi2'",
            "phi3'",
            "phi4'",
            "phi5'",
            "u01",
            "u02",
            "u12",
            "u0",
            "u1",
            "u2",
        ),
        "C2**": _struct3("psi2", "phi2'"),
        # class representatives on {0,1,2}
        "Z3": _struct3("T", "u0", "u1", "u2"),
        "Z2": _struct3("psi2'", "T2'"),
        "C3": _struct3("phi", "u0", "u1", "u2"),
        "D": _struct3("phi", "psi2'", "u0", "u1", "u2"),
        # The two-element-linear representative uses the plain minority graph
        # T2'.  With the (2,2,2,2)-augmented T2 instead, no Mal'cev operation
        # preserves {phi, T2} (exhaustive check over all 3^12 Mal'cev tables),
        # so that variant is not a Mal'cev clone at all; with T2' the clone
        # contains g and all expected inclusions and separations hold.
        "L2": _struct3("phi", "psi2", "T2'"),
        "C2rep": _struct3("psi2'", "u0", "u1", "u2"),
        "I2": _struct3("u0", "u1", "u2"),
        "Ttop": Structure(DOM3, ()),
        # two-element structures
        "C2": Structure(DOM2, (("neq", neq2), ("u0", u2_0), ("u1", u2_1))),
        "B2": Structure(DOM2, (("or2", or2), ("u0", u2_0), ("u1", u2_1))),
        "Z2bool": Structure(DOM2, (("T", affine2), ("u0", u2_0), ("u1", u2_1))),
    }
    return structures


_STRUCTURES = _build_structures()


def standard_structure(key: str) -> Structure:
    try:
        return _STRUCTURES[key]
    except KeyError:
        raise LookupKeyError(f"unknown structure key {key!r}") from None


def structure_keys() -> tuple[str, ...]:
    return tuple(_STRUCTURES)


# ---------------------------------------------------------------------------
# operations


def _d(i: int) -> Operation:
    def fn(x: int, y: int, z: int) -> int:
        return boolean_minority(x, y, z) if len({x, y, z}) <= 2 else i

    return Operation.from_callable(DOM3, 3, fn)


def _g() -> Operation:
    def fn(x: int, y: int, z: int) -> int:
        return boolean_minority(x, y, z) if len({x, y, z}) <= 2 else x

    return Operation.from_callable(DOM3, 3, fn)


def _maj5ext() -> Operation:
    def fn(*xs: int) -> int:
        if all(x in (0, 1) for x in xs):
            return 1 if sum(xs) >= 3 else 0
        return 2

    return Operation.from_callable(DOM3, 5, fn)


def glued_parity(k: int) -> Operation:
    """The (2k+1)-ary operation equal to 2 when an odd number of arguments
    are 2, and otherwise to the mod-2 sum of the non-2 arguments."""
    if k < 1:
        raise ArgumentError(f"parameter k must be >= 1, got {k}")

    def fn(*xs: int) -> int:
        twos = sum(1 for x in xs if x == 2)
        if twos % 2 == 1:
            return 2
        return sum(x for x in xs if x != 2) % 2

    return Operation.from_callable(DOM3, 2 * k + 1, fn)


@lru_cache(maxsize=None)
def builtin_operation(key: str, params: tuple[tuple[str, int], ...] = ()) -> Operation:
    p: Mapping[str, int] = dict(params)
    if key in ("d0", "d1", "d2"):
        return _d(int(key[1]))
    if key == "g":
        return _g()
    if key == "maj5ext":
        return _maj5ext()
    if key == "fk":
        if "k" not in p:
            raise ArgumentError("operation 'fk' needs parameter k")
        return glued_parity(p["k"])
    raise LookupKeyError(f"unknown operation key {key!r}")


def operation_keys() -> tuple[str, ...]:
    return ("d0", "d1", "d2", "g", "maj5ext", "fk")


# ---------------------------------------------------------------------------
# inventory dump (consumed by the CLI's `catalog dump` and golden tests)


def inventory() -> dict:
    rels = {
        key: {"arity": r.arity, "tuples": [list(t) for t in r.tuples()]}
        for key, r in _RELATIONS.items()
    }
    structs = {
        key: {
            "domain": s.domain.size,
            "relations": {n: {"arity": r.arity, "tuples": [list(t) for t in r.tuples()]} for n, r in s.relations},
        }
        for key, s in _STRUCTURES.items()
    }
    ops = {}
    for key in operation_keys():
        if key == "fk":
            ops[key] = {"parametrized": "k", "arity": "2k+1"}
        else:
            f = builtin_operation(key)
            ops[key] = {"arity": f.arity, "table": [int(v) for v in f.table]}
    return {"relations": rels, "structures": structs, "operations": ops}
