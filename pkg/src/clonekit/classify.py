"""The ten-class decision procedure for clones with a quasi Mal'cev
polymorphism on at most three elements, together with the stored class order
and the machine-checked separation tables."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .catalog import standard_relation, standard_structure
from .closure import derive_all, replay_derivation
from .conditions import MinorCondition, builtin_condition
from .core import Relation, Structure, preserves
from .errors import ArgumentError, OutOfScopeError, VerificationError
from .search import (
    CoreExtension,
    PolymorphismProblem,
    idempotent_extension,
    satisfies_condition,
)


class ClassLabel(enum.Enum):
    T = "T"
    I2 = "I2"
    C2 = "C2"
    Z2 = "Z2"
    C3 = "C3"
    M1 = "M1"
    M0 = "M0"
    D = "D"
    L2 = "L2"
    Z3 = "Z3"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


REPRESENTATIVES: dict[ClassLabel, str] = {
    ClassLabel.T: "Ttop",
    ClassLabel.I2: "I2",
    ClassLabel.C2: "C2rep",
    ClassLabel.Z2: "Z2",
    ClassLabel.C3: "C3",
    ClassLabel.M1: "M1",
    ClassLabel.M0: "M0",
    ClassLabel.D: "D",
    ClassLabel.L2: "L2",
    ClassLabel.Z3: "Z3",
}


def class_representative(label: ClassLabel) -> Structure:
    return standard_structure(REPRESENTATIVES[label])


# ---------------------------------------------------------------------------
# invariance of a single relation under the polymorphism clone


def _bare_symbol(arity: int) -> MinorCondition:
    return MinorCondition((("f", arity),), ())


def relation_invariant(
    structure: Structure, rel: Relation
) -> tuple[bool, tuple | None]:
    """Is the relation preserved by every polymorphism of the structure?

    A small-budget derivation of the relation from the structure's own
    relations settles the question positively at once; otherwise one
    complete search decides it: a violating operation exists iff one of
    arity |rel| maps the member-tuple matrix outside the relation.  Returns
    the witness (arity, table) when a violator is found.
    """
    if rel.domain != structure.domain:
        raise ArgumentError("relation lives on a different domain than the structure")
    members = rel.tuples()
    if not members:
        return True, None
    non_members = [t for t in Relation.full(rel.domain, rel.arity).tuples() if t not in rel]
    if not non_members:
        return True, None
    derivations, _ = derive_all(
        structure, [rel], aux_budget=2, ops_budget=50_000, max_relations=2_000
    )
    if derivations[0] is not None:
        replayed = replay_derivation(derivations[0].steps, structure, domain=rel.domain)
        if replayed != rel:
            raise VerificationError("derivation replay does not reproduce the relation")
        return True, None
    m = len(members)
    prob = PolymorphismProblem(structure.domain, _bare_symbol(m))
    for _, r in structure.relations:
        prob.add_preservation("f", r)
    rows = [tuple(t[i] for t in members) for i in range(rel.arity)]
    prob.add_matrix_constraint("f", rows, non_members)
    res = prob.solve(mode="first")
    if not res.solutions:
        return True, None
    op = prob.witnesses(res.solutions[0])["f"]
    image = tuple(op(*row) for row in rows)
    if image in rel:
        raise VerificationError("violating operation does not violate on re-check")
    for _, r in structure.relations:
        if not preserves(op, r):
            raise VerificationError("violating operation fails preservation re-check")
    return False, (m, tuple(int(v) for v in op.table))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class TestOutcome:
    """One recorded test: a condition search or an invariance check."""

    name: str
    outcome: bool
    witness: tuple | None = None


@dataclass(frozen=True)
class ClassificationCertificate:
    core: Structure
    relabeling: tuple[int, ...]
    branch: str  # "1" | "2a" | "2b" | "2c"
    tests: tuple[TestOutcome, ...]

    def outcome(self, name: str) -> bool:
        for t in self.tests:
            if t.name == name:
                return t.outcome
        raise ArgumentError(f"certificate records no test named {name!r}")


def replay_certificate(cert: ClassificationCertificate) -> ClassLabel:
    """Walk the decision tree using only the recorded outcomes."""
    size = cert.core.domain.size
    if size == 1:
        return ClassLabel.T
    if size == 2:
        if not cert.outcome("quasi-majority"):
            return ClassLabel.Z2
        return ClassLabel.C2 if cert.outcome("preserves-neq") else ClassLabel.I2
    if cert.branch == "2a":
        if not cert.outcome("quasi-minority"):
            return ClassLabel.Z3
        if not cert.outcome("quasi-majority"):
            return ClassLabel.L2
        return ClassLabel.C3 if cert.outcome("cyc2") else ClassLabel.D
    if cert.branch == "2c":
        return ClassLabel.Z2
    if cert.branch == "2b":
        simple = not cert.outcome("has-proper-congruence")
        if simple or not cert.outcome("preserves-psi2"):
            return ClassLabel.I2 if cert.outcome("cyc2") else ClassLabel.C2
        if not cert.outcome("preserves-rho2"):
            return ClassLabel.M1
        return ClassLabel.M0
    raise ArgumentError(f"certificate has unknown branch {cert.branch!r}")


# ---------------------------------------------------------------------------
# the decision procedure


def _cond_test(structure: Structure, name: str) -> TestOutcome:
    out = satisfies_condition(structure, builtin_condition(name))
    witness = None
    if out.found:
        witness = tuple(
            (sym, op.arity, tuple(int(v) for v in op.table))
            for sym, op in sorted(out.witness.items())
        )
    return TestOutcome(name, out.found, witness)


def _invariance_test(structure: Structure, name: str, rel: Relation) -> TestOutcome:
    ok, witness = relation_invariant(structure, rel)
    return TestOutcome(name, ok, witness)


_MU_BLOCKS = {
    # nontrivial congruence candidates: the element left out of the 2-block,
    # and the relabeling that moves the 2-element block onto {0, 1}
    "mu0": (0, (2, 0, 1)),
    "mu1": (1, (0, 2, 1)),
    "mu2": (2, (0, 1, 2)),
}


def classify(structure: Structure) -> tuple[ClassLabel, ClassificationCertificate]:
    """The unique label whose minor-equivalence class contains the
    polymorphism clone of the structure."""
    if structure.domain.size > 3:
        raise ArgumentError(
            f"classification covers domains of size <= 3, got {structure.domain.size}"
        )
    qm = satisfies_condition(structure, builtin_condition("quasi-malcev"))
    if not qm.found:
        raise OutOfScopeError(
            "the structure has no quasi Mal'cev polymorphism; "
            "the ten-class theorem does not apply"
        )
    ce: CoreExtension = idempotent_extension(structure)
    core, ext = ce.core, ce.extended
    size = core.domain.size
    tests: list[TestOutcome] = [
        TestOutcome(
            "quasi-malcev",
            True,
            tuple(
                (sym, op.arity, tuple(int(v) for v in op.table))
                for sym, op in sorted(qm.witness.items())
            ),
        )
    ]
    relabeling = tuple(range(size))

    if size == 1:
        cert = ClassificationCertificate(core, relabeling, "1", tuple(tests))
        return ClassLabel.T, cert

    if size == 2:
        maj = _cond_test(ext, "quasi-majority")
        tests.append(maj)
        if not maj.outcome:
            label = ClassLabel.Z2
        else:
            neq = Relation.from_tuples(core.domain, 2, [(0, 1), (1, 0)])
            inv = _invariance_test(ext, "preserves-neq", neq)
            tests.append(inv)
            label = ClassLabel.C2 if inv.outcome else ClassLabel.I2
        cert = ClassificationCertificate(core, relabeling, "1", tuple(tests))
        return label, cert

    # three-element core: first decide whether some order-3 permutation graph
    # is invariant (the paper fixes one labeling; the tool checks both cycles)
    phi = standard_relation("phi")
    phi_inv = standard_relation("phi^-1")
    t_fwd = _invariance_test(ext, "preserves-phi", phi)
    t_bwd = _invariance_test(ext, "preserves-phi-inverse", phi_inv)
    tests += [t_fwd, t_bwd]
    selfdual = t_fwd.outcome or t_bwd.outcome

    if selfdual:
        branch = "2a"
        qmin = _cond_test(ext, "quasi-minority")
        tests.append(qmin)
        if not qmin.outcome:
            cyc2 = _cond_test(ext, "cyc2")
            tests.append(cyc2)
            if not cyc2.outcome:
                raise VerificationError(
                    "self-dual branch without quasi-minority must be 2-cyclic"
                )
            label = ClassLabel.Z3
        else:
            qmaj = _cond_test(ext, "quasi-majority")
            tests.append(qmaj)
            if not qmaj.outcome:
                cyc2 = _cond_test(ext, "cyc2")
                tests.append(cyc2)
                if cyc2.outcome:
                    raise VerificationError(
                        "self-dual branch with quasi-minority, no quasi-majority "
                        "must not be 2-cyclic"
                    )
                label = ClassLabel.L2
            else:
                cyc2 = _cond_test(ext, "cyc2")
                tests.append(cyc2)
                label = ClassLabel.C3 if cyc2.outcome else ClassLabel.D
        cert = ClassificationCertificate(core, relabeling, branch, tuple(tests))
        return label, cert

    qmaj = _cond_test(ext, "quasi-majority")
    tests.append(qmaj)
    if not qmaj.outcome:
        cert = ClassificationCertificate(core, relabeling, "2c", tuple(tests))
        return ClassLabel.Z2, cert

    branch = "2b"
    invariant_mus = []
    for mu_name, (left_out, perm) in sorted(_MU_BLOCKS.items()):
        t = _invariance_test(ext, f"preserves-{mu_name}", standard_relation(mu_name))
        tests.append(t)
        if t.outcome:
            invariant_mus.append((mu_name, left_out, perm))
    tests.append(
        TestOutcome("has-proper-congruence", bool(invariant_mus), None)
    )
    if len(invariant_mus) > 1:
        raise VerificationError(
            "more than one proper congruence is invariant; the monolith "
            f"is not unique: {[n for n, _, _ in invariant_mus]}"
        )

    if not invariant_mus:
        cyc2 = _cond_test(ext, "cyc2")
        tests.append(cyc2)
        label = ClassLabel.I2 if cyc2.outcome else ClassLabel.C2
        cert = ClassificationCertificate(core, relabeling, branch, tuple(tests))
        return label, cert

    _, _, relabeling = invariant_mus[0]
    relabeled = ext.relabeled(relabeling)
    psi2 = _invariance_test(relabeled, "preserves-psi2", standard_relation("psi2"))
    tests.append(psi2)
    if not psi2.outcome:
        cyc2 = _cond_test(ext, "cyc2")
        tests.append(cyc2)
        label = ClassLabel.I2 if cyc2.outcome else ClassLabel.C2
    else:
        rho2 = _invariance_test(relabeled, "preserves-rho2", standard_relation("rho2"))
        tests.append(rho2)
        label = ClassLabel.M1 if not rho2.outcome else ClassLabel.M0
    cert = ClassificationCertificate(core, relabeling, branch, tuple(tests))
    return label, cert


# ---------------------------------------------------------------------------
# the class order


# upward edges of the Hasse diagram: lower class -> immediately larger class
HASSE_EDGES: tuple[tuple[ClassLabel, ClassLabel], ...] = (
    (ClassLabel.Z3, ClassLabel.C3),
    (ClassLabel.L2, ClassLabel.Z2),
    (ClassLabel.L2, ClassLabel.D),
    (ClassLabel.Z2, ClassLabel.M0),
    (ClassLabel.M0, ClassLabel.M1),
    (ClassLabel.M1, ClassLabel.C2),
    (ClassLabel.D, ClassLabel.C2),
    (ClassLabel.D, ClassLabel.C3),
    (ClassLabel.C2, ClassLabel.I2),
    (ClassLabel.C3, ClassLabel.I2),
    (ClassLabel.I2, ClassLabel.T),
)


def _leq_table() -> dict[tuple[ClassLabel, ClassLabel], bool]:
    leq = {(a, b): a is b for a in ClassLabel for b in ClassLabel}
    for a, b in HASSE_EDGES:
        leq[(a, b)] = True
    changed = True
    while changed:
        changed = False
        for a in ClassLabel:
            for b in ClassLabel:
                if leq[(a, b)]:
                    continue
                if any(leq[(a, c)] and leq[(c, b)] for c in ClassLabel):
                    leq[(a, b)] = True
                    changed = True
    return leq


_LEQ = _leq_table()


def class_leq(a: ClassLabel, b: ClassLabel) -> bool:
    return _LEQ[(a, b)]


def class_order(a: ClassLabel, b: ClassLabel) -> str:
    """'leq', 'geq', 'equal', or 'incomparable' per the stored Hasse data."""
    down, up = _LEQ[(a, b)], _LEQ[(b, a)]
    if down and up:
        return "equal"
    if down:
        return "leq"
    if up:
        return "geq"
    return "incomparable"


# ---------------------------------------------------------------------------
# the separation tables


_MAIN_ROWS = (
    ClassLabel.Z3, ClassLabel.L2, ClassLabel.Z2, ClassLabel.M0, ClassLabel.M1,
    ClassLabel.D, ClassLabel.C2, ClassLabel.C3, ClassLabel.I2, ClassLabel.T,
)
_MAIN_COLS = _MAIN_ROWS[:-1]

# row satisfies the condition, column refutes it
_MAIN_CELLS: dict[tuple[ClassLabel, ClassLabel], str] = {}


def _fill_main() -> None:
    rows = {
        ClassLabel.Z3: ("", "cyc2", "cyc2", "cyc2", "cyc2", "cyc2", "cyc2", "", ""),
        ClassLabel.L2: ("quasi-minority", "", "", "", "", "", "", "", ""),
        ClassLabel.Z2: ("quasi-minority", "cyc3", "", "", "", "cyc3", "", "cyc3", ""),
        ClassLabel.M0: ("quasi-minority", "cyc3", "quasi-majority", "", "", "cyc3", "", "cyc3", ""),
        ClassLabel.M1: ("quasi-minority", "cyc3", "quasi-majority", "sigma2", "", "cyc3", "", "cyc3", ""),
        ClassLabel.D: ("quasi-minority", "quasi-majority", "quasi-majority", "sigma1", "sigma1", "", "", "", ""),
        ClassLabel.C2: ("quasi-minority", "cyc3", "quasi-majority", "sigma1", "sigma1", "cyc3", "", "cyc3", ""),
        ClassLabel.C3: ("quasi-minority", "quasi-majority", "quasi-majority", "cyc2", "cyc2", "cyc2", "cyc2", "", ""),
        ClassLabel.I2: ("quasi-minority", "cyc3", "quasi-majority", "cyc2", "cyc2", "cyc2", "cyc2", "cyc3", ""),
        ClassLabel.T: ("quasi-minority", "cyc3", "quasi-majority", "cyc2", "cyc2", "cyc2", "cyc2", "cyc3", "dependence"),
    }
    for row, entries in rows.items():
        for col, cond in zip(_MAIN_COLS, entries):
            if cond:
                _MAIN_CELLS[(row, col)] = cond


_fill_main()

_SELFDUAL_ROWS = (ClassLabel.Z3, ClassLabel.L2, ClassLabel.D, ClassLabel.C3)
_SELFDUAL_COLS = (ClassLabel.Z3, ClassLabel.L2, ClassLabel.D)

_SELFDUAL_CELLS: dict[tuple[ClassLabel, ClassLabel], str] = {
    (ClassLabel.Z3, ClassLabel.L2): "cyc2",
    (ClassLabel.Z3, ClassLabel.D): "cyc2",
    (ClassLabel.L2, ClassLabel.Z3): "quasi-minority",
    (ClassLabel.D, ClassLabel.Z3): "quasi-minority",
    (ClassLabel.D, ClassLabel.L2): "quasi-majority",
    (ClassLabel.C3, ClassLabel.Z3): "quasi-minority",
    (ClassLabel.C3, ClassLabel.L2): "quasi-majority",
    (ClassLabel.C3, ClassLabel.D): "cyc2",
}


@dataclass(frozen=True)
class CellCheck:
    row: ClassLabel
    col: ClassLabel
    condition: str
    witness: tuple  # (symbol, arity, table) entries for the row's witness
    refutation_nodes: int


@dataclass(frozen=True)
class SeparationTable:
    figure: str
    rows: tuple[ClassLabel, ...]
    cols: tuple[ClassLabel, ...]
    cells: dict[tuple[ClassLabel, ClassLabel], str]
    checks: tuple[CellCheck, ...]


def separation_table(figure: str = "main") -> SeparationTable:
    """Verify every nonempty cell of one of the two separation figures:
    the row's representative satisfies the condition, the column's refutes
    it by complete search."""
    if figure == "main":
        rows, cols, cells = _MAIN_ROWS, _MAIN_COLS, _MAIN_CELLS
    elif figure == "selfdual":
        rows, cols, cells = _SELFDUAL_ROWS, _SELFDUAL_COLS, _SELFDUAL_CELLS
    else:
        raise ArgumentError(f"unknown figure {figure!r}; use 'main' or 'selfdual'")
    checks: list[CellCheck] = []
    for (row, col), cond_name in sorted(cells.items(), key=lambda kv: str(kv[0])):
        cond = builtin_condition(cond_name)
        sat = satisfies_condition(class_representative(row), cond)
        if not sat.found:
            raise VerificationError(
                f"row {row} does not satisfy {cond_name} (cell ({row}, {col}))"
            )
        ref = satisfies_condition(class_representative(col), cond)
        if ref.found:
            raise VerificationError(
                f"column {col} unexpectedly satisfies {cond_name} "
                f"(cell ({row}, {col})); witness exists"
            )
        witness = tuple(
            (sym, op.arity, tuple(int(v) for v in op.table))
            for sym, op in sorted(sat.witness.items())
        )
        checks.append(CellCheck(row, col, cond_name, witness, ref.nodes))
    return SeparationTable(figure, rows, cols, dict(cells), tuple(checks))


def check_order_consistency() -> None:
    """The stored order and the separation figures must agree: a nonempty
    cell (a, b) forbids a <= b, and a blank off-diagonal cell demands it."""
    for rows, cols, cells in (
        (_MAIN_ROWS, _MAIN_COLS, _MAIN_CELLS),
        (_SELFDUAL_ROWS, _SELFDUAL_COLS, _SELFDUAL_CELLS),
    ):
        for a in rows:
            for b in cols:
                if a is b:
                    if (a, b) in cells:
                        raise VerificationError(f"diagonal cell ({a}, {b}) not empty")
                    continue
                filled = (a, b) in cells
                if filled and class_leq(a, b):
                    raise VerificationError(
                        f"cell ({a}, {b}) = {cells[(a, b)]} contradicts {a} <= {b}"
                    )
                if not filled and not class_leq(a, b):
                    raise VerificationError(
                        f"blank cell ({a}, {b}) but the stored order has "
                        f"{a} !<= {b}"
                    )
