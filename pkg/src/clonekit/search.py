"""Backtracking search for operations satisfying minor conditions, and for
homomorphisms between relational structures.

Both problems reduce to a finite CSP with positive table constraints.  The
operation search first collapses table cells along the identity-induced
orbits (cells that every solution must assign equally are a single variable,
and cells equated with a bare variable are pinned to a value), then runs
depth-first search with generalized arc consistency after every assignment.
Branching is deterministic: most-constrained variable first (lowest index on
ties), values in ascending order, so node counts and witnesses are
reproducible across runs and backends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .conditions import Identity, MinorCondition
from .core import (
    Domain,
    Operation,
    Relation,
    Structure,
    all_tuples,
    as_domain,
    preserves,
    tuple_array,
)
from .errors import ArgumentError, CapabilityError

MAX_SEARCH_ARITY = 5
_SCOPE_CHUNK = 1 << 20

try:
    _popcount = int.bit_count  # type: ignore[attr-defined]
except AttributeError:  # pragma: no cover
    def _popcount(x: int) -> int:
        return bin(x).count("1")


@dataclass
class SolveResult:
    status: str  # "found" | "exhausted"
    solutions: list[tuple[int, ...]]
    nodes: int


class TableProblem:
    """CSP over ``nvars`` variables with values in ``range(nvalues)`` and
    positive table constraints.  Domains are bitmasks (nvalues <= 27)."""

    def __init__(self, nvars: int, nvalues: int):
        if nvalues < 1 or nvalues > 27:
            raise ArgumentError(f"value range {nvalues} outside 1..27")
        self.nvars = nvars
        self.nvalues = nvalues
        self.full = (1 << nvalues) - 1
        self.domains = np.full(nvars, self.full, dtype=np.int64)
        self.unsat = False
        self._seen: set[tuple[tuple[int, ...], bytes]] = set()
        self._cons: list[tuple[np.ndarray, np.ndarray]] = []  # (scopes (u,w), rows (m,w))
        self._arrays = None

    # -- construction ------------------------------------------------------

    def restrict(self, v: int, values) -> None:
        m = 0
        for val in values:
            m |= 1 << int(val)
        self.domains[v] &= m
        if self.domains[v] == 0:
            self.unsat = True

    def _compress(self, scope, rows):
        """Drop repeated scope positions, filtering rows for equality there."""
        keep = []
        seen = {}
        sel = np.ones(rows.shape[0], dtype=bool)
        for j, v in enumerate(scope):
            if v in seen:
                sel &= rows[:, j] == rows[:, seen[v]]
            else:
                seen[v] = j
                keep.append(j)
        rows = rows[sel][:, keep]
        return tuple(scope[j] for j in keep), np.unique(rows, axis=0)

    def add_constraint(self, scope, rows) -> None:
        """One constraint: the scope variables must jointly take one of the
        given rows.  Repeated variables in the scope are handled."""
        if self.unsat:
            return
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, len(scope))
        scope, rows = self._compress(tuple(int(v) for v in scope), rows)
        if rows.shape[0] == 0:
            self.unsat = True
            return
        if len(scope) == 1:
            self.restrict(scope[0], rows[:, 0])
            return
        key = (scope, rows.tobytes())
        if key in self._seen:
            return
        self._seen.add(key)
        self._cons.append((np.array(scope, dtype=np.int64)[None, :], rows))
        self._arrays = None

    def add_constraints_bulk(self, scopes: np.ndarray, rows: np.ndarray) -> None:
        """Many constraints sharing one allowed-rows table.

        ``scopes`` is (u, k); rows with repeated variables are grouped by
        repeat pattern so the filtered row tables are shared per pattern.
        """
        if self.unsat or scopes.shape[0] == 0:
            return
        u, k = scopes.shape
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, k)
        # first-occurrence pattern: first[j] = least i with scope[i] == scope[j]
        first = np.empty((u, k), dtype=np.int8)
        for j in range(k):
            fj = np.full(u, j, dtype=np.int8)
            for i in range(j - 1, -1, -1):
                fj = np.where(scopes[:, i] == scopes[:, j], np.int8(i), fj)
            first[:, j] = fj
        patterns, inv = np.unique(first, axis=0, return_inverse=True)
        for p in range(patterns.shape[0]):
            pat = patterns[p]
            keep = [j for j in range(k) if pat[j] == j]
            sel = np.ones(rows.shape[0], dtype=bool)
            for j in range(k):
                if pat[j] != j:
                    sel &= rows[:, j] == rows[:, pat[j]]
            prow = np.unique(rows[sel][:, keep], axis=0)
            pscope = np.unique(scopes[inv == p][:, keep], axis=0)
            if prow.shape[0] == 0:
                self.unsat = True
                return
            if len(keep) == 1:
                m = 0
                for val in prow[:, 0]:
                    m |= 1 << int(val)
                vars_ = np.unique(pscope[:, 0])
                self.domains[vars_] &= m
                if np.any(self.domains[vars_] == 0):
                    self.unsat = True
                    return
                continue
            self._cons.append((pscope, prow))
        self._arrays = None

    # -- solving -----------------------------------------------------------

    def _flatten(self):
        if self._arrays is not None:
            return self._arrays
        scope_parts, tuple_parts = [], []
        off_parts = [np.zeros(1, dtype=np.int64)]
        tuple_off, tuple_cnt = [], []
        s_base = 0
        t_base = 0
        for scopes, rows in self._cons:
            u, w = scopes.shape
            m = rows.shape[0]
            scope_parts.append(scopes.ravel())
            off_parts.append(s_base + np.arange(1, u + 1, dtype=np.int64) * w)
            s_base += u * w
            # all u constraints in this block share one stored row table
            tuple_parts.append(rows.ravel())
            tuple_off.append(np.full(u, t_base, dtype=np.int64))
            tuple_cnt.append(np.full(u, m, dtype=np.int64))
            t_base += m * w
        if scope_parts:
            scopes_flat = np.concatenate(scope_parts)
            scope_off_flat = np.concatenate(off_parts)
            tuples_flat = np.concatenate(tuple_parts)
            tuple_off_flat = np.concatenate(tuple_off)
            tuple_cnt_flat = np.concatenate(tuple_cnt)
        else:
            scopes_flat = np.zeros(0, dtype=np.int64)
            scope_off_flat = np.zeros(1, dtype=np.int64)
            tuples_flat = np.zeros(0, dtype=np.int64)
            tuple_off_flat = np.zeros(0, dtype=np.int64)
            tuple_cnt_flat = np.zeros(0, dtype=np.int64)
        ncons = scope_off_flat.shape[0] - 1
        widths = np.diff(scope_off_flat)
        cid = np.repeat(np.arange(ncons, dtype=np.int64), widths)
        pairs = np.unique(np.stack([scopes_flat, cid], axis=1), axis=0) if ncons else np.zeros((0, 2), dtype=np.int64)
        touch = pairs[:, 1].astype(np.int64)
        counts = np.bincount(pairs[:, 0], minlength=self.nvars) if pairs.size else np.zeros(self.nvars, dtype=np.int64)
        touch_off = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._arrays = (scopes_flat, scope_off_flat, tuples_flat, tuple_off_flat, tuple_cnt_flat, touch, touch_off)
        return self._arrays

    def solve(self, mode: str = "first", cap: int | None = None) -> SolveResult:
        if mode not in ("first", "all"):
            raise ArgumentError(f"solve mode must be 'first' or 'all', got {mode!r}")
        if self.unsat:
            return SolveResult("exhausted", [], 0)
        arrays = self._flatten()
        domains = self.domains.copy()
        nodes = 0
        solutions: list[tuple[int, ...]] = []
        if not kernels.gac_pass(domains, *arrays):
            return SolveResult("exhausted", [], 0)

        def extract(dom: np.ndarray) -> tuple[int, ...]:
            return tuple(int(d).bit_length() - 1 for d in dom)

        def dfs(dom: np.ndarray) -> bool:
            nonlocal nodes
            best, best_count = -1, 1 << 30
            for v in range(self.nvars):
                c = _popcount(int(dom[v]))
                if 1 < c < best_count:
                    best, best_count = v, c
                    if c == 2:
                        break
            if best < 0:
                solutions.append(extract(dom))
                if cap is not None and len(solutions) > cap:
                    raise CapabilityError(
                        f"more than {cap} solutions; raise the cap to enumerate them"
                    )
                return mode == "first"
            mask = int(dom[best])
            for val in range(self.nvalues):
                if not (mask >> val) & 1:
                    continue
                nodes += 1
                nd = dom.copy()
                nd[best] = np.int64(1) << val
                if kernels.gac_pass(nd, *arrays) and dfs(nd):
                    return True
            return False

        dfs(domains)
        status = "found" if solutions else "exhausted"
        return SolveResult(status, solutions, nodes)


# ---------------------------------------------------------------------------
# operation search


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class SearchOutcome:
    status: str  # "found" | "exhausted"
    witness: dict[str, Operation] | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status == "found"


class PolymorphismProblem:
    """Search for an interpretation of a condition's symbols as operations on
    a fixed domain, under preservation and value constraints.

    One CSP variable per orbit of table cells; the orbits are the finest
    partition forced by the identities (cells any solution must assign
    equally), and bare-variable identities pin orbit values outright.
    """

    def __init__(self, domain: Domain | int, condition: MinorCondition,
                 max_arity: int = MAX_SEARCH_ARITY):
        self.domain = as_domain(domain)
        self.condition = condition
        size = self.domain.size
        for name, ar in condition.symbols:
            if ar > max_arity:
                raise CapabilityError(
                    f"symbol {name!r} has arity {ar} > the search cap {max_arity}"
                )
        self._sym_index = {name: i for i, (name, _) in enumerate(condition.symbols)}
        self._offsets = []
        total = 0
        for _, ar in condition.symbols:
            self._offsets.append(total)
            total += size**ar
        self.total_cells = total

        uf = _UnionFind(total)
        pinned: dict[int, int] = {}
        self.structurally_unsat = False
        for ident in condition.identities:
            self._apply_identity(ident, uf, pinned)

        orbit_of = np.empty(total, dtype=np.int64)
        root_to_orbit: dict[int, int] = {}
        for cell in range(total):
            r = uf.find(cell)
            if r not in root_to_orbit:
                root_to_orbit[r] = len(root_to_orbit)
            orbit_of[cell] = root_to_orbit[r]
        self.orbit_of = orbit_of
        self.n_orbits = len(root_to_orbit)

        self.problem = TableProblem(self.n_orbits, size)
        forced: dict[int, int] = {}
        for cell, val in sorted(pinned.items()):
            o = int(orbit_of[cell])
            if forced.setdefault(o, val) != val:
                self.structurally_unsat = True
            self.problem.restrict(o, [val])

    def _apply_identity(self, ident: Identity, uf: _UnionFind, pinned: dict[int, int]) -> None:
        size = self.domain.size
        vs = ident.variables()
        vpos = {v: i for i, v in enumerate(vs)}
        for assignment in all_tuples(len(vs), size):
            sides = []
            for term in (ident.lhs, ident.rhs):
                if term.symbol is None:
                    sides.append(("val", int(assignment[vpos[term.args[0]]])))
                else:
                    si = self._sym_index[term.symbol]
                    idx = 0
                    for a in term.args:
                        idx = idx * size + int(assignment[vpos[a]])
                    sides.append(("cell", self._offsets[si] + idx))
            (ka, va), (kb, vb) = sides
            if ka == "cell" and kb == "cell":
                uf.union(va, vb)
            elif ka == "cell":
                if pinned.setdefault(va, vb) != vb:
                    self.structurally_unsat = True
            elif kb == "cell":
                if pinned.setdefault(vb, va) != va:
                    self.structurally_unsat = True
            elif va != vb:
                self.structurally_unsat = True

    # -- constraint construction -------------------------------------------

    def _cell(self, symbol: str, inputs) -> int:
        si = self._sym_index[symbol]
        _, ar = self.condition.symbols[si]
        if len(inputs) != ar:
            raise ArgumentError(f"symbol {symbol!r} has arity {ar}, got {len(inputs)} inputs")
        size = self.domain.size
        idx = 0
        for v in inputs:
            if not 0 <= int(v) < size:
                raise ArgumentError(f"input value {v} outside domain of size {size}")
            idx = idx * size + int(v)
        return self._offsets[si] + idx

    def add_preservation(self, symbol: str, relation: Relation) -> None:
        """Require the symbol's operation to preserve the relation."""
        if relation.domain != self.domain:
            raise ArgumentError("relation lives on a different domain than the search")
        if self.structurally_unsat:
            return
        si = self._sym_index[symbol]
        _, n = self.condition.symbols[si]
        size = self.domain.size
        tups = tuple_array(relation)
        m, k = tups.shape
        if m == 0:
            return
        combos = m**n
        if combos > (1 << 26):
            raise CapabilityError(
                f"preservation constraint too large: {m} tuples to the power {n}"
            )
        off = self._offsets[si]
        orbit = self.orbit_of
        pieces = []
        for lo in range(0, combos, _SCOPE_CHUNK):
            idx = np.arange(lo, min(lo + _SCOPE_CHUNK, combos), dtype=np.int64)
            # digit a of the combo index, leftmost-major: which member tuple
            # feeds argument a
            digits = [(idx // (m ** (n - 1 - a))) % m for a in range(n)]
            cols = []
            for j in range(k):
                c = np.zeros(idx.shape[0], dtype=np.int64)
                for a in range(n):
                    c = c * size + tups[digits[a], j]
                cols.append(orbit[off + c])
            pieces.append(np.unique(np.stack(cols, axis=1), axis=0))
        scopes = np.unique(np.concatenate(pieces), axis=0) if len(pieces) > 1 else pieces[0]
        self.problem.add_constraints_bulk(scopes, tups)

    def add_value_restriction(self, symbol: str, inputs, allowed) -> None:
        """Restrict the operation's value on one input tuple."""
        cell = self._cell(symbol, inputs)
        self.problem.restrict(int(self.orbit_of[cell]), allowed)

    def add_matrix_constraint(self, symbol: str, rows_matrix, allowed) -> None:
        """Constrain the joint outputs on several input tuples: the vector
        (f(row_1), ..., f(row_k)) must be one of the allowed rows."""
        scope = [int(self.orbit_of[self._cell(symbol, r)]) for r in rows_matrix]
        self.problem.add_constraint(scope, allowed)

    # -- solving -------------------------------------------------------------

    def _operations_from(self, sol: tuple[int, ...]) -> dict[str, Operation]:
        out = {}
        size = self.domain.size
        values = np.array(sol, dtype=np.int8)
        for i, (name, ar) in enumerate(self.condition.symbols):
            lo = self._offsets[i]
            table = values[self.orbit_of[lo:lo + size**ar]]
            out[name] = Operation(self.domain, ar, table)
        return out

    def solve(self, mode: str = "first", cap: int | None = None):
        if self.structurally_unsat:
            return SolveResult("exhausted", [], 0)
        return self.problem.solve(mode=mode, cap=cap)

    def witnesses(self, sol: tuple[int, ...]) -> dict[str, Operation]:
        return self._operations_from(sol)


def _check_witness(ops: dict[str, Operation], structure: Structure,
                   condition: MinorCondition) -> None:
    """Post-hoc soundness check on a found witness; failures are engine bugs."""
    size = structure.domain.size
    for ident in condition.identities:
        vs = ident.variables()
        vpos = {v: i for i, v in enumerate(vs)}
        for assignment in all_tuples(len(vs), size):
            vals = []
            for term in (ident.lhs, ident.rhs):
                if term.symbol is None:
                    vals.append(int(assignment[vpos[term.args[0]]]))
                else:
                    args = [int(assignment[vpos[a]]) for a in term.args]
                    vals.append(ops[term.symbol](*args))
            if vals[0] != vals[1]:
                raise RuntimeError("search returned a witness violating an identity")
    for name, rel in structure.relations:
        for op in ops.values():
            if not preserves(op, rel):
                raise RuntimeError(
                    f"search returned a witness that does not preserve {name!r}"
                )


def search_operation(structure: Structure, condition: MinorCondition,
                     value_constraints=None,
                     max_arity: int = MAX_SEARCH_ARITY) -> SearchOutcome:
    """Find operations on the structure's domain satisfying the condition and
    preserving every relation, or prove none exist.

    ``value_constraints``: optional iterable of (symbol, input-tuple,
    allowed-values) entries pinning individual table cells.
    """
    prob = PolymorphismProblem(structure.domain, condition, max_arity=max_arity)
    for name, _ in condition.symbols:
        for _, rel in structure.relations:
            prob.add_preservation(name, rel)
    if value_constraints:
        for symbol, inputs, allowed in value_constraints:
            prob.add_value_restriction(symbol, inputs, allowed)
    res = prob.solve(mode="first")
    if not res.solutions:
        return SearchOutcome("exhausted", None, res.nodes)
    ops = prob.witnesses(res.solutions[0])
    _check_witness(ops, structure, condition)
    return SearchOutcome("found", ops, res.nodes)


def satisfies_condition(structure: Structure, condition: MinorCondition) -> SearchOutcome:
    """Does the polymorphism clone of the structure satisfy the condition?"""
    return search_operation(structure, condition)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class HomResult:
    status: str  # "found" | "exhausted"
    mapping: tuple[int, ...] | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status == "found"


def _hom_problem(src: Structure, dst: Structure) -> TableProblem:
    prob = TableProblem(src.domain.size, dst.domain.size)
    for name, rs in src.relations:
        rd = dst.get(name)
        if rd.arity != rs.arity:
            raise ArgumentError(
                f"relation {name!r} has arity {rs.arity} in the source "
                f"but {rd.arity} in the target"
            )
        if len(rs) == 0:
            continue
        rows = tuple_array(rd)
        for t in rs.tuples():
            prob.add_constraint(t, rows)
    return prob


def find_homomorphism(src: Structure, dst: Structure) -> HomResult:
    """A homomorphism src -> dst matching relations by name; the source must
    not use names the target lacks."""
    res = _hom_problem(src, dst).solve(mode="first")
    if not res.solutions:
        return HomResult("exhausted", None, res.nodes)
    mapping = res.solutions[0]
    _check_hom(src, dst, mapping)
    return HomResult("found", mapping, res.nodes)


def homomorphisms(src: Structure, dst: Structure, cap: int = 200000) -> list[tuple[int, ...]]:
    """All homomorphisms src -> dst, sorted lexicographically."""
    res = _hom_problem(src, dst).solve(mode="all", cap=cap)
    return sorted(res.solutions)


def _check_hom(src: Structure, dst: Structure, mapping) -> None:
    for name, rs in src.relations:
        rd = dst.get(name)
        for t in rs.tuples():
            if tuple(mapping[v] for v in t) not in rd:
                raise RuntimeError(f"search returned a non-homomorphism at {name!r}")


def endomorphisms(s: Structure, cap: int = 200000) -> list[tuple[int, ...]]:
    return homomorphisms(s, s, cap=cap)


# ---------------------------------------------------------------------------
# cores and idempotent extensions


@dataclass(frozen=True)
class CoreExtension:
    """A core of a structure together with its idempotent extension.

    ``retraction`` maps original elements onto core indices; ``embedding``
    lists, for each core index, the original element it names.
    """

    core: Structure
    extended: Structure
    retraction: tuple[int, ...]
    embedding: tuple[int, ...]


def _map_power(e: tuple[int, ...], k: int) -> tuple[int, ...]:
    result = tuple(range(len(e)))
    base = e
    while k:
        if k & 1:
            result = tuple(base[x] for x in result)
        base = tuple(base[x] for x in base)
        k >>= 1
    return result


def _idempotent_power(e: tuple[int, ...]) -> tuple[int, ...]:
    img = sorted(set(e))
    # e permutes its image (otherwise a smaller-image power would exist,
    # contradicting how e was chosen); raise e to the permutation's order
    pos = {x: i for i, x in enumerate(img)}
    perm = [pos[e[x]] for x in img]
    order = 1
    seen = [False] * len(img)
    for i in range(len(img)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        order = order * length // _gcd(order, length)
    return _map_power(e, order)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def core_of(s: Structure) -> CoreExtension:
    """A core of the structure: the induced substructure on the image of a
    minimal-image idempotent endomorphism, relabeled onto an initial segment.

    The extended structure adds one singleton unary relation per core element
    (named u0, u1, ... unless already present), so its polymorphisms are
    exactly the idempotent polymorphisms of the core.
    """
    size = s.domain.size
    endos = endomorphisms(s)
    e = min(endos, key=lambda t: (len(set(t)), t))
    if len(set(e)) == size:
        core = s
        retraction = tuple(range(size))
        embedding = tuple(range(size))
    else:
        f = _idempotent_power(e)
        img = sorted(set(f))
        core, old_to_new = s.restricted(img)
        retraction = tuple(old_to_new[f[x]] for x in range(size))
        embedding = tuple(img)
        for g in endomorphisms(core):
            if len(set(g)) != core.domain.size:
                raise RuntimeError("retract of a minimal-image idempotent is not a core")
    extra = []
    taken = set(core.names)
    for x in range(core.domain.size):
        r = Relation.from_tuples(core.domain, 1, [(x,)])
        if any(rel == r for _, rel in core.relations):
            continue
        name = f"u{x}"
        while name in taken:
            name += "x"
        taken.add(name)
        extra.append((name, r))
    return CoreExtension(core, core.extended(*extra), retraction, embedding)


def idempotent_extension(s: Structure) -> CoreExtension:
    return core_of(s)
