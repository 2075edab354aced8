"""Algebra-side machinery: congruence lattices, the central relation
T(alpha, beta) built from a designated Mal'cev operation, centralizers and
Abelianness, coordinate kernels with reduced representations, criticality
of invariant relations, and the affine-basis verification on prime domains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .closure import Derivation, derive_all
from .core import (
    Domain,
    Operation,
    Partition,
    Relation,
    all_tuples,
    as_domain,
    encode,
    has_parallelogram,
    is_congruence,
    preserves,
    tuple_array,
)
from .errors import ArgumentError, CapabilityError, VerificationError

MAX_LATTICE_DOMAIN = 5
_SG_CELL_CAP = 1 << 26


# ---------------------------------------------------------------------------
# algebras


@dataclass(frozen=True)
class Algebra:
    """A domain together with a finite list of generating operations."""

    domain: Domain
    ops: tuple[Operation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", as_domain(self.domain))
        ops = tuple(self.ops)
        for f in ops:
            if f.domain != self.domain:
                raise ArgumentError("all operations must share the algebra's domain")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def make(cls, domain: Domain | int, ops: Iterable[Operation]) -> "Algebra":
        return cls(as_domain(domain), tuple(ops))


def is_malcev_op(f: Operation) -> bool:
    """d(x,x,y) = y = d(y,x,x) for all x, y."""
    if f.arity != 3:
        return False
    return all(
        f(x, x, y) == y and f(y, x, x) == y
        for x in f.domain
        for y in f.domain
    )


def malcev_generator(algebra: Algebra) -> Operation | None:
    """The first generator that is a Mal'cev operation, if any."""
    for f in algebra.ops:
        if is_malcev_op(f):
            return f
    return None


def preserves_all(algebra: Algebra, rel: Relation) -> bool:
    return all(preserves(f, rel) for f in algebra.ops)


# ---------------------------------------------------------------------------
# generated subpowers


def subpower_closure(algebra: Algebra, seed: Relation) -> Relation:
    """Close a tuple set under the coordinatewise generator actions."""
    if seed.domain != algebra.domain:
        raise ArgumentError("seed lives on a different domain than the algebra")
    n = seed.arity
    size = algebra.domain.size
    cur = seed.mask.copy()
    changed = True
    while changed:
        changed = False
        for f in algebra.ops:
            count = int(cur.sum())
            if count and count**f.arity > _SG_CELL_CAP:
                raise CapabilityError(
                    f"generated-subpower round needs {count}^{f.arity} combinations"
                )
            img = kernels.apply_op_to_set(cur, n, f.table, f.arity, size)
            new = cur | img
            if not np.array_equal(new, cur):
                cur = new
                changed = True
    return Relation(algebra.domain, n, cur)


# ---------------------------------------------------------------------------
# congruence lattice


def all_partitions(domain: Domain | int) -> list[Partition]:
    """Every partition of the domain, by restricted-growth strings."""
    dom = as_domain(domain)
    n = dom.size
    out: list[Partition] = []

    def rec(prefix: list[int], used: int) -> None:
        if len(prefix) == n:
            out.append(Partition(dom, tuple(prefix)))
            return
        for b in range(used + 1):
            prefix.append(b)
            rec(prefix, max(used, b + 1))
            prefix.pop()

    rec([], 0)
    return out


def partition_meet(p: Partition, q: Partition) -> Partition:
    """Common refinement: blocks are intersections of blocks."""
    if p.domain != q.domain:
        raise ArgumentError("meet requires equal domains")
    pairs = [(p.block_of[x], q.block_of[x]) for x in range(p.domain.size)]
    seen: dict[tuple[int, int], int] = {}
    return Partition(p.domain, tuple(seen.setdefault(t, len(seen)) for t in pairs))


@dataclass(frozen=True)
class CongruenceLattice:
    """All congruences, finest first, with the monolith flagged when the
    minimal nontrivial congruence is unique."""

    congruences: tuple[Partition, ...]
    monolith: Partition | None

    def __iter__(self):
        return iter(self.congruences)

    def __len__(self) -> int:
        return len(self.congruences)

    def __contains__(self, p: Partition) -> bool:
        return p in self.congruences

    @property
    def zero(self) -> Partition:
        return self.congruences[0]

    @property
    def one(self) -> Partition:
        return self.congruences[-1]


def congruence_lattice(algebra: Algebra) -> CongruenceLattice:
    """All partitions preserved by every generator, domain size <= 5."""
    n = algebra.domain.size
    if n > MAX_LATTICE_DOMAIN:
        raise CapabilityError(
            f"congruence lattices are computed only for domains of size <= "
            f"{MAX_LATTICE_DOMAIN}, got {n}"
        )
    cong = [p for p in all_partitions(algebra.domain) if is_congruence(p, algebra.ops)]
    cong.sort(key=lambda p: (-p.num_blocks, p.block_of))
    nontrivial = [p for p in cong if not p.is_discrete()]
    minimal = [
        p
        for p in nontrivial
        if not any(q is not p and q.refines(p) for q in nontrivial)
    ]
    monolith = minimal[0] if len(minimal) == 1 else None
    return CongruenceLattice(tuple(cong), monolith)


# ---------------------------------------------------------------------------
# the central relation and centralizers


def _designated_malcev(algebra: Algebra, d: Operation | None) -> Operation:
    if d is not None:
        if d.domain != algebra.domain:
            raise ArgumentError("designated operation lives on a different domain")
        if not is_malcev_op(d):
            raise ArgumentError("designated operation is not a Mal'cev operation")
        return d
    found = malcev_generator(algebra)
    if found is None:
        raise ArgumentError("no generator is a Mal'cev operation; pass one explicitly")
    return found


def _check_congruence(algebra: Algebra, p: Partition, label: str) -> None:
    if p.domain != algebra.domain:
        raise ArgumentError(f"{label} lives on a different domain than the algebra")
    if not is_congruence(p, algebra.ops):
        raise ArgumentError(f"{label} is not a congruence of the algebra")


def central_relation(
    algebra: Algebra,
    alpha: Partition,
    beta: Partition,
    d: Operation | None = None,
) -> Relation:
    """The 4-ary relation {(x, y, z, d(x,y,z)) : x alpha y beta z}."""
    d = _designated_malcev(algebra, d)
    _check_congruence(algebra, alpha, "alpha")
    _check_congruence(algebra, beta, "beta")
    rows = []
    for x in algebra.domain:
        for y in algebra.domain:
            if alpha.block_of[x] != alpha.block_of[y]:
                continue
            for z in algebra.domain:
                if beta.block_of[y] != beta.block_of[z]:
                    continue
                rows.append((x, y, z, d(x, y, z)))
    return Relation.from_tuples(algebra.domain, 4, rows)


def centralizes(
    algebra: Algebra,
    alpha: Partition,
    beta: Partition,
    d: Operation | None = None,
) -> bool:
    """True iff every generator preserves the central relation T(alpha, beta)."""
    return preserves_all(algebra, central_relation(algebra, alpha, beta, d))


def centralizer(
    algebra: Algebra, alpha: Partition, d: Operation | None = None
) -> Partition:
    """The largest congruence delta with centralizes(alpha, delta)."""
    lattice = congruence_lattice(algebra)
    good = [delta for delta in lattice if centralizes(algebra, alpha, delta, d)]
    if not good:
        raise VerificationError("not even the trivial congruence is centralized")
    tops = [p for p in good if not any(q is not p and p.refines(q) for q in good)]
    if len(tops) != 1 or not all(p.refines(tops[0]) for p in good):
        raise VerificationError(
            "the centralized congruences have no unique maximum on this algebra"
        )
    return tops[0]


def is_abelian(
    algebra: Algebra, alpha: Partition | None = None, d: Operation | None = None
) -> bool:
    """Whether the full congruence (or a given one) centralizes itself."""
    if alpha is None:
        alpha = Partition(algebra.domain, (0,) * algebra.domain.size)
    return centralizes(algebra, alpha, alpha, d)


# ---------------------------------------------------------------------------
# coordinate kernels and reduced representations


def coordinate_kernels(
    rel: Relation, algebra: Algebra
) -> tuple[list[Partition], Relation]:
    """Per-coordinate kernels and the block-index image of the relation.

    The i-th kernel relates x to y when some pair of member tuples agrees
    everywhere off coordinate i while taking x and y there.  Requires the
    relation to be preserved by the algebra and to have the parallelogram
    property; the block-index image is verified to pull back to the
    relation exactly.
    """
    if rel.domain != algebra.domain:
        raise ArgumentError("relation lives on a different domain than the algebra")
    if not preserves_all(algebra, rel):
        raise ArgumentError("relation is not preserved by the algebra")
    if not has_parallelogram(rel):
        raise ArgumentError("relation does not have the parallelogram property")
    n = rel.arity
    size = rel.domain.size
    tups = tuple_array(rel)
    kernels_out: list[Partition] = []
    for i in range(n):
        related = np.eye(size, dtype=bool)
        if tups.shape[0]:
            others = np.delete(tups, i, axis=1)
            order = np.lexsort(others.T[::-1])
            sorted_others = others[order]
            sorted_vals = tups[order, i]
            start = 0
            m = tups.shape[0]
            for row in range(1, m + 1):
                if row == m or not np.array_equal(sorted_others[row], sorted_others[start]):
                    group = sorted_vals[start:row]
                    for a in group:
                        for b in group:
                            related[int(a), int(b)] = True
                    start = row
        # the formula gives a reflexive-symmetric relation; with the
        # parallelogram property it is transitive, which we re-check
        closure = related.copy()
        for k in range(size):
            closure |= np.outer(closure[:, k], closure[k, :])
        if not np.array_equal(closure, related):
            raise VerificationError(
                f"coordinate kernel {i} is not transitive despite the "
                "parallelogram property"
            )
        block_of = [-1] * size
        nxt = 0
        for a in range(size):
            if block_of[a] == -1:
                for b in range(size):
                    if related[a, b]:
                        block_of[b] = nxt
                nxt += 1
        kernels_out.append(Partition(rel.domain, tuple(block_of)))
    reduced_tuples = {
        tuple(kernels_out[i].block_of[int(t[i])] for i in range(n)) for t in tups
    }
    width = max((kernels_out[i].num_blocks for i in range(n)), default=1)
    reduced = Relation.from_tuples(Domain(max(width, 1)), n, sorted(reduced_tuples))
    # pull the block-index image back and demand the original relation
    preimage = [
        t
        for t in all_tuples(n, size)
        if tuple(kernels_out[i].block_of[int(t[i])] for i in range(n))
        in reduced_tuples
    ]
    if Relation.from_tuples(rel.domain, n, [tuple(map(int, t)) for t in preimage]) != rel:
        raise VerificationError(
            "the block-index image does not pull back to the relation; "
            "the parallelogram property was not effective"
        )
    return kernels_out, reduced


# ---------------------------------------------------------------------------
# criticality


def _depends_on_all(rel: Relation) -> bool:
    size = rel.domain.size
    grid = rel.mask.reshape((size,) * rel.arity)
    for i in range(rel.arity):
        first = np.take(grid, [0], axis=i)
        if bool((grid == first).all()):
            return False  # coordinate i is dummy
    return True


def is_critical(rel: Relation, algebra: Algebra) -> bool:
    """No dummy coordinates, and a unique upper cover among the invariant
    supersets (computed from the generated extensions by one missing tuple).

    The full relation (no proper superset) and relations whose extension
    family has several minimal members are not critical.
    """
    if rel.arity > 4:
        raise ArgumentError(
            f"criticality is decided for arity <= 4, got {rel.arity}"
        )
    if rel.domain != algebra.domain:
        raise ArgumentError("relation lives on a different domain than the algebra")
    if not preserves_all(algebra, rel):
        raise ArgumentError("relation is not preserved by the algebra")
    if not _depends_on_all(rel):
        return False
    missing = np.flatnonzero(~rel.mask)
    if missing.size == 0:
        return False  # the top relation has no covers
    extensions: dict[bytes, np.ndarray] = {}
    for idx in missing:
        seed = rel.mask.copy()
        seed[int(idx)] = True
        closed = subpower_closure(algebra, Relation(rel.domain, rel.arity, seed))
        extensions.setdefault(closed.mask.tobytes(), closed.mask)
    masks = list(extensions.values())
    minimal = [
        m
        for m in masks
        if not any(m2 is not m and (m2 & ~m).sum() == 0 for m2 in masks)
    ]
    return len(minimal) == 1


# ---------------------------------------------------------------------------
# affine bases on prime domains


def _affine_hull(points: np.ndarray, p: int) -> np.ndarray:
    """Close a point set under coordinatewise x - y + z (mod p)."""
    pts = {tuple(int(v) for v in row) for row in points}
    changed = True
    while changed:
        changed = False
        arr = np.array(sorted(pts), dtype=np.int64)
        m = arr.shape[0]
        x = arr[:, None, None, :]
        y = arr[None, :, None, :]
        z = arr[None, None, :, :]
        combos = (x - y + z) % p
        flat = combos.reshape(-1, arr.shape[1])
        for row in map(tuple, np.unique(flat, axis=0)):
            t = tuple(int(v) for v in row)
            if t not in pts:
                pts.add(t)
                changed = True
    return np.array(sorted(pts), dtype=np.int64)


def affine_subsets(p: int, n: int) -> list[Relation]:
    """All nonempty subsets of the n-th power of a p-element prime domain
    closed under x - y + z: the cosets of linear subspaces, enumerated by
    breadth-first subspace growth and translation."""
    dom = Domain(p)
    zero = np.zeros((1, n), dtype=np.int64)
    subspaces: dict[bytes, np.ndarray] = {}
    queue = [_affine_hull(zero, p)]
    subspaces[queue[0].tobytes()] = queue[0]
    while queue:
        space = queue.pop(0)
        have = {tuple(map(int, r)) for r in space}
        for vec in all_tuples(n, p):
            tv = tuple(map(int, vec))
            if tv in have:
                continue
            grown = _affine_hull(np.vstack([space, np.array([vec])]), p)
            key = grown.tobytes()
            if key not in subspaces:
                subspaces[key] = grown
                queue.append(grown)
    out: dict[bytes, Relation] = {}
    for space in subspaces.values():
        for shift in all_tuples(n, p):
            mask = np.zeros(p**n, dtype=bool)
            for row in (space + shift) % p:
                mask[encode(tuple(int(v) for v in row), p)] = True
            rel = Relation(dom, n, mask)
            out.setdefault(rel.mask.tobytes(), rel)
    rels = sorted(out.values(), key=lambda r: (len(r), r.mask.tobytes()))
    affine_op = Operation.from_callable(dom, 3, lambda x, y, z: (x - y + z) % p)
    for rel in rels:
        if not preserves(affine_op, rel):
            raise VerificationError(
                "an enumerated coset is not closed under x - y + z"
            )
    if p**n <= 16:  # small enough to cross-check against brute force
        brute = 0
        for bits in range(1, 1 << (p**n)):
            mask = np.array([(bits >> i) & 1 for i in range(p**n)], dtype=bool)
            if preserves(affine_op, Relation(dom, n, mask)):
                brute += 1
        if brute != len(rels):
            raise VerificationError(
                f"coset enumeration found {len(rels)} invariant subsets, "
                f"brute force found {brute}"
            )
    return rels


@dataclass(frozen=True)
class ZpBasisReport:
    """Outcome of checking that the Mal'cev graph plus at-most-binary
    invariants pp-define every invariant relation up to an arity bound."""

    p: int
    arity_bound: int
    targets_by_arity: tuple[tuple[int, int], ...]
    derived: int
    failures: tuple[Relation, ...]
    budget_limited: bool
    derivations: tuple[tuple[Relation, Derivation], ...]

    @property
    def all_definable(self) -> bool:
        return not self.failures


def verify_zp_basis(
    p: int,
    arity_bound: int,
    *,
    aux_budget: int = 2,
    ops_budget: int = 4_000_000,
    max_relations: int = 60_000,
) -> ZpBasisReport:
    """Check that every invariant relation of the affine algebra on a prime
    domain is derivable from the graph of x - y + z plus the at-most-binary
    invariant relations."""
    if p not in (2, 3):
        raise ArgumentError(f"the prime domain size must be 2 or 3, got {p}")
    if not 1 <= arity_bound <= 4:
        raise ArgumentError(f"arity bound must be between 1 and 4, got {arity_bound}")
    dom = Domain(p)
    affine_op = Operation.from_callable(dom, 3, lambda x, y, z: (x - y + z) % p)
    premises: list[tuple[str, Relation]] = [("T", affine_op.graph())]
    for arity in (1, 2):
        for i, rel in enumerate(affine_subsets(p, arity)):
            premises.append((f"inv{arity}_{i}", rel))
    targets: list[Relation] = []
    counts = []
    for arity in range(1, arity_bound + 1):
        layer = affine_subsets(p, arity)
        counts.append((arity, len(layer)))
        targets.extend(layer)
    proofs, limited = derive_all(
        premises,
        targets,
        aux_budget=aux_budget,
        ops_budget=ops_budget,
        max_relations=max_relations,
    )
    failures = tuple(t for t, pr in zip(targets, proofs) if pr is None)
    derivations = tuple(
        (t, pr) for t, pr in zip(targets, proofs) if pr is not None
    )
    return ZpBasisReport(
        p=p,
        arity_bound=arity_bound,
        targets_by_arity=tuple(counts),
        derived=len(derivations),
        failures=failures,
        budget_limited=limited,
        derivations=derivations,
    )
