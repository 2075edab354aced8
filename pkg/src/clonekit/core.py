"""Dense-table representations of operations, relations and partitions on
small finite domains.

Tuples over a domain of size ``s`` are addressed by a mixed-radix index in
which the *first* coordinate is the most significant digit::

    index(t) = t[0]*s**(k-1) + t[1]*s**(k-2) + ... + t[k-1]

An ``n``-ary operation is stored as a value vector of length ``s**n`` and a
``k``-ary relation as a boolean membership vector of length ``s**k``, both
indexed this way.  All objects are immutable and hashable; derived objects
are new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ArgumentError

MAX_DOMAIN_SIZE = 27


def _check_domain_size(size: int) -> int:
    if not isinstance(size, (int, np.integer)) or isinstance(size, bool):
        raise ArgumentError(f"domain size must be an int, got {size!r}")
    if size < 1:
        raise ArgumentError(f"domain size must be >= 1, got {size}")
    if size > MAX_DOMAIN_SIZE:
        raise ArgumentError(
            f"domain size {size} exceeds the supported maximum {MAX_DOMAIN_SIZE}"
        )
    return int(size)


@dataclass(frozen=True, order=True)
class Domain:
    """A finite domain {0, 1, ..., size-1}."""

    size: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "size", _check_domain_size(self.size))

    def elements(self) -> range:
        return range(self.size)

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.size))


def as_domain(d: "Domain | int") -> Domain:
    """Normalize an int or Domain argument to a Domain."""
    return d if isinstance(d, Domain) else Domain(d)


def encode(tup: Sequence[int], size: int) -> int:
    """Mixed-radix index of a tuple, first coordinate most significant."""
    idx = 0
    for v in tup:
        idx = idx * size + v
    return idx


def decode(idx: int, arity: int, size: int) -> tuple[int, ...]:
    """Inverse of :func:`encode`."""
    out = [0] * arity
    for j in range(arity - 1, -1, -1):
        idx, out[j] = divmod(idx, size)
    return tuple(out)


def _radix_weights(arity: int, size: int) -> np.ndarray:
    return size ** np.arange(arity - 1, -1, -1, dtype=np.int64)


def all_tuples(arity: int, size: int) -> np.ndarray:
    """All tuples of the given arity in index order, shape (size**arity, arity)."""
    idx = np.arange(size**arity, dtype=np.int64)
    out = np.empty((size**arity, arity), dtype=np.int64)
    for j in range(arity - 1, -1, -1):
        idx, out[:, j] = np.divmod(idx, size)
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def tuple_array(rel: "Relation") -> np.ndarray:
    """Member tuples of a relation as an (m, arity) int64 array, index order."""
    idx = np.nonzero(rel.mask)[0].astype(np.int64)
    out = np.empty((idx.shape[0], rel.arity), dtype=np.int64)
    for j in range(rel.arity - 1, -1, -1):
        idx, out[:, j] = np.divmod(idx, rel.domain.size)
    return out


@dataclass(frozen=True)
class Operation:
    """A finitary operation given by its full value table.

    ``table[i]`` is the value at the tuple with mixed-radix index ``i``.
    Nullary operations are not representable; use a unary constant instead.
    """

    domain: Domain
    arity: int
    table: np.ndarray = field(compare=False)
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", as_domain(self.domain))
        if self.arity < 1:
            raise ArgumentError(f"operation arity must be >= 1, got {self.arity}")
        s = self.domain.size
        tab = np.asarray(self.table, dtype=np.int8)
        if tab.shape != (s**self.arity,):
            raise ArgumentError(
                f"table length {tab.size} does not match size {s}**arity {self.arity}"
            )
        if tab.size and (tab.min() < 0 or tab.max() >= s):
            raise ArgumentError("table contains values outside the domain")
        object.__setattr__(self, "table", _frozen(tab.copy()))
        object.__setattr__(self, "_key", self.table.tobytes())

    @classmethod
    def from_table(
        cls, domain: Domain | int, arity: int, table: Iterable[int]
    ) -> "Operation":
        return cls(as_domain(domain), arity, np.fromiter(table, dtype=np.int8))

    @classmethod
    def from_callable(
        cls, domain: Domain | int, arity: int, fn: Callable[..., int]
    ) -> "Operation":
        dom = as_domain(domain)
        tab = [fn(*t) for t in product(range(dom.size), repeat=arity)]
        return cls(dom, arity, np.array(tab, dtype=np.int8))

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ArgumentError(
                f"operation of arity {self.arity} applied to {len(args)} arguments"
            )
        return int(self.table[encode(args, self.domain.size)])

    def __hash__(self) -> int:
        return hash((self.domain, self.arity, self._key))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Operation):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.arity == other.arity
            and self._key == other._key
        )

    def graph(self) -> "Relation":
        """The (arity+1)-ary graph relation {(x..., f(x...))}."""
        s = self.domain.size
        mask = np.zeros(s ** (self.arity + 1), dtype=bool)
        idx = np.arange(s**self.arity, dtype=np.int64) * s + self.table
        mask[idx] = True
        return Relation(self.domain, self.arity + 1, mask)

    def is_idempotent(self) -> bool:
        s = self.domain.size
        diag = encode([1] * self.arity, s)  # index step for (x, x, ..., x)
        return all(int(self.table[diag * x]) == x for x in range(s))


def projection(domain: Domain | int, arity: int, index: int) -> Operation:
    """The projection onto the given 0-based argument index."""
    dom = as_domain(domain)
    if not 0 <= index < arity:
        raise ArgumentError(f"projection index {index} out of range for arity {arity}")
    return Operation(dom, arity, all_tuples(arity, dom.size)[:, index])


def constant(domain: Domain | int, value: int, arity: int = 1) -> Operation:
    dom = as_domain(domain)
    if not 0 <= value < dom.size:
        raise ArgumentError(f"constant value {value} outside domain of size {dom.size}")
    return Operation(dom, arity, np.full(dom.size**arity, value, dtype=np.int8))


@dataclass(frozen=True)
class Relation:
    """A finitary relation given by a dense membership mask."""

    domain: Domain
    arity: int
    mask: np.ndarray = field(compare=False)
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", as_domain(self.domain))
        if self.arity < 1:
            raise ArgumentError(f"relation arity must be >= 1, got {self.arity}")
        s = self.domain.size
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (s**self.arity,):
            raise ArgumentError(
                f"mask length {m.size} does not match size {s}**arity {self.arity}"
            )
        object.__setattr__(self, "mask", _frozen(m.copy()))
        object.__setattr__(self, "_key", np.packbits(self.mask).tobytes())

    @classmethod
    def from_tuples(
        cls,
        domain: Domain | int,
        arity: int,
        tuples: Iterable[Sequence[int]],
    ) -> "Relation":
        dom = as_domain(domain)
        s = dom.size
        mask = np.zeros(s**arity, dtype=bool)
        for t in tuples:
            t = tuple(t)
            if len(t) != arity:
                raise ArgumentError(f"tuple {t} does not have arity {arity}")
            if any(not 0 <= v < s for v in t):
                raise ArgumentError(f"tuple {t} outside domain of size {s}")
            mask[encode(t, s)] = True
        return cls(dom, arity, mask)

    @classmethod
    def full(cls, domain: Domain | int, arity: int) -> "Relation":
        dom = as_domain(domain)
        return cls(dom, arity, np.ones(dom.size**arity, dtype=bool))

    @classmethod
    def empty(cls, domain: Domain | int, arity: int) -> "Relation":
        dom = as_domain(domain)
        return cls(dom, arity, np.zeros(dom.size**arity, dtype=bool))

    @classmethod
    def equality(cls, domain: Domain | int) -> "Relation":
        dom = as_domain(domain)
        return cls.from_tuples(dom, 2, [(x, x) for x in range(dom.size)])

    def tuples(self) -> list[tuple[int, ...]]:
        """Member tuples in index (lexicographic) order."""
        s = self.domain.size
        return [decode(int(i), self.arity, s) for i in np.nonzero(self.mask)[0]]

    def __contains__(self, tup: Sequence[int]) -> bool:
        if len(tup) != self.arity:
            return False
        return bool(self.mask[encode(tup, self.domain.size)])

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __hash__(self) -> int:
        return hash((self.domain, self.arity, self._key))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.arity == other.arity
            and self._key == other._key
        )

    # mask-level algebra, used heavily by the closure engine ---------------

    def intersect(self, other: "Relation") -> "Relation":
        if (self.domain, self.arity) != (other.domain, other.arity):
            raise ArgumentError("intersect requires equal domain and arity")
        return Relation(self.domain, self.arity, self.mask & other.mask)

    def complement(self) -> "Relation":
        return Relation(self.domain, self.arity, ~self.mask)

    def permuted(self, perm: Sequence[int]) -> "Relation":
        """Relation with coordinates rearranged:
        result = {(t[perm[0]], ..., t[perm[k-1]]) : t in self}."""
        k = self.arity
        if sorted(perm) != list(range(k)):
            raise ArgumentError(f"{tuple(perm)} is not a permutation of range({k})")
        s = self.domain.size
        grid = self.mask.reshape((s,) * k)
        return Relation(self.domain, k, grid.transpose(tuple(perm)).reshape(-1))

    def projected(self, keep: Sequence[int]) -> "Relation":
        """Existentially project onto the listed coordinates (in the order
        given, duplicates not allowed)."""
        k = self.arity
        keep = list(keep)
        if len(set(keep)) != len(keep) or not keep:
            raise ArgumentError("projection coordinates must be nonempty and distinct")
        if any(not 0 <= c < k for c in keep):
            raise ArgumentError(f"projection coordinates {keep} out of range")
        s = self.domain.size
        grid = self.mask.reshape((s,) * k)
        drop = tuple(sorted(set(range(k)) - set(keep)))
        reduced = grid.any(axis=drop) if drop else grid
        remaining = [c for c in range(k) if c not in drop]
        order = [remaining.index(c) for c in keep]
        return Relation(self.domain, len(keep), reduced.transpose(order).reshape(-1))

    def identified(self, i: int, j: int) -> "Relation":
        """Intersect with the diagonal x_i = x_j and drop coordinate j."""
        k = self.arity
        if i == j or not (0 <= i < k and 0 <= j < k):
            raise ArgumentError(f"identify needs two distinct coordinates, got {i},{j}")
        if k < 2:
            raise ArgumentError("identify needs arity >= 2")
        s = self.domain.size
        tup = all_tuples(k - 1, s)
        full = np.insert(tup, j, tup[:, i if i < j else i - 1], axis=1)
        idx = full @ _radix_weights(k, s)
        return Relation(self.domain, k - 1, self.mask[idx])

    def product(self, other: "Relation") -> "Relation":
        if self.domain != other.domain:
            raise ArgumentError("product requires equal domains")
        s = self.domain.size
        mask = np.outer(self.mask, other.mask).reshape(-1)
        return Relation(self.domain, self.arity + other.arity, mask)

    def relabeled(self, perm: Sequence[int]) -> "Relation":
        """Rename domain elements: element x becomes perm[x]."""
        s = self.domain.size
        if sorted(perm) != list(range(s)):
            raise ArgumentError(f"{tuple(perm)} is not a permutation of the domain")
        return Relation.from_tuples(
            self.domain,
            self.arity,
            [tuple(perm[v] for v in t) for t in self.tuples()],
        )

    def is_empty(self) -> bool:
        return not self.mask.any()

    def is_full(self) -> bool:
        return bool(self.mask.all())


@dataclass(frozen=True)
class Partition:
    """A partition of a domain, stored as a block-id map with block ids
    numbered contiguously from 0 in order of first occurrence."""

    domain: Domain
    block_of: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", as_domain(self.domain))
        raw = tuple(int(b) for b in self.block_of)
        if len(raw) != self.domain.size:
            raise ArgumentError(
                f"block map has {len(raw)} entries for domain of size {self.domain.size}"
            )
        relabel: dict[int, int] = {}
        norm = []
        for b in raw:
            if b not in relabel:
                relabel[b] = len(relabel)
            norm.append(relabel[b])
        object.__setattr__(self, "block_of", tuple(norm))

    @classmethod
    def from_blocks(
        cls, domain: Domain | int, blocks: Iterable[Iterable[int]]
    ) -> "Partition":
        dom = as_domain(domain)
        block_of = [-1] * dom.size
        for b, members in enumerate(blocks):
            for x in members:
                if not 0 <= x < dom.size:
                    raise ArgumentError(f"element {x} outside domain")
                if block_of[x] != -1:
                    raise ArgumentError(f"element {x} occurs in two blocks")
                block_of[x] = b
        if -1 in block_of:
            raise ArgumentError("blocks do not cover the domain")
        return cls(dom, tuple(block_of))

    @property
    def num_blocks(self) -> int:
        return max(self.block_of) + 1 if self.block_of else 0

    def blocks(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for x, b in enumerate(self.block_of):
            out[b].append(x)
        return [tuple(b) for b in out]

    def as_relation(self) -> Relation:
        s = self.domain.size
        pairs = [
            (x, y)
            for x in range(s)
            for y in range(s)
            if self.block_of[x] == self.block_of[y]
        ]
        return Relation.from_tuples(self.domain, 2, pairs)

    def is_discrete(self) -> bool:
        return self.num_blocks == self.domain.size

    def is_all(self) -> bool:
        return self.num_blocks == 1

    def refines(self, other: "Partition") -> bool:
        """True iff every block of self lies inside a block of other."""
        if self.domain != other.domain:
            raise ArgumentError("refines requires equal domains")
        seen: dict[int, int] = {}
        for x in range(self.domain.size):
            b = self.block_of[x]
            ob = other.block_of[x]
            if seen.setdefault(b, ob) != ob:
                return False
        return True


@dataclass(frozen=True)
class Structure:
    """A relational structure: a domain plus an ordered list of named
    relations with unique names."""

    domain: Domain
    relations: tuple[tuple[str, Relation], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", as_domain(self.domain))
        rels = tuple((str(n), r) for n, r in self.relations)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ArgumentError(f"duplicate relation names: {dup}")
        for n, r in rels:
            if r.domain != self.domain:
                raise ArgumentError(
                    f"relation {n!r} lives on a different domain than the structure"
                )
        object.__setattr__(self, "relations", rels)

    @classmethod
    def make(
        cls, domain: Domain | int, rels: Mapping[str, Relation] | Iterable[tuple[str, Relation]]
    ) -> "Structure":
        items = rels.items() if isinstance(rels, Mapping) else rels
        return cls(as_domain(domain), tuple(items))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def get(self, name: str) -> Relation:
        for n, r in self.relations:
            if n == name:
                return r
        raise ArgumentError(f"structure has no relation named {name!r}")

    def extended(self, *extra: tuple[str, Relation]) -> "Structure":
        return Structure(self.domain, self.relations + tuple(extra))

    def relabeled(self, perm: Sequence[int]) -> "Structure":
        """Rename domain elements: element x becomes perm[x]."""
        s = self.domain.size
        if sorted(perm) != list(range(s)):
            raise ArgumentError(f"{tuple(perm)} is not a permutation of the domain")
        out = []
        for n, r in self.relations:
            tups = [tuple(perm[v] for v in t) for t in r.tuples()]
            out.append((n, Relation.from_tuples(self.domain, r.arity, tups)))
        return Structure(self.domain, tuple(out))

    def restricted(self, elements: Sequence[int]) -> "tuple[Structure, dict[int, int]]":
        """Induced substructure on the given elements, relabeled onto
        {0..m-1} preserving the listed order; returns (structure, old->new)."""
        elements = list(elements)
        if len(set(elements)) != len(elements) or not elements:
            raise ArgumentError("restriction needs a nonempty list of distinct elements")
        old_to_new = {x: i for i, x in enumerate(elements)}
        dom = Domain(len(elements))
        out = []
        for n, r in self.relations:
            tups = [
                tuple(old_to_new[v] for v in t)
                for t in r.tuples()
                if all(v in old_to_new for v in t)
            ]
            out.append((n, Relation.from_tuples(dom, r.arity, tups)))
        return Structure(dom, tuple(out)), old_to_new


# ---------------------------------------------------------------------------
# operations on operations


def take_minor(f: Operation, sigma: Sequence[int], arity: int | None = None) -> Operation:
    """The minor of ``f`` under the argument map ``sigma``.

    ``sigma[i]`` is the (0-based) argument slot of the result that feeds the
    i-th argument of ``f``; the result has ``arity`` arguments (default: just
    enough to cover ``max(sigma)+1``).
    """
    sigma = list(sigma)
    if len(sigma) != f.arity:
        raise ArgumentError(
            f"sigma has {len(sigma)} entries for an operation of arity {f.arity}"
        )
    r = (max(sigma) + 1) if arity is None else arity
    if any(not 0 <= v < r for v in sigma):
        raise ArgumentError(f"sigma {tuple(sigma)} maps outside range({r})")
    s = f.domain.size
    args = all_tuples(r, s)  # (s**r, r)
    fidx = args[:, sigma] @ _radix_weights(f.arity, s)
    return Operation(f.domain, r, f.table[fidx])


def compose(f: Operation, gs: Sequence[Operation]) -> Operation:
    """The composition f(g_1(x...), ..., g_n(x...)), all g_i of equal arity."""
    if len(gs) != f.arity:
        raise ArgumentError(
            f"compose needs {f.arity} inner operations, got {len(gs)}"
        )
    if not gs:
        raise ArgumentError("compose needs at least one inner operation")
    m = gs[0].arity
    for g in gs:
        if g.domain != f.domain:
            raise ArgumentError("inner operation on a different domain")
        if g.arity != m:
            raise ArgumentError("inner operations must share one arity")
    s = f.domain.size
    cols = np.stack([g.table.astype(np.int64) for g in gs], axis=1)  # (s**m, n)
    fidx = cols @ _radix_weights(f.arity, s)
    return Operation(f.domain, m, f.table[fidx])


def preserves(f: Operation, rel: Relation) -> bool:
    """True iff applying ``f`` coordinatewise to any ``f.arity`` member
    tuples of ``rel`` lands back in ``rel``."""
    if f.domain != rel.domain:
        raise ArgumentError("operation and relation live on different domains")
    from . import kernels

    tups = np.array(rel.tuples(), dtype=np.int64).reshape(-1, rel.arity)
    return kernels.preserves(f.table, f.arity, tups, rel.mask, f.domain.size)


def is_congruence(p: Partition, ops: Iterable[Operation]) -> bool:
    rel = p.as_relation()
    return all(preserves(f, rel) for f in ops)


def has_parallelogram(rel: Relation) -> bool:
    """Check the parallelogram property: for every way of splitting the
    coordinates into two nonempty groups, viewing the relation as a binary
    relation between the two projections, membership of (a,c), (a,d) and
    (b,c) forces (b,d)."""
    k = rel.arity
    if k < 2:
        raise ArgumentError("parallelogram property needs arity >= 2")
    tups = rel.tuples()
    # Unordered proper splits {I, complement}; fixing coordinate 0 on one side
    # enumerates each split once (odd bitmasks contain coordinate 0).
    for split in range(1, 2**k - 1, 2):
        left = [i for i in range(k) if (split >> i) & 1]
        right = [i for i in range(k) if not (split >> i) & 1]
        groups: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
        for t in tups:
            a = tuple(t[i] for i in left)
            c = tuple(t[i] for i in right)
            groups.setdefault(a, set()).add(c)
        # Difunctionality: left keys with intersecting right-sets must have
        # identical right-sets.
        rep: dict[tuple[int, ...], int] = {}
        by_id: list[set[tuple[int, ...]]] = []
        for cs in groups.values():
            ids = {rep[c] for c in cs if c in rep}
            if len(ids) > 1:
                return False
            if ids:
                gid = ids.pop()
                if by_id[gid] != cs:
                    return False
            else:
                gid = len(by_id)
                by_id.append(cs)
                for c in cs:
                    rep[c] = gid
    return True
