"""Minor (height-one) conditions: systems of identities between single
applications of operation symbols.

A term is one operation symbol applied to variables, or a bare variable
(bare sides let us express strong conditions such as genuine minority, whose
quasi versions replace the bare side with a diagonal application).
Variables are 0-based integers; an identity is universally quantified over
all of them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError, LookupKeyError


@dataclass(frozen=True)
class Term:
    """``symbol=None`` means a bare variable (args has length 1)."""

    symbol: str | None
    args: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(int(a) for a in self.args))
        if self.symbol is None and len(self.args) != 1:
            raise ArgumentError("a bare-variable term has exactly one variable")
        if any(a < 0 for a in self.args):
            raise ArgumentError("variables are non-negative integers")


def var(v: int) -> Term:
    return Term(None, (v,))


def app(symbol: str, *args: int) -> Term:
    return Term(symbol, tuple(args))


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term

    def variables(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.lhs.args) | set(self.rhs.args)))


@dataclass(frozen=True)
class MinorCondition:
    """A finite set of operation symbols with arities, plus identities."""

    symbols: tuple[tuple[str, int], ...]
    identities: tuple[Identity, ...]

    def __post_init__(self) -> None:
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ArgumentError("duplicate symbol names in condition")
        arity = dict(self.symbols)
        for name, k in self.symbols:
            if k < 1:
                raise ArgumentError(f"symbol {name!r} has arity {k} < 1")
        for ident in self.identities:
            for term in (ident.lhs, ident.rhs):
                if term.symbol is None:
                    continue
                if term.symbol not in arity:
                    raise ArgumentError(f"identity uses undeclared symbol {term.symbol!r}")
                if len(term.args) != arity[term.symbol]:
                    raise ArgumentError(
                        f"symbol {term.symbol!r} has arity {arity[term.symbol]}, "
                        f"applied to {len(term.args)} variables"
                    )

    def arity_of(self, symbol: str) -> int:
        for n, k in self.symbols:
            if n == symbol:
                return k
        raise ArgumentError(f"condition has no symbol {symbol!r}")


def _single(name: str, arity: int, idents: list[tuple[Term, Term]]) -> MinorCondition:
    return MinorCondition(
        ((name, arity),), tuple(Identity(l, r) for l, r in idents)
    )


X, Y, Z = 0, 1, 2


def _cyclic(n: int) -> MinorCondition:
    if n < 2:
        raise ArgumentError(f"cyclic condition needs arity >= 2, got {n}")
    rotated = tuple(range(1, n)) + (0,)
    return _single(
        "c", n, [(Term("c", tuple(range(n))), Term("c", rotated))]
    )


def _symmetric(n: int) -> MinorCondition:
    if n < 2:
        raise ArgumentError(f"symmetric condition needs arity >= 2, got {n}")
    base = tuple(range(n))
    swap = (1, 0) + tuple(range(2, n))
    rotated = tuple(range(1, n)) + (0,)
    idents = [(Term("f", base), Term("f", swap))]
    if n > 2:
        idents.append((Term("f", base), Term("f", rotated)))
    return _single("f", n, idents)


def _builtin(name: str) -> MinorCondition:
    m = "m"
    if name == "malcev":
        return _single(m, 3, [
            (app(m, Y, X, X), var(Y)),
            (app(m, X, X, Y), var(Y)),
        ])
    if name == "quasi-malcev":
        return _single(m, 3, [
            (app(m, X, X, Y), app(m, Y, X, X)),
            (app(m, Y, X, X), app(m, Y, Y, Y)),
        ])
    if name == "majority":
        return _single(m, 3, [
            (app(m, X, X, Y), var(X)),
            (app(m, X, Y, X), var(X)),
            (app(m, Y, X, X), var(X)),
        ])
    if name == "quasi-majority":
        return _single(m, 3, [
            (app(m, X, Y, Y), app(m, Y, Y, Y)),
            (app(m, Y, X, Y), app(m, Y, Y, Y)),
            (app(m, Y, Y, X), app(m, Y, Y, Y)),
        ])
    if name == "minority":
        return _single(m, 3, [
            (app(m, X, Y, Y), var(X)),
            (app(m, Y, X, Y), var(X)),
            (app(m, Y, Y, X), var(X)),
        ])
    if name == "quasi-minority":
        return _single(m, 3, [
            (app(m, X, Y, Y), app(m, X, X, X)),
            (app(m, Y, X, Y), app(m, X, X, X)),
            (app(m, Y, Y, X), app(m, X, X, X)),
        ])
    if name == "sigma1":
        base = _builtin("quasi-majority")
        extra = Identity(app(m, X, Y, Z), app(m, Z, Y, X))
        return MinorCondition(base.symbols, base.identities + (extra,))
    if name == "sigma2":
        base = _symmetric(5)
        extra = Identity(
            Term("f", (X, X, Y, Y, Z)), Term("f", (X, Y, Y, Z, Z))
        )
        return MinorCondition(base.symbols, base.identities + (extra,))
    if name == "dependence":
        # f(x) ~ f(y): satisfied only by clones with a constant unary member
        return _single("f", 1, [(app("f", X), app("f", Y))])
    raise LookupKeyError(f"unknown condition name {name!r}")


def builtin_condition(name: str) -> MinorCondition:
    """Look up a condition by name.

    Fixed names: malcev, quasi-malcev, majority, quasi-majority, minority,
    quasi-minority, sigma1, sigma2, dependence.  Parametrized families:
    ``cyc<n>`` (n-cyclic, n >= 2) and ``sym-<n>`` (fully symmetric).
    """
    if name.startswith("cyc") and name[3:].isdigit():
        return _cyclic(int(name[3:]))
    if name.startswith("sym-") and name[4:].isdigit():
        return _symmetric(int(name[4:]))
    return _builtin(name)


CONDITION_NAMES = (
    "malcev",
    "quasi-malcev",
    "majority",
    "quasi-majority",
    "minority",
    "quasi-minority",
    "cyc2",
    "cyc3",
    "sym-5",
    "sigma1",
    "sigma2",
    "dependence",
)
