"""Finite state spaces, concrete states and variable-set lenses.

A lens here is simply a set of variable names.  ``get`` projects a state onto
those names, ``put`` overwrites them, and ``override`` copies the region named
by a lens from one state into another -- the operation used to rebuild the
final state of a parallel composition from the states of its two branches.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping

from .errors import DomainError, SpaceTooLarge

DEFAULT_STATE_LIMIT = 2**20


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


class Domain:
    """A finite, enumerable set of values."""

    def values(self) -> tuple[Any, ...]:
        raise NotImplementedError

    def contains(self, v: Any) -> bool:
        raise NotImplementedError

    @property
    def size(self) -> int:
        return len(self.values())


@dataclass(frozen=True)
class BoolDomain(Domain):
    def values(self) -> tuple[bool, ...]:
        return (False, True)

    def contains(self, v: Any) -> bool:
        return isinstance(v, bool)

    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntDomain(Domain):
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError(f"empty integer range {self.lo}..{self.hi}")

    def values(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, v: Any) -> bool:
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __str__(self) -> str:
        return f"int[{self.lo}..{self.hi}]"


@dataclass(frozen=True)
class EnumDomain(Domain):
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names or len(set(self.names)) != len(self.names):
            raise DomainError("enumeration needs distinct constants")

    def values(self) -> tuple[str, ...]:
        return self.names

    def contains(self, v: Any) -> bool:
        return isinstance(v, str) and v in self.names

    def __str__(self) -> str:
        return "enum{" + ",".join(self.names) + "}"


@dataclass(frozen=True)
class SeqDomain(Domain):
    maxlen: int
    elem: Domain

    def values(self) -> tuple[tuple, ...]:
        out: list[tuple] = []
        for n in range(self.maxlen + 1):
            out.extend(itertools.product(self.elem.values(), repeat=n))
        return tuple(out)

    def contains(self, v: Any) -> bool:
        return (
            isinstance(v, tuple)
            and len(v) <= self.maxlen
            and all(self.elem.contains(x) for x in v)
        )

    @property
    def size(self) -> int:
        k = self.elem.size
        return sum(k**n for n in range(self.maxlen + 1))

    def __str__(self) -> str:
        return f"seq[{self.maxlen}] {self.elem}"


# ---------------------------------------------------------------------------
# State spaces and states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpace:
    """An ordered list of ``(name, domain)`` declarations."""

    vars: tuple[tuple[str, Domain], ...] = ()

    def __post_init__(self) -> None:
        names = [n for n, _ in self.vars]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate variable names in {names}")

    @classmethod
    def of(cls, **domains: Domain) -> "StateSpace":
        return cls(tuple(domains.items()))

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.vars)

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, (n, _) in enumerate(self.vars)}

    def domain(self, name: str) -> Domain:
        for n, d in self.vars:
            if n == name:
                return d
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return name in self.index

    @property
    def size(self) -> int:
        return math.prod(d.size for _, d in self.vars)

    def states(self, limit: int = DEFAULT_STATE_LIMIT) -> Iterator["State"]:
        """Enumerate every state; refuses to start if there are more than ``limit``."""
        if self.size > limit:
            raise SpaceTooLarge(f"{self.size} states exceeds limit {limit}")
        for combo in itertools.product(*(d.values() for _, d in self.vars)):
            yield State(self, combo)

    def state(self, bindings: Mapping[str, Any] | None = None, **kw: Any) -> "State":
        """Build a validated state from a total mapping of bindings."""
        b = dict(bindings or {})
        b.update(kw)
        missing = [n for n in self.names if n not in b]
        extra = [n for n in b if n not in self]
        if missing or extra:
            raise DomainError(f"state must bind exactly {self.names}; missing={missing} extra={extra}")
        vals = []
        for n, d in self.vars:
            v = b[n]
            if not d.contains(v):
                raise DomainError(f"value {v!r} outside domain {d} of {n}")
            vals.append(v)
        return State(self, tuple(vals))


@dataclass(frozen=True)
class State(Mapping[str, Any]):
    """A total valuation of a :class:`StateSpace`; immutable and hashable."""

    space: StateSpace
    values_: tuple[Any, ...]

    def __getitem__(self, name: str) -> Any:
        return self.values_[self.space.index[name]]

    def __iter__(self) -> Iterator[str]:
        return iter(self.space.names)

    def __len__(self) -> int:
        return len(self.values_)

    def __hash__(self) -> int:
        return hash(self.values_)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self.values_ == other.values_ and self.space.names == other.space.names

    def as_dict(self) -> dict[str, Any]:
        return dict(zip(self.space.names, self.values_))

    def update(self, bindings: Mapping[str, Any]) -> "State":
        """Return a copy with some variables rebound (domain-checked)."""
        d = self.as_dict()
        d.update(bindings)
        return self.space.state(d)

    def __repr__(self) -> str:
        from .expr import format_value

        inner = ", ".join(f"{n}:{format_value(v)}" for n, v in zip(self.space.names, self.values_))
        return "{" + inner + "}"


# ---------------------------------------------------------------------------
# Lenses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LensSet:
    """A lens addressing a set of variables; ``LensSet()`` is the 0-lens."""

    vars: frozenset[str] = frozenset()

    @classmethod
    def of(cls, names: Iterable[str]) -> "LensSet":
        return cls(frozenset(names))

    @classmethod
    def full(cls, space: StateSpace) -> "LensSet":
        return cls(frozenset(space.names))

    def check(self, space: StateSpace) -> None:
        unknown = self.vars - set(space.names)
        if unknown:
            raise DomainError(f"lens mentions undeclared variables {sorted(unknown)}")

    def __str__(self) -> str:
        return "{" + ",".join(sorted(self.vars)) + "}"


def lens_get(lens: LensSet, s: State) -> dict[str, Any]:
    return {n: s[n] for n in s.space.names if n in lens.vars}


def lens_put(lens: LensSet, s: State, view: Mapping[str, Any]) -> State:
    if set(view) != set(lens.vars):
        raise DomainError(f"view must bind exactly {sorted(lens.vars)}, got {sorted(view)}")
    return s.update(view)


def lens_independent(a: LensSet, b: LensSet) -> bool:
    return not (a.vars & b.vars)


def lens_sublens(a: LensSet, b: LensSet) -> bool:
    """``a`` is a sublens of ``b``: everything ``a`` views, ``b`` views too."""
    return a.vars <= b.vars


def lens_override(s1: State, s2: State, lens: LensSet) -> State:
    """Copy the region named by ``lens`` from ``s2`` into ``s1``."""
    return lens_put(lens, s1, lens_get(lens, s2))
