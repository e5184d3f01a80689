"""Finite groups as multiplication tables.

A group element is its index into the table.  The uniform weight
``1/order`` plays the role of the invariant (Haar) average, so group
functions and finitely supported measures coincide as complex weight
vectors of length ``order``.

Two convolution conventions coexist and every call site names the one it
uses: ``"measure"`` is the plain sum (``delta_e`` is the unit) and
``"function"`` carries the ``1/order`` weight of the normalized average.
Mixing them is the classic source of silent factor-of-``order`` bugs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoIdentity,
    NoInverse,
    NotAssociative,
    NotLatinSquare,
    OrderBoundExceeded,
    ParentMismatch,
)

SUBGROUP_ORDER_BOUND = 48


class FiniteGroup:
    """Multiplication-table group with identity and inverses precomputed.

    Parameters
    ----------
    mult : (n, n) integer array
        ``mult[a, b]`` is the index of the product ``a * b``.
    labels : optional list of display names, one per element.

    All group axioms are checked on construction; violations raise an
    error naming the axiom and a witness triple.
    """

    def __init__(self, mult, labels=None):
        table = np.asarray(mult, dtype=np.intp)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise NotLatinSquare(f"table must be square, got shape {table.shape}")
        n = table.shape[0]
        if n == 0:
            raise NoIdentity("empty table")
        if table.min() < 0 or table.max() >= n:
            raise NotLatinSquare("table entries must lie in 0..n-1")

        full = frozenset(range(n))
        for a in range(n):
            if frozenset(table[a]) != full:
                raise NotLatinSquare(f"row {a} repeats an element")
            if frozenset(table[:, a]) != full:
                raise NotLatinSquare(f"column {a} repeats an element")

        # cheap axioms first: identity and inverses are reachable failures
        # even on tables whose associativity never gets examined
        identity = None
        for e in range(n):
            if np.array_equal(table[e], np.arange(n)) and np.array_equal(
                table[:, e], np.arange(n)
            ):
                identity = e
                break
        if identity is None:
            raise NoIdentity("no two-sided identity element")

        inverse = np.full(n, -1, dtype=np.intp)
        for a in range(n):
            hits = np.nonzero(table[a] == identity)[0]
            if hits.size != 1 or table[hits[0], a] != identity:
                raise NoInverse(f"element {a} has no two-sided inverse")
            inverse[a] = hits[0]

        # (a*b)*c == a*(b*c) for all triples, vectorized over (a, b, c)
        left = table[table, :]            # left[a, b, c]  = (a*b)*c
        right = table[:, table]           # right[a, b, c] = a*(b*c)
        bad = np.argwhere(left != right)
        if bad.size:
            a, b, c = map(int, bad[0])
            raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")

        self.mult = table
        self.mult.setflags(write=False)
        self.order = n
        self.identity = identity
        self.inverse = inverse
        self.inverse.setflags(write=False)
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise ParentMismatch("labels length does not match group order")

    # -- basic operations --------------------------------------------------
    def op(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def conjugate(self, g: int, x: int) -> int:
        """g * x * g^-1."""
        return self.op(self.op(g, x), self.inv(g))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.op(x, a)
            k += 1
        return k

    def key(self) -> bytes:
        return self.mult.tobytes()

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(self.mult, other.mult)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"FiniteGroup(order={self.order})"


def group_from_table(mult, labels=None) -> FiniteGroup:
    """Validate a multiplication table and build the group."""
    return FiniteGroup(mult, labels)


@dataclass(frozen=True)
class Subgroup:
    """A validated subgroup, stored as a sorted member tuple."""

    parent: FiniteGroup
    members: tuple = field(default=())

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        object.__setattr__(self, "members", members)
        g = self.parent
        if g.identity not in members:
            raise NoIdentity("subgroup does not contain the identity")
        member_set = frozenset(members)
        for a in members:
            if g.inv(a) not in member_set:
                raise NoInverse(f"subgroup not closed under inverse at {a}")
            for b in members:
                if g.op(a, b) not in member_set:
                    raise NotAssociative(
                        f"subgroup not closed under product at ({a},{b})"
                    )

    @property
    def order(self) -> int:
        return len(self.members)

    def contains(self, other: "Subgroup") -> bool:
        return set(other.members) <= set(self.members)

    def is_trivial(self) -> bool:
        return self.order == 1

    def __le__(self, other: "Subgroup") -> bool:
        return other.contains(self)


def closure(group: FiniteGroup, seed) -> tuple:
    """Smallest subgroup member set containing ``seed``."""
    members = {group.identity}
    members.update(int(s) for s in seed)
    frontier = list(members)
    while frontier:
        new = []
        for a in frontier:
            inv = group.inv(a)
            if inv not in members:
                members.add(inv)
                new.append(inv)
        for a in list(members):
            for b in list(members):
                c = group.op(a, b)
                if c not in members:
                    members.add(c)
                    new.append(c)
        frontier = new
    return tuple(sorted(members))


def enumerate_subgroups(group: FiniteGroup, order_bound: int = SUBGROUP_ORDER_BOUND):
    """All subgroups, each exactly once, sorted by (size, member list).

    Exact brute force: close every cyclic subgroup, then saturate under
    pairwise joins.  Every subgroup is the join of the cyclic subgroups of
    its elements, so the fixpoint contains the full lattice.
    """
    if group.order > order_bound:
        raise OrderBoundExceeded(
            f"group order {group.order} exceeds bound {order_bound}"
        )
    found = {closure(group, [a]) for a in range(group.order)}
    found.add((group.identity,))
    while True:
        fresh = set()
        for h1, h2 in itertools.combinations(sorted(found), 2):
            j = closure(group, h1 + h2)
            if j not in found:
                fresh.add(j)
        if not fresh:
            break
        found |= fresh
    members_sorted = sorted(found, key=lambda m: (len(m), m))
    return [Subgroup(group, m) for m in members_sorted]


def conjugacy_classes(group: FiniteGroup):
    """Partition of the element set into conjugacy classes."""
    seen = set()
    classes = []
    for a in range(group.order):
        if a in seen:
            continue
        orbit = {group.conjugate(g, a) for g in range(group.order)}
        seen |= orbit
        classes.append(tuple(sorted(orbit)))
    classes.sort(key=lambda c: (len(c), c))
    return classes


def is_normal(subgroup: Subgroup) -> bool:
    """True iff the subgroup is a union of conjugacy classes."""
    g = subgroup.parent
    members = set(subgroup.members)
    return all(
        g.conjugate(x, h) in members for h in subgroup.members for x in range(g.order)
    )


# ---------------------------------------------------------------------------
# group functions (== finitely supported measures) and convolution


def _check_parent(group: FiniteGroup, *functions) -> list:
    out = []
    for f in functions:
        v = np.asarray(f, dtype=np.complex128).reshape(-1)
        if v.shape[0] != group.order:
            raise ParentMismatch(
                f"group function has length {v.shape[0]}, expected {group.order}"
            )
        out.append(v)
    return out


def convolve(group: FiniteGroup, x, y, kind: str) -> np.ndarray:
    """Convolution on the group, in the named convention.

    ``kind="measure"``:  (x * y)(g) = sum_h x(h) y(h^-1 g); delta_e is the unit.
    ``kind="function"``: the same sum weighted by 1/order, matching the
    normalized invariant average.
    """
    x, y = _check_parent(group, x, y)
    if kind not in ("measure", "function"):
        raise ValueError(f"unknown convolution kind {kind!r}")
    # out[g] = sum_h x[h] * y[inv(h) g]
    hg = group.mult[group.inverse, :]          # hg[h, g] = inv(h) * g
    out = x @ y[hg]
    if kind == "function":
        out = out / group.order
    return out


def involute(group: FiniteGroup, x) -> np.ndarray:
    """Adjoint weight vector: x*(g) = conj(x(g^-1))."""
    (x,) = _check_parent(group, x)
    return np.conj(x[group.inverse])


def delta(group: FiniteGroup, a: int) -> np.ndarray:
    v = np.zeros(group.order, dtype=np.complex128)
    v[a] = 1.0
    return v


def haar_average(group: FiniteGroup, x) -> complex:
    """(1/order) * sum_g x(g)."""
    (x,) = _check_parent(group, x)
    return complex(np.sum(x) / group.order)


# ---------------------------------------------------------------------------
# named groups used throughout the test-bench


def cyclic_group(n: int) -> FiniteGroup:
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n,
                       labels=[f"r{k}" for k in range(n)])


def _perm_group(perms, labels):
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.zeros((n, n), dtype=np.intp)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # act with q first, then p
            table[i, j] = index[tuple(p[q[k]] for k in range(len(p)))]
    return FiniteGroup(table, labels=labels)


def symmetric_group(n: int) -> FiniteGroup:
    perms = sorted(itertools.permutations(range(n)))
    return _perm_group(perms, labels=["".join(map(str, p)) for p in perms])


def symmetric_action(n: int) -> np.ndarray:
    """Point images of S_n elements, in the element order of symmetric_group."""
    return np.array(sorted(itertools.permutations(range(n))), dtype=np.intp)


def alternating_group(n: int) -> FiniteGroup:
    def parity(p):
        inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
        return inv % 2

    perms = sorted(p for p in itertools.permutations(range(n)) if parity(p) == 0)
    return _perm_group(perms, labels=["".join(map(str, p)) for p in perms])


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n; element (k, s) = rot^k * flip^s."""
    elems = [(k, s) for s in (0, 1) for k in range(n)]
    index = {e: i for i, e in enumerate(elems)}
    order = 2 * n
    table = np.zeros((order, order), dtype=np.intp)
    for i, (k1, s1) in enumerate(elems):
        for j, (k2, s2) in enumerate(elems):
            # (r^k1 f^s1)(r^k2 f^s2) = r^(k1 + k2*(-1)^s1) f^(s1+s2)
            k = (k1 + (k2 if s1 == 0 else -k2)) % n
            table[i, j] = index[(k, (s1 + s2) % 2)]
    labels = [f"r{k}" if s == 0 else f"r{k}f" for (k, s) in elems]
    return FiniteGroup(table, labels=labels)


def quaternion_group() -> FiniteGroup:
    """Q8 = {1, -1, i, -i, j, -j, k, -k}."""
    labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    # encode q = (sign, axis) with axis in {1, i, j, k}
    def decode(m):
        return (-1 if m % 2 else 1, m // 2)

    def encode(sign, axis):
        return 2 * axis + (0 if sign == 1 else 1)

    mul = {  # quaternion axis products: (axis, axis) -> (sign, axis)
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    table = np.zeros((8, 8), dtype=np.intp)
    for a in range(8):
        for b in range(8):
            s1, x1 = decode(a)
            s2, x2 = decode(b)
            s3, x3 = mul[(x1, x2)]
            table[a, b] = encode(s1 * s2 * s3, x3)
    return FiniteGroup(table, labels=labels)


def klein_four_group() -> FiniteGroup:
    return FiniteGroup(
        [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]],
        labels=["e", "a", "b", "ab"],
    )


FIXTURE_GROUPS = {
    "Z2": lambda: cyclic_group(2),
    "Z4": lambda: cyclic_group(4),
    "Z6": lambda: cyclic_group(6),
    "S3": lambda: symmetric_group(3),
    "D4": lambda: dihedral_group(4),
    "Q8": quaternion_group,
    "A4": lambda: alternating_group(4),
    "S4": lambda: symmetric_group(4),
}
