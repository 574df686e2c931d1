"""Bit strings <-> naturals <-> unordered topology trees.

Bit strings are plain ``str`` objects over ``"01"`` (MSB first). Trees are
immutable :class:`TopologyTree` values; sibling order is kept in storage but
never affects the decoded value.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union


class InvalidInput(ValueError):
    """Raised when an operation receives a value outside its domain."""


@dataclass(frozen=True)
class Scheme:
    """Greedy power decomposition used by the tree codec."""

    name: str
    power: int


SQUARES = Scheme("squares", 2)
CUBES = Scheme("cubes", 3)
SCHEMES = {s.name: s for s in (SQUARES, CUBES)}

SchemeLike = Union[Scheme, str]


def get_scheme(scheme: SchemeLike) -> Scheme:
    if isinstance(scheme, Scheme):
        return scheme
    try:
        return SCHEMES[scheme]
    except KeyError:
        raise InvalidInput(f"unknown decomposition scheme {scheme!r}") from None


@dataclass(frozen=True, eq=True)
class TopologyTree:
    children: tuple = ()

    @classmethod
    def leaf(cls) -> "TopologyTree":
        return cls(())

    @classmethod
    def chain(cls, length: int) -> "TopologyTree":
        """A path of ``length`` nodes (root plus ``length - 1`` nested descendants)."""
        if length < 1:
            raise InvalidInput("chain length must be >= 1")
        t = cls(())
        for _ in range(length - 1):
            t = cls((t,))
        return t

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def iter_nodes(self) -> Iterator["TopologyTree"]:
        """Pre-order traversal (iterative, safe for deep trees)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __len__(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def depth(self) -> int:
        best = 0
        stack = [(self, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children)
        return best

    def to_nested(self):
        """Nested-list form, handy for printing and JSON."""
        return [c.to_nested() for c in self.children]

    @classmethod
    def from_nested(cls, nested: Sequence) -> "TopologyTree":
        return cls(tuple(cls.from_nested(c) for c in nested))

    def __repr__(self) -> str:
        if len(self) > 40:
            return f"TopologyTree(<{len(self)} nodes>)"
        return f"TopologyTree({self.to_nested()!r})"


def _check_bits(b: str) -> None:
    if not isinstance(b, str) or b.strip("01"):
        raise InvalidInput("bit strings must contain only '0' and '1'")


def nat_of_bits(b: str) -> int:
    """Prepend a 1 and read the result as a binary number."""
    _check_bits(b)
    return int("1" + b, 2)


def bits_of_nat(n: int) -> str:
    """Binary representation of ``n`` with its leading 1 removed."""
    if n < 1:
        raise InvalidInput("bits_of_nat requires n >= 1")
    return bin(n)[3:]


def iroot(n: int, p: int) -> int:
    """Exact floor of the p-th root of ``n`` by binary search on integers."""
    if n < 0:
        raise InvalidInput("iroot requires n >= 0")
    if n < 2:
        return n
    # 2**(bits // p) <= root < 2**(bits // p + 1)
    k = (n.bit_length() - 1) // p
    lo, hi = 1 << k, 1 << (k + 1)
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if mid**p <= n:
            lo = mid
        else:
            hi = mid
    return lo


def isqrt(n: int) -> int:
    return iroot(n, 2)


def icbrt(n: int) -> int:
    return iroot(n, 3)


def power_decomposition(n: int, p: int) -> list[int]:
    """Greedy decomposition ``n = 1 + sum(x**p for x in result)``."""
    if n < 1:
        raise InvalidInput("decomposition requires n >= 1")
    n -= 1
    parts = []
    while n:
        r = iroot(n, p)
        parts.append(r)
        n -= r**p
    return parts


def square_decomposition(n: int) -> list[int]:
    return power_decomposition(n, 2)


def cube_decomposition(n: int) -> list[int]:
    return power_decomposition(n, 3)


def nat_to_tree(n: int, scheme: SchemeLike = SQUARES) -> TopologyTree:
    p = get_scheme(scheme).power
    if n < 1:
        raise InvalidInput("nat_to_tree requires n >= 1")
    memo: dict[int, TopologyTree] = {1: TopologyTree()}

    def build(m: int) -> TopologyTree:
        t = memo.get(m)
        if t is None:
            t = TopologyTree(tuple(build(x) for x in power_decomposition(m, p)))
            memo[m] = t
        return t

    return build(n)


class ValueTooLarge(ArithmeticError):
    """A subtree's value exceeded the caller's bit budget."""


def tree_to_nat(tree: TopologyTree, scheme: SchemeLike = SQUARES,
                max_bits: int | None = None, _memo: dict | None = None) -> int:
    """Value of ``tree``: ``1 + sum(child_value ** p)``.

    ``max_bits`` bounds the bit length of every intermediate value; a subtree
    that exceeds it raises :class:`ValueTooLarge` (parents are never smaller
    than their children, so the whole tree would exceed it too). ``_memo`` may
    be shared between calls on trees with common subtrees.
    """
    p = get_scheme(scheme).power
    memo = {} if _memo is None else _memo
    stack = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children if id(c) not in memo)
            continue
        v = 1
        for c in node.children:
            v += memo[id(c)] ** p
        if max_bits is not None and v.bit_length() > max_bits:
            raise ValueTooLarge(f"subtree value exceeds {max_bits} bits")
        memo[key] = v
    return memo[id(tree)]


def encode_bits(b: str, scheme: SchemeLike = SQUARES) -> TopologyTree:
    return nat_to_tree(nat_of_bits(b), scheme)


def decode_tree(tree: TopologyTree, scheme: SchemeLike = SQUARES,
                max_bits: int | None = None) -> str:
    return bits_of_nat(tree_to_nat(tree, scheme, max_bits=max_bits))


def footprint(tree: TopologyTree) -> int:
    """F(T) = 1 + number of descendants."""
    return len(tree)


def total_footprint(tree: TopologyTree) -> int:
    """Sum of F over every node, i.e. the sum of (depth + 1) in one pass."""
    total = 0
    stack = [(tree, 1)]
    while stack:
        node, d = stack.pop()
        total += d
        stack.extend((c, d + 1) for c in node.children)
    return total


def canonicalize(tree: TopologyTree, scheme: SchemeLike = SQUARES) -> TopologyTree:
    """Sort every sibling list by subtree value (equal values are isomorphic)."""
    memo: dict[int, int] = {}
    tree_to_nat(tree, scheme, _memo=memo)
    out: dict[int, TopologyTree] = {}
    stack = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children)
            continue
        kids = sorted(node.children, key=lambda c: memo[id(c)])
        out[id(node)] = TopologyTree(tuple(out[id(c)] for c in kids))
    return out[id(tree)]


def is_isomorphic(a: TopologyTree, b: TopologyTree, scheme: SchemeLike = SQUARES) -> bool:
    return canonicalize(a, scheme) == canonicalize(b, scheme)


def random_bits(rng, length: int, p_one: float = 0.5) -> str:
    """Bernoulli bit string drawn from a numpy Generator."""
    return "".join("1" if x else "0" for x in (rng.random(length) < p_one))


def bits_of_bytes(data: bytes) -> str:
    return "".join(f"{byte:08b}" for byte in data)


def bytes_of_bits(bits: str) -> bytes:
    if len(bits) % 8:
        raise InvalidInput("bit string length is not a multiple of 8")
    _check_bits(bits)
    return int(bits, 2).to_bytes(len(bits) // 8, "big") if bits else b""


def shuffle_siblings(tree: TopologyTree, rng) -> TopologyTree:
    """Recursively permute every sibling list (numpy Generator)."""
    kids = [shuffle_siblings(c, rng) for c in tree.children]
    order = rng.permutation(len(kids)) if kids else []
    return TopologyTree(tuple(kids[i] for i in order))


def tree_stats(tree: TopologyTree) -> dict:
    return {
        "nodes": len(tree),
        "depth": tree.depth(),
        "leaves": sum(1 for n in tree.iter_nodes() if n.is_leaf),
        "max_children": max(len(n.children) for n in tree.iter_nodes()),
        "total_footprint": total_footprint(tree),
    }


__all__ = [
    "InvalidInput", "Scheme", "SQUARES", "CUBES", "TopologyTree", "ValueTooLarge",
    "nat_of_bits", "bits_of_nat", "iroot", "isqrt", "icbrt", "square_decomposition",
    "cube_decomposition", "power_decomposition", "nat_to_tree", "tree_to_nat",
    "encode_bits", "decode_tree", "footprint", "total_footprint", "canonicalize",
    "is_isomorphic", "random_bits", "bits_of_bytes", "bytes_of_bits",
    "shuffle_siblings", "tree_stats", "get_scheme",
]
