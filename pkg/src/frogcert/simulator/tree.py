"""Implicit addressing for the alternating tree.

A vertex is the tuple of child indices on the path from the root, so the
root is ``()`` and the parent is the prefix.  Even-depth vertices have
``EVEN_CHILDREN`` children and odd-depth vertices ``ODD_CHILDREN``.
Nothing is allocated; callers keep whatever per-vertex ledger they need
in dicts keyed by address.
"""

from __future__ import annotations

from typing import Tuple

NodeAddress = Tuple[int, ...]

ROOT: NodeAddress = ()
EVEN_CHILDREN = 3
ODD_CHILDREN = 2


def num_children(depth: int, even: int = EVEN_CHILDREN, odd: int = ODD_CHILDREN) -> int:
    return even if depth % 2 == 0 else odd


def degree(depth: int) -> int:
    return num_children(depth) + (depth > 0)


def is_valid(addr: NodeAddress) -> bool:
    return all(0 <= c < num_children(d) for d, c in enumerate(addr))


def parent(addr: NodeAddress) -> NodeAddress:
    if not addr:
        raise ValueError("the root has no parent")
    return addr[:-1]


def children(addr: NodeAddress) -> list[NodeAddress]:
    return [addr + (i,) for i in range(num_children(len(addr)))]


def neighbors(addr: NodeAddress) -> list[NodeAddress]:
    """Parent first (when there is one), then children in index order."""
    kids = children(addr)
    if addr:
        return [addr[:-1]] + kids
    return kids


def sibling(addr: NodeAddress) -> NodeAddress:
    """The other child of an odd-depth parent (only defined for binary branchings)."""
    if len(addr) < 2 or len(addr) % 2 != 0:
        raise ValueError("siblings are unique only below odd-depth vertices")
    return addr[:-1] + (1 - addr[-1],)


def frog_order(addr: NodeAddress):
    """Sort key used for tie-breaking: shallower first, then lexicographic."""
    return (len(addr), addr)


def is_ancestor(anc: NodeAddress, addr: NodeAddress) -> bool:
    return len(anc) <= len(addr) and addr[: len(anc)] == anc
