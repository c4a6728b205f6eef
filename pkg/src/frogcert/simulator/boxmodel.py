"""Exact laws of the finite box models, by enumeration over rationals.

A box stands in for a whole subtree: the first frog to reach it is
stopped, and the box releases a random number of fresh frogs, drawn from
``U``, which then walk up out of it.  All walks are non-backtracking and
stop at the target or at any box; downward edges obey the self-similar
quotas.  Every tick is synchronous and the enumeration merges equal
states, so the result is the exact distribution of target hits.

Models:

* ``A-star``: root -- a -- {b, b'}, three boxes under each of b and b'.
  A frog starts awake at the root; frogs sleep at a, b and b'.  Target: root.
* ``L-star``: a -- b -- three boxes.  Two frogs start at b, one fresh and
  one that has just come down from a.  Target: a.
* ``H-star``: as ``L-star`` with a second frog coming down from a.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..interval import Interval, as_interval, iv_const
from ..operators import GeneratingFunctionHandle

__all__ = [
    "MAX_SUPPORT",
    "MODELS",
    "FiniteDistribution",
    "enumerate_box_model",
    "pgf_exact",
    "pgf_handle",
    "pgf_of",
]

MAX_SUPPORT = 3
MODELS = ("A-star", "L-star", "H-star")


@dataclass(frozen=True)
class FiniteDistribution:
    """Exact law on {0, ..., K}."""

    probabilities: tuple

    def __post_init__(self):
        ps = tuple(Fraction(p) for p in self.probabilities)
        if not ps:
            raise ValueError("distribution needs at least one entry")
        if any(p < 0 for p in ps):
            raise ValueError("probabilities must be nonnegative")
        if sum(ps) != 1:
            raise ValueError(f"probabilities sum to {sum(ps)}, not 1")
        while len(ps) > 1 and ps[-1] == 0:
            ps = ps[:-1]
        object.__setattr__(self, "probabilities", ps)

    @property
    def support_bound(self) -> int:
        return len(self.probabilities) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.probabilities[k] if 0 <= k < len(self.probabilities) else Fraction(0)

    @classmethod
    def delta(cls, k: int) -> FiniteDistribution:
        return cls(tuple(Fraction(int(i == k)) for i in range(k + 1)))

    @classmethod
    def uniform(cls, values) -> FiniteDistribution:
        values = list(values)
        ps = [Fraction(0)] * (max(values) + 1)
        for v in values:
            ps[v] += Fraction(1, len(values))
        return cls(tuple(ps))

    @classmethod
    def from_counts(cls, weights: dict) -> FiniteDistribution:
        total = sum(weights.values())
        ps = [Fraction(0)] * (max(weights) + 1)
        for k, w in weights.items():
            ps[k] += Fraction(w) / total
        return cls(tuple(ps))

    def as_dict(self) -> dict:
        return {str(k): f"{p.numerator}/{p.denominator}" for k, p in enumerate(self.probabilities)}


def pgf_exact(dist: FiniteDistribution, x) -> Fraction:
    x = Fraction(x)
    acc = Fraction(0)
    for p in reversed(dist.probabilities):
        acc = acc * x + p
    return acc


def pgf_of(dist: FiniteDistribution, x) -> Interval:
    """Enclosure of sum_k p_k x^k (Horner in interval arithmetic)."""
    x = as_interval(x)
    acc = iv_const(dist.probabilities[-1]) + 0 * x
    for p in reversed(dist.probabilities[:-1]):
        acc = acc * x + iv_const(p)
    return acc


def pgf_handle(dist: FiniteDistribution) -> GeneratingFunctionHandle:
    return GeneratingFunctionHandle(lambda x: pgf_of(dist, x), f"pgf{dist.as_dict()}")


# -- model layouts ---------------------------------------------------------------

_DEPTH = {"R": 0, "a": 1, "b": 2, "b'": 2}  # anything else sits at depth 3


def _layout(model: str):
    if model == "A-star":
        verts = ["R", "a", "b", "b'"]
        par = {"a": "R", "b": "a", "b'": "a"}
        under = ("b", "b'")
    else:
        verts = ["a", "b"]
        par = {"b": "a"}
        under = ("b",)
    boxes = [f"{p}.{i}" for p in under for i in range(3)]
    for bx in boxes:
        par[bx] = bx.split(".")[0]
    nbrs = {v: [] for v in verts + boxes}
    for c, p in par.items():
        nbrs[c].append(p)
        nbrs[p].append(c)
    return par, nbrs, set(boxes)


def _depth(v: str) -> int:
    return _DEPTH.get(v, 3)


def _label(origin: str) -> str:
    # only the root frog and a's frog can ever be designated; every other
    # origin behaves identically, so it is collapsed to keep states merged
    return origin if origin in ("R", "a") else "*"


def _order(frog):
    pos, prev, origin = frog
    return (_depth(origin), origin, pos, prev or "")


def _canon(frogs):
    return tuple(sorted(frogs, key=_order))


def _initial(model: str):
    if model == "A-star":
        frogs = [("R", None, "R")]
        awake = frozenset({"R"})
        target = "R"
    else:
        frogs = [("b", None, "*"), ("b", "a", "a")]
        if model == "H-star":
            frogs.append(("b", "a", "a"))
        awake = frozenset({"b"})
        target = "a"
    # state: frogs, awake/hit vertices, quota counts on odd->even edges, activator of a
    return (_canon(frogs), awake, (), ()), target


def _estimate_size(model: str, k: int) -> int:
    nboxes = 6 if model == "A-star" else 3
    # every box can release k frogs, each with up to 3 moves per tick
    return (k + 1) ** nboxes * 3 ** (nboxes * k)


def enumerate_box_model(model: str, U: FiniteDistribution) -> FiniteDistribution:
    """Exact law of the number of target hits in the given box model."""
    if model not in MODELS:
        raise ValueError(f"unknown box model {model!r}; expected one of {MODELS}")
    if U.support_bound > MAX_SUPPORT:
        raise ValueError(
            f"support bound {U.support_bound} exceeds {MAX_SUPPORT}; "
            f"enumeration would visit on the order of {_estimate_size(model, U.support_bound):.3g} outcomes"
        )
    par, nbrs, boxes = _layout(model)
    start, target = _initial(model)
    release = [(k, p) for k, p in enumerate(U.probabilities) if p > 0]
    # configuration -> {hits so far: probability}; the hit count never
    # influences the dynamics, so configurations are merged across it
    live = {start: {0: Fraction(1)}}
    done: dict = {}
    while live:
        nxt_states: dict = {}
        for state, by_hits in live.items():
            for s2, dh, q in _step(state, par, nbrs, boxes, target, release):
                dest = nxt_states.setdefault(s2, {}) if s2[0] else done
                for h, ph in by_hits.items():
                    dest[h + dh] = dest.get(h + dh, 0) + ph * q
        live = nxt_states
    total = max(done) + 1
    return FiniteDistribution(tuple(done.get(k, Fraction(0)) for k in range(total)))


def _compositions(m: int, c: int):
    """All ways to put m identical frogs onto c options, as count tuples."""
    if c == 1:
        yield (m,)
        return
    for k in range(m, -1, -1):
        for rest in _compositions(m - k, c - 1):
            yield (k,) + rest


def _joint_moves(frogs, nbrs):
    """Joint moves of a canonical frog tuple, merging interchangeable frogs.

    Yields (choice tuple aligned with ``frogs``, probability).
    """
    groups = [(f, len(list(g))) for f, g in itertools.groupby(frogs)]
    per_group = []
    for f, m in groups:
        opts = [v for v in nbrs[f[0]] if v != f[1]]
        c = len(opts)
        outs = []
        for comp in _compositions(m, c):
            coeff = math.factorial(m)
            for k in comp:
                coeff //= math.factorial(k)
            picks = tuple(v for v, k in zip(opts, comp) for _ in range(k))
            outs.append((picks, Fraction(coeff, c**m)))
        per_group.append(outs)
    for combo in itertools.product(*per_group):
        choice = tuple(v for picks, _ in combo for v in picks)
        p = Fraction(1)
        for _, q in combo:
            p *= q
        yield choice, p


def _step(state, par, nbrs, boxes, target, release):
    frogs, awake, admits, activators = state
    admits0 = dict(admits)
    act0 = dict(activators)
    out: dict = {}
    for choice, p in _joint_moves(frogs, nbrs):
        adm = dict(admits0)
        act = dict(act0)
        stopped = set()
        # quotas, frogs already in canonical order
        groups: dict = {}
        for i, (f, v) in enumerate(zip(frogs, choice)):
            if par.get(v) == f[0]:
                groups.setdefault(v, []).append(i)
        for child, idxs in groups.items():
            parent = par[child]
            for i in idxs:
                n = adm.get(child, 0)
                if n == 0:
                    ok = True
                elif _depth(child) % 2 == 0 and n == 1:
                    origin = frogs[i][2]
                    sib = [c for c in nbrs[parent] if c != par.get(parent) and c != child]
                    designated = origin == parent or origin == act.get(parent)
                    ok = designated and all(s not in awake for s in sib)
                else:
                    ok = False
                if ok:
                    adm[child] = n + 1
                else:
                    stopped.add(i)
        new_hits = 0
        moved = []
        new_awake = set(awake)
        fresh = []
        new_boxes = []
        for i, (f, v) in enumerate(zip(frogs, choice)):
            if v == target:
                new_hits += 1
                continue
            if v in boxes:
                if v not in new_awake:
                    new_awake.add(v)
                    new_boxes.append(v)
                continue
            if v not in new_awake:
                new_awake.add(v)
                act[v] = f[2]
                fresh.append((v, None, _label(v)))
            if i in stopped:
                continue
            moved.append((v, f[0], f[2]))
        base = moved + fresh
        for ks in itertools.product(release, repeat=len(new_boxes)):
            q = p
            frogs2 = list(base)
            for bx, (k, pk) in zip(new_boxes, ks):
                q *= pk
                frogs2.extend([(bx, None, _label(bx))] * k)
            s2 = (
                _canon(frogs2),
                frozenset(new_awake),
                tuple(sorted((c, n) for c, n in adm.items() if _depth(c) % 2 == 0)),
                tuple(sorted((v, o) for v, o in act.items() if v == "a")),
            )
            key = (s2, new_hits)
            out[key] = out.get(key, 0) + q
    return [(s2, h, q) for (s2, h), q in out.items()]
