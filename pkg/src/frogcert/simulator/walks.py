"""Single-walk estimators.

Walks on the tree are only needed up to symmetry here, so they are run as
small Markov chains on depth (and, for the loop-erased walk, on the depth
of the meeting point with the starting path), vectorised over many walkers.
Walkers are processed in fixed batches, each with its own counter-based
generator, so results do not depend on ``threads``.

``simulate_upsilon`` and ``loop_erase`` work with explicit addresses and are
used by the episode simulator and for checks the depth chain cannot see.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import tree
from .config import ModelConfig
from .rng import FrogStream, address_bytes, block_generator

__all__ = [
    "BATCH",
    "HitEstimate",
    "PhiTransitions",
    "ROOT_STOP_PROB",
    "estimate_hit_prob",
    "estimate_phi_transitions",
    "loop_erase",
    "phi_step_after_down",
    "simulate_upsilon",
]

BATCH = 1 << 16
# chance that a walk at the root stepping away from its own branch is halted there
ROOT_STOP_PROB = Fraction(5, 8)

_TAG_HIT = 1
_TAG_PHI = 2
_TAG_DOWN = 3


@dataclass(frozen=True)
class HitEstimate:
    start_depth: int
    estimate: float
    stderr: float
    n: int
    hits: int
    truncated: int

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return self.estimate - z * self.stderr, self.estimate + z * self.stderr


def _batches(total: int):
    out, k = [], 0
    while total > 0:
        out.append((k, min(BATCH, total)))
        total -= BATCH
        k += 1
    return out


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _up_prob(d: np.ndarray) -> np.ndarray:
    # one parent among degree 3 (odd depth) or 4 (even, non-root) neighbours
    return np.where(d % 2 == 1, 1.0 / 3.0, 0.25)


def _hit_batch(start_depth: int, cfg: ModelConfig, block: int, size: int):
    rng = block_generator(cfg.seed, _TAG_HIT * 1000 + start_depth, block)
    d = np.full(size, start_depth, dtype=np.int32)
    target = start_depth - 1
    hits = 0
    for _ in range(cfg.step_cap):
        if d.size == 0:
            break
        up = rng.random(d.size) < _up_prob(d)
        d = d + np.where(up, -1, 1)
        done = d == target
        hits += int(done.sum())
        d = d[~done & (d <= cfg.depth_cap)]
    return hits, int(d.size)


def estimate_hit_prob(start_depth: int, config: ModelConfig | None = None, walks: int | None = None) -> HitEstimate:
    """Probability that a simple random walk from ``start_depth`` ever hits the parent of its start.

    By symmetry this is the chance of ever reaching depth ``start_depth - 1``.

    Walks exceeding ``depth_cap`` count as escaped; walks still alive after
    ``step_cap`` steps are excluded and reported as truncated.
    """
    cfg = config or ModelConfig()
    if start_depth < 1:
        raise ValueError("start_depth must be at least 1")
    if start_depth > cfg.depth_cap:
        raise ValueError("start_depth exceeds depth_cap")
    n = cfg.episodes if walks is None else walks
    res = _map(lambda b: _hit_batch(start_depth, cfg, *b), _batches(n), cfg.threads)
    hits = sum(r[0] for r in res)
    trunc = sum(r[1] for r in res)
    m = n - trunc
    p = hits / m if m else float("nan")
    se = math.sqrt(p * (1 - p) / m) if m else float("nan")
    return HitEstimate(start_depth, p, se, m, hits, trunc)


# -- loop-erased walk, via the (depth, meeting depth) chain -------------------
#
# State (d, m): current depth d and depth m of the last common ancestor with
# the start vertex v (depth n).  d == m means the walk sits on the path from
# the root to v.  Exit directions: 0 unknown, 1 up, 2 down along the path to
# v, 3 down elsewhere.


def _phi_batch(n: int, cfg: ModelConfig, block: int, size: int):
    rng = block_generator(cfg.seed, _TAG_PHI * 1000 + n, block)
    d = np.full(size, n, dtype=np.int32)
    m = np.full(size, n, dtype=np.int32)
    last_v = np.zeros(size, dtype=np.int8)   # last exit from v
    last_p = np.zeros(size, dtype=np.int8)   # last exit from the parent of v
    live = np.arange(size)
    stop_p = float(ROOT_STOP_PROB)
    for _ in range(cfg.step_cap):
        if live.size == 0:
            break
        dd, mm = d[live], m[live]
        u = rng.random(live.size)
        at_root = dd == 0
        on_path = dd == mm
        at_v = on_path & (dd == n)
        ch = np.where(dd % 2 == 0, 3, 2)
        deg = ch + (dd > 0)
        up = ~at_root & (u * deg < 1)
        # among downward moves, child index uniform over ch
        kid = np.floor(u * deg - (dd > 0)).astype(np.int32)
        down_path = ~up & on_path & ~at_v & (kid == 0)
        # record exits
        lv = last_v[live]
        last_v[live] = np.where(at_v, np.where(up, 1, 2), lv).astype(np.int8)
        if n >= 1:
            at_p = on_path & (dd == n - 1)
            lp = last_p[live]
            last_p[live] = np.where(at_p, np.where(up, 1, np.where(down_path, 2, 3)), lp).astype(np.int8)
        nd = np.where(up, dd - 1, dd + 1)
        nm = np.where(up, np.minimum(mm, dd - 1), np.where(down_path, dd + 1, mm))
        d[live], m[live] = nd, nm
        # halting at the root: stepped from the root into a child off the path
        halt = at_root & ~down_path & (rng.random(live.size) < stop_p)
        keep = ~halt & (nd <= cfg.depth_cap)
        live = live[keep]
    resolved = np.ones(size, dtype=bool)
    resolved[live] = False
    return last_v, last_p, resolved


@dataclass(frozen=True)
class PhiTransitions:
    """Frequencies of loop-erased steps toward the root.

    ``first_up[n]`` is the fraction of walks started at depth n whose
    loop-erased path first moves toward the root; ``up_after_up[n]`` is the
    fraction of walks started at depth n+1 whose first two loop-erased steps
    both move toward the root, among those whose first one does.
    """

    first_up: dict
    first_up_se: dict
    up_after_up: dict
    up_after_up_se: dict
    counts: dict
    truncated: dict

    def ci(self, table: str, n: int, z: float = 1.96) -> tuple[float, float]:
        est = getattr(self, table)[n]
        se = getattr(self, table + "_se")[n]
        return est - z * se, est + z * se


def _phi_run(n: int, cfg: ModelConfig, walks: int):
    res = _map(lambda b: _phi_batch(n, cfg, *b), _batches(walks), cfg.threads)
    up_first = total = up2 = total2 = trunc = 0
    for last_v, last_p, resolved in res:
        lv, lp = last_v[resolved], last_p[resolved]
        trunc += int((~resolved).sum())
        total += lv.size
        first = lv == 1
        up_first += int(first.sum())
        total2 += int(first.sum())
        up2 += int((first & (lp == 1)).sum())
    return up_first, total, up2, total2, trunc


def _prop(k, n):
    if n == 0:
        return float("nan"), float("nan")
    p = k / n
    return p, math.sqrt(p * (1 - p) / n)


def estimate_phi_transitions(config: ModelConfig | None = None, depths=(1, 2, 3), walks: int | None = None) -> PhiTransitions:
    """Run the loop-erased walk from each depth in ``depths``.

    Gives first-step frequencies for every depth, and the root-ward-after-
    root-ward frequency for level ``n-1`` from every start depth ``n >= 2``.
    """
    cfg = config or ModelConfig()
    w = cfg.episodes if walks is None else walks
    first_up, first_se, after, after_se, counts, truncated = {}, {}, {}, {}, {}, {}
    for n in depths:
        if n < 1 or n > cfg.depth_cap:
            raise ValueError(f"start depth {n} outside [1, depth_cap]")
        k1, t1, k2, t2, tr = _phi_run(n, cfg, w)
        first_up[n], first_se[n] = _prop(k1, t1)
        counts[n] = t1
        truncated[n] = tr
        if n >= 2:
            after[n - 1], after_se[n - 1] = _prop(k2, t2)
    return PhiTransitions(first_up, first_se, after, after_se, counts, truncated)


# -- explicit walks -------------------------------------------------------------


def simulate_upsilon(origin, stream: FrogStream, depth_cap: int, step_cap: int, halt_at_root: bool = True):
    """Simple random walk from ``origin`` with explicit addresses.

    Returns ``(path, halt_index, status)``.  ``path`` is the full walk until
    it would leave depth ``depth_cap`` (status "killed") or has made
    ``step_cap`` steps (status "open").  ``halt_index`` is the first index at
    which the walk stepped from the root into a child not on the way to
    ``origin`` and the halting coin (probability 5/8) came up; the halted
    walk is ``path[:halt_index + 1]``.  The coin is drawn at every such step
    whether or not a halt already happened, so the unhalted walk is the
    same sequence either way.
    """
    origin = tuple(origin)
    path = [origin]
    pos = origin
    halt = None
    stop_p = float(ROOT_STOP_PROB)
    for _ in range(step_cap):
        nb = tree.neighbors(pos)
        nxt = nb[stream.below(len(nb))]
        if not pos and origin:
            coin = stream.uniform()
            if halt is None and nxt[0] != origin[0] and coin < stop_p:
                halt = len(path)
        if len(nxt) > depth_cap:
            return path, halt, "killed"
        path.append(nxt)
        pos = nxt
    return path, halt, "open"


def loop_erase(path, stop_at_root: bool = True) -> list:
    """Chronological loop erasure; optionally stop at the first root visit."""
    out: list = []
    index: dict = {}
    for v in path:
        j = index.get(v)
        if j is not None:
            for w in out[j + 1:]:
                del index[w]
            del out[j + 1:]
        else:
            index[v] = len(out)
            out.append(v)
    if stop_at_root and path and path[0] != tree.ROOT and tree.ROOT in index:
        out = out[: index[tree.ROOT] + 1]
    return out


def phi_step_after_down(start=(0,), config: ModelConfig | None = None, walks: int = 20_000) -> dict:
    """Counts of the second loop-erased step given that the first went down.

    Keys are the child index taken at the second step (or "up", which a
    non-backtracking path can never take).
    """
    cfg = config or ModelConfig(depth_cap=12, step_cap=10_000)
    start = tuple(start)
    counts: dict = {}
    for i in range(walks):
        s = FrogStream(cfg.seed, i, address_bytes(start), tag=_TAG_DOWN)
        path, halt, status = simulate_upsilon(start, s, cfg.depth_cap, cfg.step_cap)
        if status == "open":
            continue
        ups = path if halt is None else path[: halt + 1]
        phi = loop_erase(ups)
        if len(phi) < 3 or len(phi[1]) != len(start) + 1:
            continue
        nxt = phi[2]
        key = "up" if len(nxt) < len(phi[1]) else nxt[-1]
        counts[key] = counts.get(key, 0) + 1
    return counts
