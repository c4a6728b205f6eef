"""Frog-model episodes on the implicit tree.

All three variants share one synchronous engine: each tick every active
frog proposes its next vertex, down moves into the same child are grouped,
edge quotas are applied (self-similar variant only), and landings wake
sleeping frogs, which start moving on the next tick.  Frogs are ordered
by their origin address (shallower first), and that order breaks ties.

``run_episode`` draws moves from per-frog counter-based streams.
``run_coupled_episode`` instead fixes one random-walk path per frog and
feeds the original, non-backtracking and self-similar models with that
path, its loop erasure and the quota-stopped loop erasure respectively.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import tree
from .config import ModelConfig
from .rng import FrogStream, address_bytes
from .walks import simulate_upsilon

__all__ = [
    "CoupledEpisode",
    "EpisodeOutcome",
    "batch_summary",
    "erasure_indices",
    "outcomes_to_csv",
    "run_batch",
    "run_coupled_batch",
    "run_coupled_episode",
    "run_episode",
]

_TAG_EPISODE = 10
_TAG_COUPLED = 11


@dataclass
class EpisodeOutcome:
    root_hits: int
    activated_frogs: int
    truncated: bool
    transition_tallies: dict | None = None
    # simultaneous first landings, where the activator is picked by frog order
    ambiguous_activations: int = 0
    # unstopped downward traversals per edge, keyed by the child address
    edge_traversals: dict = field(default_factory=dict, repr=False)
    paths: dict | None = field(default=None, repr=False)


class _Frog:
    __slots__ = ("origin", "key", "pos", "prev", "k", "stream", "path")

    def __init__(self, origin):
        self.origin = origin
        self.key = tree.frog_order(origin)
        self.pos = origin
        self.prev = None
        self.k = 0
        self.stream = None
        self.path = None


def _simulate(variant, make_frog, propose, depth_cap, tick_cap, tallies=False, record=False):
    selfsim = variant == "selfsimilar"
    absorb = variant != "original"
    root = make_frog(tree.ROOT)
    active = [root]
    activated = {tree.ROOT}
    activator: dict = {}
    admits: dict = {}
    tally: dict | None = {} if tallies else None
    paths: dict | None = {tree.ROOT: [tree.ROOT]} if record else None
    hits = 0
    truncated = False
    ambiguous = 0
    tick = 0
    while active and (tick_cap is None or tick < tick_cap):
        tick += 1
        moving = []
        for f in active:
            nxt = propose(f)
            if nxt is None:
                continue
            if len(nxt) > depth_cap:
                truncated = True
                continue
            moving.append((f, nxt))
        # quotas on downward moves, per child vertex
        stopped = set()
        if selfsim:
            groups: dict = {}
            for f, nxt in moving:
                if len(nxt) > len(f.pos):
                    groups.setdefault(nxt, []).append(f)
            for child, fs in groups.items():
                fs.sort(key=lambda fr: fr.key)
                par = child[:-1]
                for f in fs:
                    n = admits.get(child, 0)
                    if n == 0:
                        ok = True
                    elif len(child) % 2 == 0 and n == 1:
                        designated = f.origin == par or f.origin == activator.get(par)
                        ok = designated and tree.sibling(child) not in activated
                    else:
                        ok = False
                    if ok:
                        admits[child] = n + 1
                    else:
                        stopped.add(id(f))
        else:
            for f, nxt in moving:
                if len(nxt) > len(f.pos):
                    admits[nxt] = admits.get(nxt, 0) + 1
        landers: dict = {}
        survivors = []
        for f, nxt in moving:
            if tally is not None:
                row = tally.setdefault(len(f.pos), [0, 0])
                row[len(nxt) > len(f.pos)] += 1
            f.prev, f.pos = f.pos, nxt
            f.k += 1
            if paths is not None:
                paths.setdefault(f.origin, [f.origin]).append(nxt)
            if nxt not in activated:
                landers.setdefault(nxt, []).append(f)
            if not nxt:
                hits += 1
                if absorb:
                    continue
            if id(f) in stopped:
                continue
            survivors.append(f)
        new = []
        for v, fs in landers.items():
            fs.sort(key=lambda fr: fr.key)
            admitted = [f for f in fs if id(f) not in stopped] or fs
            activated.add(v)
            activator[v] = admitted[0].origin
            if len(fs) > 1:
                ambiguous += 1
            new.append(make_frog(v))
        active = survivors + new
        active.sort(key=lambda fr: fr.key)
    if active:
        truncated = True
    return EpisodeOutcome(
        root_hits=hits,
        activated_frogs=len(activated),
        truncated=truncated,
        transition_tallies=tally,
        ambiguous_activations=ambiguous,
        edge_traversals=admits,
        paths=paths,
    )


def _sampling_proposer(nonbacktracking: bool):
    def propose(f: _Frog):
        nb = tree.neighbors(f.pos)
        if nonbacktracking and f.prev is not None:
            nb = [v for v in nb if v != f.prev]
        return nb[f.stream.below(len(nb))]

    return propose


def run_episode(config: ModelConfig, episode_index: int, tallies: bool = False, record_paths: bool = False) -> EpisodeOutcome:
    """One synchronous episode of the configured variant.

    Frogs that would step below ``depth_cap`` are killed and the episode is
    flagged truncated; so is an episode still active after ``step_cap`` ticks.
    """

    def make_frog(v):
        f = _Frog(v)
        f.stream = FrogStream(config.seed, episode_index, address_bytes(v), tag=_TAG_EPISODE)
        return f

    propose = _sampling_proposer(config.variant != "original")
    return _simulate(config.variant, make_frog, propose, config.depth_cap, config.step_cap, tallies, record_paths)


# -- coupled episodes -----------------------------------------------------------


def erasure_indices(path, stop_at_root: bool = True) -> list[tuple[int, int]]:
    """Pairs (t_k, s_k): t_0 = 0, s_k the last visit to path[t_k], t_{k+1} = s_k + 1.

    The vertices path[t_k] form the loop erasure.  With ``stop_at_root``
    and a non-root start, the sequence ends at the first root entry.
    """
    last: dict = {}
    for i, v in enumerate(path):
        last[v] = i
    out = []
    t = 0
    while t < len(path):
        v = path[t]
        s = last[v]
        out.append((t, s))
        if stop_at_root and not v and path[0]:
            break
        t = s + 1
    return out


@dataclass
class CoupledEpisode:
    episode_index: int
    original_paths: dict        # origin -> (random-walk path, halt index or None)
    derived_paths: dict         # origin -> loop-erased path
    erasure: dict               # origin -> [(t_k, s_k)]
    subset_ok: bool
    counts: tuple               # (Z, V', V)
    truncated: bool
    outcomes: dict = field(repr=False, default_factory=dict)

    @property
    def ordered(self) -> bool:
        z, vp, v = self.counts
        return v <= vp <= z


def _is_subsequence(sub, seq) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def run_coupled_episode(config: ModelConfig, episode_index: int) -> CoupledEpisode:
    """Original, non-backtracking and self-similar models driven by shared paths.

    Each frog's random walk runs until it would leave ``depth_cap`` (the
    walk's natural end in this window) or for ``step_cap`` steps; a walk still
    open at ``step_cap`` may hold an unclosed loop, so the episode is marked
    truncated.
    """
    walks: dict = {}
    derived: dict = {}
    erasure: dict = {}
    open_walk = [False]

    def ensure(v):
        if v in walks:
            return
        s = FrogStream(config.seed, episode_index, address_bytes(v), tag=_TAG_COUPLED)
        path, halt, status = simulate_upsilon(v, s, config.depth_cap, config.step_cap)
        if status == "open":
            open_walk[0] = True
        ups = path if halt is None else path[: halt + 1]
        idx = erasure_indices(ups, stop_at_root=True)
        walks[v] = (path, halt)
        erasure[v] = idx
        derived[v] = [ups[t] for t, _ in idx]

    def frog_factory(kind):
        def make(v):
            ensure(v)
            f = _Frog(v)
            f.path = walks[v][0] if kind == "walk" else derived[v]
            return f

        return make

    def follow(f: _Frog):
        return f.path[f.k + 1] if f.k + 1 < len(f.path) else None

    # the window is bounded by path lengths, so no tick cap is needed
    cap = config.depth_cap
    orig = _simulate("original", frog_factory("walk"), follow, cap, None, record=False)
    nb = _simulate("nonbacktracking", frog_factory("erased"), follow, cap, None, record=False)
    ss = _simulate("selfsimilar", frog_factory("erased"), follow, cap, None, record=True)

    subset_ok = True
    for v, (path, halt) in walks.items():
        ups = path if halt is None else path[: halt + 1]
        if not _is_subsequence(derived[v], ups):
            subset_ok = False
    for v, sp in ss.paths.items():
        if sp != derived[v][: len(sp)]:
            subset_ok = False
    return CoupledEpisode(
        episode_index=episode_index,
        original_paths=walks,
        derived_paths=derived,
        erasure=erasure,
        subset_ok=subset_ok,
        counts=(orig.root_hits, nb.root_hits, ss.root_hits),
        truncated=open_walk[0],
        outcomes={"original": orig, "nonbacktracking": nb, "selfsimilar": ss},
    )


# -- batches and export -----------------------------------------------------------


def _ordered_map(fn, n: int, threads: int):
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(n), chunksize=64))


def run_batch(config: ModelConfig) -> list[EpisodeOutcome]:
    return _ordered_map(lambda i: run_episode(config, i), config.episodes, config.threads)


def run_coupled_batch(config: ModelConfig) -> dict:
    """Aggregate tallies over ``config.episodes`` coupled episodes."""

    def one(i):
        ep = run_coupled_episode(config, i)
        return ep.truncated, ep.subset_ok, ep.ordered, ep.counts

    rows = _ordered_map(one, config.episodes, config.threads)
    kept = [r for r in rows if not r[0]]
    sums = [sum(r[3][j] for r in kept) for j in range(3)]
    n = len(kept)
    return {
        "episodes": config.episodes,
        "truncated": len(rows) - n,
        "exclusion_rate": (len(rows) - n) / len(rows),
        "subset_violations": sum(1 for r in kept if not r[1]),
        "order_violations": sum(1 for r in kept if not r[2]),
        "mean_Z": sums[0] / n if n else None,
        "mean_V_prime": sums[1] / n if n else None,
        "mean_V": sums[2] / n if n else None,
    }


def batch_summary(outcomes: list[EpisodeOutcome], config: ModelConfig) -> dict:
    kept = [o.root_hits for o in outcomes if not o.truncated]
    n = len(kept)
    mean = sum(kept) / n if n else None
    if n > 1:
        var = sum((h - mean) ** 2 for h in kept) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = None
    tallies: dict = {}
    for o in outcomes:
        for d, (u, dn) in (o.transition_tallies or {}).items():
            row = tallies.setdefault(str(d), [0, 0])
            row[0] += u
            row[1] += dn
    return {
        "variant": config.variant,
        "episodes": len(outcomes),
        "truncated": len(outcomes) - n,
        "mean_root_hits": mean,
        "stderr_root_hits": stderr,
        "mean_root_hits_all": sum(o.root_hits for o in outcomes) / len(outcomes),
        "mean_activated": sum(o.activated_frogs for o in outcomes) / len(outcomes),
        "ambiguous_activations": sum(o.ambiguous_activations for o in outcomes),
        "tallies": tallies,
    }


def outcomes_to_csv(outcomes: list[EpisodeOutcome], variant: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["episode_index", "variant", "root_hits", "truncated"])
    for i, o in enumerate(outcomes):
        w.writerow([i, variant, o.root_hits, int(o.truncated)])
    return buf.getvalue()


def summary_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=1)
