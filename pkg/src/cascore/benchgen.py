"""ABCD-lite: a seeded benchmark generator with planted overlapping
communities, background noise and outlier nodes.

Degrees and community sizes follow truncated discrete power laws. Each
non-outlier node sends a ``1 - xi`` share of its degree into its own
communities and the rest into a global background graph; outliers only
use the background. Both parts are wired by random stub pairing, with
self-loops and repeated edges rejected over a bounded number of retries.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .graph import Cover, Graph

PAIRING_ROUNDS = 20


@dataclass(frozen=True)
class GenConfig:
    n: int = 1000
    gamma: float = 2.5
    d_min: int = 5
    d_max: int = 50
    beta: float = 1.5
    s_min: int = 30
    s_max: int = 100
    xi: float = 0.2
    n_outliers: int = 0
    eta: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 <= self.n_outliers < self.n:
            raise ValueError("n_outliers must satisfy 0 <= n_outliers < n")
        if self.d_min < 1:
            raise ValueError("d_min must be at least 1")
        if self.d_max < self.d_min:
            raise ValueError("d_max must be >= d_min")
        if self.s_min < 2:
            raise ValueError("s_min must be at least 2")
        if self.s_max < self.s_min:
            raise ValueError("s_max must be >= s_min")
        if self.s_max > self.n - self.n_outliers:
            raise ValueError("s_max exceeds the number of non-outlier nodes")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")
        if self.eta < 1.0:
            raise ValueError("eta must be at least 1")
        if self.gamma <= 1.0 or self.beta <= 1.0:
            raise ValueError("power-law exponents must exceed 1")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "GenConfig":
        """Parse ``key=value`` lines (``#`` comments allowed)."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise ValueError(f"line {lineno}: expected key=value with a known key, got {line!r}")
            values[key] = val.strip()
        values.update({k: v for k, v in overrides.items() if v is not None})
        converted = {}
        for key, val in values.items():
            kind = types[key]
            converted[key] = int(val) if kind in ("int", int) else float(val)
        return cls(**converted)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())


def sample_power_law(count: int, exponent: float, lo: int, hi: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. integers from ``P(x) ~ x**-exponent`` on ``lo..hi``."""
    if lo > hi:
        raise ValueError(f"empty support: lo={lo} > hi={hi}")
    if exponent <= 1:
        raise ValueError("exponent must exceed 1")
    support = np.arange(lo, hi + 1)
    weights = support.astype(np.float64) ** -exponent
    return rng.choice(support, size=count, p=weights / weights.sum())


def power_law_mean(exponent: float, lo: int, hi: int) -> float:
    support = np.arange(lo, hi + 1, dtype=np.float64)
    w = support ** -exponent
    return float((support * w).sum() / w.sum())


def _stochastic_round(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    base = np.floor(x)
    return (base + (rng.random(len(x)) < (x - base))).astype(np.int64)


def _community_sizes(total: int, cfg: GenConfig, rng: np.random.Generator) -> list[int]:
    """Power-law sizes in [s_min, s_max] summing exactly to ``total``."""
    sizes: list[int] = []
    while sum(sizes) < total:
        sizes.append(int(sample_power_law(1, cfg.beta, cfg.s_min, cfg.s_max, rng)[0]))
    excess = sum(sizes) - total
    for i in np.argsort(sizes, kind="stable")[::-1]:
        cut = min(excess, sizes[i] - cfg.s_min)
        sizes[i] -= cut
        excess -= cut
    if excess > 0:
        deficit = sizes.pop() - excess
        i = 0
        while deficit > 0:
            if all(s >= cfg.s_max for s in sizes):
                raise ValueError("community sizes cannot be matched to the membership slots "
                                 "within [s_min, s_max]")
            if sizes[i % len(sizes)] < cfg.s_max:
                sizes[i % len(sizes)] += 1
                deficit -= 1
            i += 1
    if sum(sizes) != total:
        raise ValueError("community sizes cannot be matched to the membership slots within [s_min, s_max]")
    return sizes


def _assign(sizes: list[int], pool: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Fill communities so every pool node gets at least one membership."""
    slots = np.repeat(np.arange(len(sizes)), sizes)
    rng.shuffle(slots)
    nodes = rng.permutation(pool)
    members: list[set[int]] = [set() for _ in sizes]
    for v, c in zip(nodes.tolist(), slots[:len(nodes)].tolist()):
        members[c].add(v)
    for c in slots[len(nodes):].tolist():
        if 2 * len(members[c]) > len(pool):
            room = np.setdiff1d(pool, np.fromiter(members[c], dtype=np.int64))
            members[c].add(int(rng.choice(room)))
            continue
        while True:
            v = int(pool[rng.integers(len(pool))])
            if v not in members[c]:
                members[c].add(v)
                break
    return [np.array(sorted(m), dtype=np.int64) for m in members]


def _pair_stubs(stubs: np.ndarray, edges: set[tuple[int, int]], rng: np.random.Generator) -> None:
    """Randomly pair stubs into new simple edges, retrying rejected stubs."""
    pending = stubs.copy()
    for _ in range(PAIRING_ROUNDS):
        if len(pending) < 2:
            return
        rng.shuffle(pending)
        if len(pending) % 2:
            pending = pending[:-1]
        a, b = pending[0::2], pending[1::2]
        left = []
        for u, v in zip(a.tolist(), b.tolist()):
            key = (u, v) if u < v else (v, u)
            if u == v or key in edges:
                left.append(u)
                left.append(v)
            else:
                edges.add(key)
        pending = np.array(left, dtype=np.int64)


def generate(config: GenConfig) -> tuple[Graph, Cover, np.ndarray]:
    """Return ``(graph, planted cover, outlier node ids)``."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n
    degrees = sample_power_law(n, config.gamma, config.d_min, config.d_max, rng)
    outliers = np.sort(rng.choice(n, size=config.n_outliers, replace=False)).astype(np.int64)
    is_outlier = np.zeros(n, dtype=bool)
    is_outlier[outliers] = True
    pool = np.flatnonzero(~is_outlier)

    total_slots = int(round(config.eta * len(pool)))
    sizes = _community_sizes(total_slots, config, rng)
    communities = _assign(sizes, pool, rng)
    comm_volume = np.array([degrees[c].sum() for c in communities], dtype=np.float64)

    memberships: list[list[int]] = [[] for _ in range(n)]
    for c, members in enumerate(communities):
        for v in members.tolist():
            memberships[v].append(c)

    internal = np.zeros(n)
    internal[pool] = (1.0 - config.xi) * degrees[pool]
    internal = _stochastic_round(internal, rng)
    background = degrees - internal

    comm_stubs: list[list[int]] = [[] for _ in communities]
    for v in pool.tolist():
        ms = memberships[v]
        if internal[v] == 0:
            continue
        p = comm_volume[ms] / comm_volume[ms].sum()
        split = rng.multinomial(internal[v], p)
        for c, k in zip(ms, split.tolist()):
            comm_stubs[c].extend([v] * k)

    edges: set[tuple[int, int]] = set()
    for stubs in comm_stubs:
        _pair_stubs(np.array(stubs, dtype=np.int64), edges, rng)
    _pair_stubs(np.repeat(np.arange(n), background), edges, rng)

    pairs = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    graph = Graph([str(i) for i in range(n)], pairs[:, 0], pairs[:, 1])
    return graph, Cover(n, communities), outliers
