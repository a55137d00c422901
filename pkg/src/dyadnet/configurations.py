"""Signed and weighted collections of edge-time cells.

An edge-time cell (i, j, t) names one dyad's link indicator at one date.  A
signed configuration is a pair of cell multisets (plus, minus); a weighted
configuration attaches a nonzero real weight to each cell.  Derived objects:

- residual load rho(i,j): net count of a dyad across the two sides; rho == 0
  everywhere means dyad effects cancel in signed comparisons.
- node incidence sigma(m): net (or weight-summed) appearances of node m;
  sigma == 0 everywhere means additive node effects cancel.

The enumerators produce the named configuration families in a deterministic
canonical order, with exact uniform without-replacement index sampling when a
cap truncates the stream.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import random
from typing import Iterator, NamedTuple

import numpy as np

from .model import (
    NetworkPanel,
    NodeCovariatePanel,
    StatisticRegistry,
    Theta,
    dyadic_covariates,
    lagged_stats,
)

__all__ = [
    "EdgeTimeCell",
    "make_cell",
    "SignedConfiguration",
    "WeightedConfiguration",
    "residual_load",
    "node_incidence",
    "delta_W",
    "contrast_vector",
    "outcome_indicators",
    "enumerate_configurations",
    "family_total",
    "FAMILIES",
    "format_configuration",
    "parse_configuration",
]


class EdgeTimeCell(NamedTuple):
    i: int
    j: int
    t: int


def make_cell(i: int, j: int, t: int) -> EdgeTimeCell:
    """Canonical cell: i < j, t >= 1."""
    if i == j:
        raise ValueError("a cell needs two distinct nodes")
    if t < 1:
        raise ValueError("cell dates start at 1")
    if i > j:
        i, j = j, i
    return EdgeTimeCell(int(i), int(j), int(t))


def _as_cells(cells) -> tuple[EdgeTimeCell, ...]:
    return tuple(sorted(make_cell(*c) for c in cells))


@dataclasses.dataclass(frozen=True)
class SignedConfiguration:
    """Cell multisets (plus, minus).  The same cell may repeat within a side
    but may not appear on both sides (that would force both outcome
    indicators to zero)."""

    plus: tuple[EdgeTimeCell, ...]
    minus: tuple[EdgeTimeCell, ...]

    def __post_init__(self):
        object.__setattr__(self, "plus", _as_cells(self.plus))
        object.__setattr__(self, "minus", _as_cells(self.minus))
        if set(self.plus) & set(self.minus):
            raise ValueError("a cell may not appear on both sides")

    def cells(self) -> tuple[EdgeTimeCell, ...]:
        return self.plus + self.minus

    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted({m for c in self.cells() for m in (c.i, c.j)}))

    def residual_load(self) -> dict[tuple[int, int], int]:
        rho: dict[tuple[int, int], int] = {}
        for c in self.plus:
            rho[(c.i, c.j)] = rho.get((c.i, c.j), 0) + 1
        for c in self.minus:
            rho[(c.i, c.j)] = rho.get((c.i, c.j), 0) - 1
        return {d: v for d, v in rho.items() if v != 0}

    def node_incidence(self) -> dict[int, int]:
        sigma: dict[int, int] = {}
        for c in self.plus:
            for m in (c.i, c.j):
                sigma[m] = sigma.get(m, 0) + 1
        for c in self.minus:
            for m in (c.i, c.j):
                sigma[m] = sigma.get(m, 0) - 1
        return sigma

    def is_dyad_balanced(self) -> bool:
        return not self.residual_load()

    def is_node_balanced(self) -> bool:
        return all(v == 0 for v in self.node_incidence().values())

    def flipped(self) -> "SignedConfiguration":
        return SignedConfiguration(self.minus, self.plus)


@dataclasses.dataclass(frozen=True)
class WeightedConfiguration:
    """Cells with nonzero real weights; sides are the weight sign classes."""

    cells: tuple[tuple[EdgeTimeCell, float], ...]

    def __post_init__(self):
        norm = tuple(
            sorted(((make_cell(*c), float(w)) for c, w in self.cells), key=lambda cw: cw[0])
        )
        object.__setattr__(self, "cells", norm)
        if any(w == 0.0 for _, w in self.cells):
            raise ValueError("weights must be nonzero")

    @property
    def plus(self) -> tuple[EdgeTimeCell, ...]:
        return tuple(c for c, w in self.cells if w > 0)

    @property
    def minus(self) -> tuple[EdgeTimeCell, ...]:
        return tuple(c for c, w in self.cells if w < 0)

    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted({m for c, _ in self.cells for m in (c.i, c.j)}))

    def node_incidence(self) -> dict[int, float]:
        sigma: dict[int, float] = {}
        for c, w in self.cells:
            for m in (c.i, c.j):
                sigma[m] = sigma.get(m, 0.0) + w
        return sigma

    def retained_nodes(self) -> tuple[int, ...]:
        return tuple(sorted(m for m, s in self.node_incidence().items() if s != 0.0))

    def eliminated_nodes(self) -> tuple[int, ...]:
        return tuple(sorted(m for m, s in self.node_incidence().items() if s == 0.0))

    def is_node_balanced(self) -> bool:
        return not self.retained_nodes()


def residual_load(cfg: SignedConfiguration) -> dict[tuple[int, int], int]:
    """Net per-dyad cell count rho; dyads with rho == 0 are omitted."""
    return cfg.residual_load()


def node_incidence(cfg) -> dict[int, float] | dict[int, int]:
    """Signed (or weight-summed) node incidences sigma for every node in cfg."""
    return cfg.node_incidence()


# ---------------------------------------------------------------------------
# Evaluation against a realized panel
# ---------------------------------------------------------------------------


def _cell_feature(cell: EdgeTimeCell, panel, covariates, registry) -> np.ndarray:
    zd = dyadic_covariates(covariates, cell.i, cell.j, cell.t)
    xl = lagged_stats(panel, registry, cell.i, cell.j, cell.t)
    return np.concatenate([zd, xl])


def contrast_vector(
    cfg,
    panel: NetworkPanel,
    covariates: NodeCovariatePanel,
    registry: StatisticRegistry,
) -> np.ndarray:
    """Signed (or weighted) sum of per-cell regressor vectors (z_dyad, x_lag)."""
    d = covariates.d_z + registry.d_x
    out = np.zeros(d)
    if isinstance(cfg, WeightedConfiguration):
        for c, w in cfg.cells:
            out += w * _cell_feature(c, panel, covariates, registry)
        return out
    for c in cfg.plus:
        out += _cell_feature(c, panel, covariates, registry)
    for c in cfg.minus:
        out -= _cell_feature(c, panel, covariates, registry)
    return out


def delta_W(
    cfg,
    theta: Theta,
    panel: NetworkPanel,
    covariates: NodeCovariatePanel,
    registry: StatisticRegistry,
) -> float:
    """Signed or weighted index contrast sum_e (+/- or w_e) W_e(theta)."""
    return float(contrast_vector(cfg, panel, covariates, registry) @ theta.vector)


def outcome_indicators(cfg, panel: NetworkPanel) -> tuple[int, int]:
    """(Y+, Y-): all plus cells linked and minus unlinked, and the flip."""
    plus = [panel.link(c.i, c.j, c.t) for c in cfg.plus]
    minus = [panel.link(c.i, c.j, c.t) for c in cfg.minus]
    yplus = int(all(v == 1 for v in plus) and all(v == 0 for v in minus))
    yminus = int(all(v == 0 for v in plus) and all(v == 1 for v in minus))
    return yplus, yminus


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

FAMILIES = (
    "dyad_transitions",
    "within_date_tetrads",
    "intertemporal_tetrads",
    "triadic_cycles",
    "balanced_signed_subgraphs",
    "node_balanced_weighted",
)

# the three perfect matchings of a sorted 4-node set, by the partner of the +
# smallest node; a tetrad uses two distinct matchings as its two sides
_MATCHINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
_MATCHING_PAIRS = ((0, 1), (0, 2), (1, 2))


def _unrank_comb(rank: int, n: int, k: int) -> tuple[int, ...]:
    """Rank -> k-combination of range(n) in lexicographic order."""
    out = []
    x = 0
    for pos in range(k):
        while True:
            rest = math.comb(n - x - 1, k - pos - 1)
            if rank < rest:
                out.append(x)
                x += 1
                break
            rank -= rest
            x += 1
    return tuple(out)


def _unrank_ordered_pair(rank: int, T: int) -> tuple[int, int]:
    """Rank -> ordered pair of distinct dates (1-based), T*(T-1) of them."""
    q, r = divmod(rank, T - 1)
    first = q + 1
    second = r + 1 if r < q else r + 2
    return first, second


def _hexad_patterns() -> list[tuple[int, ...]]:
    """Cyclic orders of 6 slots starting at slot 0, direction-deduplicated."""
    pats = []
    for perm in itertools.permutations(range(1, 6)):
        if perm[0] < perm[-1]:
            pats.append((0,) + perm)
    return pats


_HEXAD_PATTERNS = _hexad_patterns()  # 60 patterns


class _Family:
    def total(self, n: int, T: int) -> int:
        raise NotImplementedError

    def unrank(self, idx: int, n: int, T: int):
        raise NotImplementedError


class _DyadTransitions(_Family):
    """One dyad, plus cell at the later of two dates."""

    def total(self, n, T):
        return math.comb(n, 2) * math.comb(T, 2)

    def unrank(self, idx, n, T):
        dyad_rank, date_rank = divmod(idx, math.comb(T, 2))
        i, j = _unrank_comb(dyad_rank, n, 2)
        s, t = _unrank_comb(date_rank, T, 2)
        return SignedConfiguration(((i, j, t + 1),), ((i, j, s + 1),))


class _WithinDateTetrads(_Family):
    """Four nodes, one date, two of the three pairings as the two sides."""

    def total(self, n, T):
        return math.comb(n, 4) * T * 3

    def unrank(self, idx, n, T):
        quad_rank, rest = divmod(idx, T * 3)
        t, pair_rank = divmod(rest, 3)
        nodes = _unrank_comb(quad_rank, n, 4)
        mx, my = _MATCHING_PAIRS[pair_rank]
        plus = [(nodes[a], nodes[b], t + 1) for a, b in _MATCHINGS[mx]]
        minus = [(nodes[a], nodes[b], t + 1) for a, b in _MATCHINGS[my]]
        return SignedConfiguration(plus, minus)


class _IntertemporalTetrads(_Family):
    """Four nodes, a date per cell; sides from two distinct pairings."""

    def total(self, n, T):
        return math.comb(n, 4) * 3 * T**4

    def unrank(self, idx, n, T):
        quad_rank, rest = divmod(idx, 3 * T**4)
        pair_rank, date_rank = divmod(rest, T**4)
        dates = []
        for _ in range(4):
            date_rank, d = divmod(date_rank, T)
            dates.append(d + 1)
        nodes = _unrank_comb(quad_rank, n, 4)
        mx, my = _MATCHING_PAIRS[pair_rank]
        plus = [
            (nodes[a], nodes[b], dates[k]) for k, (a, b) in enumerate(_MATCHINGS[mx])
        ]
        minus = [
            (nodes[a], nodes[b], dates[2 + k]) for k, (a, b) in enumerate(_MATCHINGS[my])
        ]
        return SignedConfiguration(plus, minus)


class _TriadicCycles(_Family):
    """Three nodes; each dyad appears once per side at distinct dates.  The
    flip is deduplicated by requiring the first dyad's plus date to precede
    its minus date."""

    def total(self, n, T):
        return math.comb(n, 3) * math.comb(T, 2) * (T * (T - 1)) ** 2

    def unrank(self, idx, n, T):
        per_tri = math.comb(T, 2) * (T * (T - 1)) ** 2
        tri_rank, rest = divmod(idx, per_tri)
        p1, rest = divmod(rest, (T * (T - 1)) ** 2)
        p2, p3 = divmod(rest, T * (T - 1))
        a, b, c = _unrank_comb(tri_rank, n, 3)
        t1, t4 = (d + 1 for d in _unrank_comb(p1, T, 2))
        t2, t5 = _unrank_ordered_pair(p2, T)
        t3, t6 = _unrank_ordered_pair(p3, T)
        plus = [(a, b, t1), (b, c, t2), (a, c, t3)]
        minus = [(a, b, t4), (b, c, t5), (a, c, t6)]
        return SignedConfiguration(plus, minus)


class _BalancedSignedSubgraphs(_Family):
    """Unions of single-dyad transitions over k <= size_cap distinct dyads (a
    dyad-balanced subfamily; the full rho == 0 class is larger).  The global
    flip is deduplicated by orienting the lowest-ranked dyad's transition."""

    def __init__(self, size_cap: int):
        if size_cap < 1:
            raise ValueError("size cap must be >= 1")
        self.size_cap = size_cap

    def _k_total(self, n, T, k):
        M = math.comb(n, 2)
        return math.comb(M, k) * math.comb(T, 2) * (T * (T - 1)) ** (k - 1)

    def total(self, n, T):
        return sum(self._k_total(n, T, k) for k in range(1, self.size_cap + 1))

    def unrank(self, idx, n, T):
        M = math.comb(n, 2)
        for k in range(1, self.size_cap + 1):
            tot = self._k_total(n, T, k)
            if idx < tot:
                break
            idx -= tot
        per_dates = math.comb(T, 2) * (T * (T - 1)) ** (k - 1)
        dyads_rank, date_rank = divmod(idx, per_dates)
        dyad_ranks = _unrank_comb(dyads_rank, M, k)
        dyads = [_unrank_comb(r, n, 2) for r in dyad_ranks]
        date_rank, first = divmod(date_rank, math.comb(T, 2))
        s, t = _unrank_comb(first, T, 2)
        plus = [(dyads[0][0], dyads[0][1], t + 1)]
        minus = [(dyads[0][0], dyads[0][1], s + 1)]
        for d in dyads[1:]:
            date_rank, pr = divmod(date_rank, T * (T - 1))
            tp, tm = _unrank_ordered_pair(pr, T)
            plus.append((d[0], d[1], tp))
            minus.append((d[0], d[1], tm))
        return SignedConfiguration(plus, minus)


class _NodeBalancedWeighted(_Family):
    """Completely node-balanced weighted configurations: weight-scaled
    within-date tetrads, plus alternating-sign within-date six-cycles when
    size_cap >= 6.  Weight magnitudes come from the declared weight set."""

    def __init__(self, size_cap: int, weight_set):
        mags = sorted({abs(float(w)) for w in weight_set})
        if not mags or mags[0] == 0.0:
            raise ValueError("weight set needs nonzero weights")
        self.size_cap = size_cap
        self.mags = mags

    def _tetrad_total(self, n, T):
        if self.size_cap < 4:
            return 0
        return math.comb(n, 4) * T * 3 * len(self.mags)

    def _hexad_total(self, n, T):
        if self.size_cap < 6:
            return 0
        return math.comb(n, 6) * len(_HEXAD_PATTERNS) * T * len(self.mags)

    def total(self, n, T):
        return self._tetrad_total(n, T) + self._hexad_total(n, T)

    def unrank(self, idx, n, T):
        tt = self._tetrad_total(n, T)
        if idx < tt:
            w_rank, rest = divmod(idx, math.comb(n, 4) * T * 3)
            w = self.mags[w_rank]
            base = _WithinDateTetrads().unrank(rest, n, T)
            cells = [(c, w) for c in base.plus] + [(c, -w) for c in base.minus]
            return WeightedConfiguration(tuple(cells))
        idx -= tt
        w_rank, rest = divmod(idx, math.comb(n, 6) * len(_HEXAD_PATTERNS) * T)
        w = self.mags[w_rank]
        hex_rank, rest = divmod(rest, len(_HEXAD_PATTERNS) * T)
        pat_rank, t = divmod(rest, T)
        nodes = _unrank_comb(hex_rank, n, 6)
        pat = _HEXAD_PATTERNS[pat_rank]
        cells = []
        for k in range(6):
            a, b = nodes[pat[k]], nodes[pat[(k + 1) % 6]]
            cells.append(((a, b, t + 1), w if k % 2 == 0 else -w))
        return WeightedConfiguration(tuple(cells))


def _get_family(family: str, size_cap: int, weight_set) -> _Family:
    table = {
        "dyad_transitions": _DyadTransitions(),
        "within_date_tetrads": _WithinDateTetrads(),
        "intertemporal_tetrads": _IntertemporalTetrads(),
        "triadic_cycles": _TriadicCycles(),
        "balanced_signed_subgraphs": _BalancedSignedSubgraphs(size_cap),
        "node_balanced_weighted": _NodeBalancedWeighted(size_cap, weight_set),
    }
    if family not in table:
        raise ValueError(f"unknown configuration family {family!r}; known: {FAMILIES}")
    return table[family]


def family_total(
    family: str, n: int, T: int, size_cap: int = 4, weight_set=(1, 2)
) -> int:
    """Exact count of the family's canonical stream for given (n, T)."""
    return _get_family(family, size_cap, weight_set).total(n, T)


def enumerate_configurations(
    family: str,
    n: int,
    T: int,
    cap: int,
    seed: int | None = None,
    size_cap: int = 4,
    weight_set=(1, 2),
) -> Iterator[SignedConfiguration | WeightedConfiguration]:
    """Yield configurations of a family in deterministic canonical order.

    Stops at ``cap``.  When the family is larger than the cap, a uniform
    without-replacement sample of canonical indices is drawn with ``seed``
    (default 0) and emitted in canonical order.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    fam = _get_family(family, size_cap, weight_set)
    total = fam.total(n, T)
    if total <= cap:
        indices = range(total)
    else:
        indices = sorted(random.Random(0 if seed is None else seed).sample(range(total), cap))
    for idx in indices:
        yield fam.unrank(idx, n, T)


# ---------------------------------------------------------------------------
# Text format: "+i,j,t;... | -i,j,t;..." with optional "*w" magnitude suffix
# ---------------------------------------------------------------------------


def format_configuration(cfg) -> str:
    if isinstance(cfg, WeightedConfiguration):
        plus = ";".join(f"+{c.i},{c.j},{c.t}*{w!r}" for c, w in cfg.cells if w > 0)
        minus = ";".join(f"-{c.i},{c.j},{c.t}*{-w!r}" for c, w in cfg.cells if w < 0)
    else:
        plus = ";".join(f"+{c.i},{c.j},{c.t}" for c in cfg.plus)
        minus = ";".join(f"-{c.i},{c.j},{c.t}" for c in cfg.minus)
    return f"{plus} | {minus}"


def _parse_cell(token: str) -> tuple[EdgeTimeCell, float | None, int]:
    sign = {"+": 1, "-": -1}.get(token[0])
    if sign is None:
        raise ValueError(f"cell {token!r} must start with + or -")
    body = token[1:]
    mag: float | None = None
    if "*" in body:
        body, magpart = body.split("*", 1)
        mag = float(magpart)
    i, j, t = (int(v) for v in body.split(","))
    return make_cell(i, j, t), mag, sign


def parse_configuration(text: str):
    """Inverse of format_configuration; exact round-trip."""
    sides = text.split("|")
    if len(sides) != 2:
        raise ValueError("expected exactly one '|' separator")
    tokens = [tok for side in sides for tok in side.strip().split(";") if tok.strip()]
    parsed = [_parse_cell(tok.strip()) for tok in tokens]
    if any(mag is not None for _, mag, _ in parsed):
        if any(mag is None for _, mag, _ in parsed):
            raise ValueError("mixing weighted and unweighted cells")
        return WeightedConfiguration(tuple((c, sign * mag) for c, mag, sign in parsed))
    plus = [c for c, _, sign in parsed if sign > 0]
    minus = [c for c, _, sign in parsed if sign < 0]
    return SignedConfiguration(tuple(plus), tuple(minus))
