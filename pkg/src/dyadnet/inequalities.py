"""Moment-inequality restrictions, composite-error CDFs, and identified sets.

Every restriction here sandwiches a latent CDF between conditional moments of
the observed panel:

- dyad-panel bounds treat each dyad as a short panel and integrate the dyad
  effect out: per covariate-history cell h, max_t L_t(c|h) <= min_s U_s(c|h).
- signed-subgraph bounds difference dyad effects out through a dyad-balanced
  configuration; the sandwiched CDF of the shock contrast is unconditional,
  so the check compares the sup over conditioning cells of the lower moment
  to the inf over cells of the upper moment.
- the partial-differencing envelope pools comparison objects that share one
  residual-load vector, conditioning on the uncanceled dyads' histories and
  profiling over the rest.
- with a known marginal and serial independence the middle CDF is an explicit
  convolution (composite_cdf) and each side is tested against it directly.
- weighted node-differencing applies under additive node effects, conditioning
  on retained-node histories and profiling over eliminated-node histories.

Moments are estimated by pooling instances of a configuration pattern over
injective node assignments (valid by exchangeability of nodes and i.i.d.
dyad shocks); standard errors treat instances as independent.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import signal as spsig

from .configurations import SignedConfiguration, WeightedConfiguration
from .model import (
    NetworkPanel,
    NodeCovariatePanel,
    StatisticRegistry,
    Theta,
    SimulationResult,
    dyadic_covariate_tensor,
    statistic_tensor,
)

__all__ = [
    "PanelData",
    "ConditioningCell",
    "BoundEvaluation",
    "Violation",
    "BoundsResult",
    "CompositeCDF",
    "ThetaVerdict",
    "IdentifiedSetReport",
    "default_c_grid",
    "dyad_panel_bounds",
    "signed_subgraph_bounds",
    "partial_envelope",
    "composite_cdf",
    "known_cdf_bounds",
    "weighted_node_bounds",
    "identified_set",
]

log = logging.getLogger("dyadnet.inequalities")


# ---------------------------------------------------------------------------
# Panel view with cached features and conditioning-cell codes
# ---------------------------------------------------------------------------


class PanelData:
    """Read-only evaluation view of one realized panel.

    Caches the per-date dyad feature tensor (dyadic covariates stacked with
    lagged statistics) and integer codes for node and dyad covariate
    histories.  Conditioning cells require discrete covariates; a ``bin_map``
    (applied to covariate values for cell coding only) stands in for
    discreteness with continuous draws.
    """

    def __init__(
        self,
        panel: NetworkPanel,
        covariates: NodeCovariatePanel,
        registry: StatisticRegistry,
        shocks=None,
        bin_map: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        if covariates.T != panel.T or covariates.n != panel.n:
            raise ValueError("panel and covariates disagree on n or T")
        self.panel = panel
        self.covariates = covariates
        self.registry = registry
        self.shocks = shocks
        self.bin_map = bin_map
        self.n = panel.n
        self.T = panel.T
        self.d_h = covariates.d_z
        self.d_x = registry.d_x
        self.d = self.d_h + self.d_x
        feats = np.empty((self.T, self.d, self.n, self.n))
        for t in range(1, self.T + 1):
            feats[t - 1, : self.d_h] = dyadic_covariate_tensor(covariates, t)
            feats[t - 1, self.d_h :] = statistic_tensor(panel, registry, t)
        self._features = feats
        self._D = panel.links
        self._node_code = None
        self._node_keys = None
        self._dyad_code = None
        self._dyad_keys = None

    @classmethod
    def from_simulation(cls, sim: SimulationResult, bin_map=None) -> "PanelData":
        return cls(sim.panel, sim.covariates, sim.spec.registry, sim.spec.shocks, bin_map)

    # -- conditioning-cell codes ------------------------------------------------

    def _cell_values(self) -> np.ndarray:
        vals = self.covariates.values
        if self.bin_map is not None:
            vals = np.asarray(self.bin_map(vals), dtype=float)
        elif not self.covariates.discrete:
            raise ValueError(
                "conditioning cells need discrete covariates or a bin_map"
            )
        return vals

    def node_codes(self) -> tuple[np.ndarray, list[tuple]]:
        """Integer code of each node's full covariate history."""
        if self._node_code is None:
            vals = self._cell_values()
            rows = vals.transpose(1, 0, 2).reshape(self.n, -1)
            uniq, inv = np.unique(rows, axis=0, return_inverse=True)
            self._node_code = inv.astype(np.int64)
            self._node_keys = [tuple(r.tolist()) for r in uniq]
        return self._node_code, self._node_keys

    def dyad_codes(self) -> tuple[np.ndarray, list[tuple]]:
        """Integer code matrix of each dyad's covariate-difference history."""
        if self._dyad_code is None:
            vals = self._cell_values()
            zd = np.abs(vals[:, :, None, :] - vals[:, None, :, :])
            rows = zd.transpose(1, 2, 0, 3).reshape(self.n * self.n, -1)
            uniq, inv = np.unique(rows, axis=0, return_inverse=True)
            self._dyad_code = inv.reshape(self.n, self.n).astype(np.int64)
            self._dyad_keys = [tuple(r.tolist()) for r in uniq]
        return self._dyad_code, self._dyad_keys


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ConditioningCell:
    """A realized conditioning value and its observation count."""

    key: tuple
    count: int
    label: str


@dataclasses.dataclass
class BoundEvaluation:
    """Estimated lower and upper moments for one (conditioning cell, c)."""

    c: float
    lower: float
    upper: float
    se_lower: float
    se_upper: float
    cell: ConditioningCell
    middle: float | None = None
    violation_se: float = 0.0
    passed: bool = True

    @property
    def combined_se(self) -> float:
        return math.hypot(self.se_lower, self.se_upper)


@dataclasses.dataclass(frozen=True)
class Violation:
    family: str
    config_id: str
    cell_label: str
    c: float
    magnitude_se: float


@dataclasses.dataclass
class BoundsResult:
    family: str
    config_id: str
    theta: Theta
    evaluations: list[BoundEvaluation]
    violations: list[Violation]
    passed: bool
    warnings: list[str]
    cells: list[ConditioningCell]


@dataclasses.dataclass
class ThetaVerdict:
    theta: Theta
    passed: bool
    violations: list[Violation]


@dataclasses.dataclass
class IdentifiedSetReport:
    slack: float
    families: tuple[str, ...]
    verdicts: list[ThetaVerdict]

    def passing(self) -> list[Theta]:
        return [v.theta for v in self.verdicts if v.passed]

    def to_dict(self) -> dict:
        return {
            "slack": self.slack,
            "families": list(self.families),
            "thetas": [
                {
                    "theta": v.theta.vector.tolist(),
                    "passed": v.passed,
                    "violations": [
                        {
                            "family": w.family,
                            "config": w.config_id,
                            "cell": w.cell_label,
                            "c": w.c,
                            "magnitude_se": w.magnitude_se,
                        }
                        for w in v.violations
                    ],
                }
                for v in self.verdicts
            ],
        }


def default_c_grid(values: np.ndarray) -> np.ndarray:
    """Empirical quantiles {1%, 5%, 10%, ..., 95%, 99%} of the realized index
    or contrast distribution, plus c = 0.

    The bounds are step functions between observed values, so a quantile grid
    adapts to the evaluated theta; it is scale equivariant, which makes
    identified-set membership invariant under (theta, c) -> (k*theta, k*c)
    for power-of-two k.
    """
    qs = np.concatenate([[0.01], np.linspace(0.05, 0.95, 19), [0.99]])
    cs = np.quantile(np.asarray(values, dtype=float), qs)
    return np.unique(np.concatenate([cs, [0.0]]))


# ---------------------------------------------------------------------------
# Moment tables: rows of (member, retained cell, nuisance cell, Y+, Y-, feats)
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class _MomentTable:
    feats: np.ndarray
    yplus: np.ndarray
    yminus: np.ndarray
    member: np.ndarray
    retained: np.ndarray
    nuisance: np.ndarray
    member_labels: list[str]
    retained_keys: list[tuple]
    nuisance_keys: list[tuple]


def _dyad_panel_table(data: PanelData) -> _MomentTable:
    """One row per (dyad, date); members are dates, retained cells are dyad
    covariate-history cells."""
    n, T = data.n, data.T
    iu = np.triu_indices(n, 1)
    m = iu[0].size
    dyad_code, dyad_keys = data.dyad_codes()
    codes = dyad_code[iu]
    feats = np.empty((m * T, data.d))
    yplus = np.empty(m * T, dtype=bool)
    member = np.empty(m * T, dtype=np.int64)
    retained = np.empty(m * T, dtype=np.int64)
    for t in range(1, T + 1):
        sl = slice((t - 1) * m, t * m)
        feats[sl] = data._features[t - 1][:, iu[0], iu[1]].T
        yplus[sl] = data._D[t][iu].astype(bool)
        member[sl] = t - 1
        retained[sl] = codes
    return _MomentTable(
        feats=feats,
        yplus=yplus,
        yminus=~yplus,
        member=member,
        retained=retained,
        nuisance=np.zeros(m * T, dtype=np.int64),
        member_labels=[f"t={t}" for t in range(1, T + 1)],
        retained_keys=dyad_keys,
        nuisance_keys=[()],
    )


def _sample_tuples(n: int, m: int, cap: int, seed: int) -> np.ndarray:
    """Injective node assignments for m slots: all of them when feasible,
    otherwise a seeded uniform sample (with replacement across instances)."""
    total = math.perm(n, m)
    if total <= cap:
        return np.array(list(itertools.permutations(range(n), m)), dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(m,)))
    out = np.empty((cap, m), dtype=np.int64)
    filled = 0
    while filled < cap:
        draw = rng.integers(0, n, size=(cap - filled, m))
        ok = np.ones(draw.shape[0], dtype=bool)
        for a in range(m):
            for b in range(a + 1, m):
                ok &= draw[:, a] != draw[:, b]
        good = draw[ok]
        out[filled : filled + good.shape[0]] = good
        filled += good.shape[0]
    return out


def _member_arrays(data: PanelData, cfg, nodes: np.ndarray):
    """Evaluate (Y+, Y-, contrast features) for one configuration pattern
    across instance node assignments."""
    slots = cfg.nodes()
    slot_of = {v: s for s, v in enumerate(slots)}
    k = nodes.shape[0]
    feats = np.zeros((k, data.d))
    plus_linked = np.ones(k, dtype=bool)
    plus_unlinked = np.ones(k, dtype=bool)
    minus_linked = np.ones(k, dtype=bool)
    minus_unlinked = np.ones(k, dtype=bool)

    if isinstance(cfg, WeightedConfiguration):
        cellweights = list(cfg.cells)
    else:
        cellweights = [(c, 1.0) for c in cfg.plus] + [(c, -1.0) for c in cfg.minus]

    for cell, w in cellweights:
        ia = nodes[:, slot_of[cell.i]]
        ib = nodes[:, slot_of[cell.j]]
        if cell.t > data.T:
            raise ValueError(f"cell date {cell.t} outside panel range 1..{data.T}")
        dv = data._D[cell.t, ia, ib].astype(bool)
        feats += w * data._features[cell.t - 1][:, ia, ib].T
        if w > 0:
            plus_linked &= dv
            plus_unlinked &= ~dv
        else:
            minus_linked &= dv
            minus_unlinked &= ~dv
    yplus = plus_linked & minus_unlinked
    yminus = plus_unlinked & minus_linked
    return feats, yplus, yminus, slot_of


def _code_rows(rows: np.ndarray, registry: dict, keys: list[tuple], translate=None) -> np.ndarray:
    """Map integer key rows to table-global codes, assigning codes on first
    sight; ``translate`` turns a raw code row into the reported key."""
    if rows.shape[1] == 0:
        if () not in registry:
            registry[()] = len(keys)
            keys.append(())
        return np.full(rows.shape[0], registry[()], dtype=np.int64)
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    local = np.empty(uniq.shape[0], dtype=np.int64)
    for u, row in enumerate(uniq):
        raw = tuple(row.tolist())
        if raw not in registry:
            registry[raw] = len(keys)
            keys.append(translate(raw) if translate is not None else raw)
        local[u] = registry[raw]
    return local[inv]


def _pattern_class_table(
    data: PanelData,
    members: Sequence[SignedConfiguration | WeightedConfiguration],
    *,
    retained_dyads: Sequence[tuple[int, int]] = (),
    retained_nodes_mode: bool = False,
    instance_cap: int = 200_000,
    seed: int = 0,
    member_labels: Sequence[str] | None = None,
) -> _MomentTable:
    """Build the moment table for a class of configuration patterns.

    Retained cells come from the covariate-difference histories of
    ``retained_dyads`` (node-id pairs shared by all members), or, in
    retained-nodes mode (weighted node-differencing), from the histories of
    each member's retained nodes.  Nuisance cells are the joint histories of
    the member's remaining nodes.
    """
    node_code, node_keys = data.node_codes()

    def node_translate(raw):
        return node_keys[raw[0]] if len(raw) == 1 else tuple(node_keys[c] for c in raw)

    ret_registry: dict = {}
    nui_registry: dict = {}
    ret_keys: list[tuple] = []
    nui_keys: list[tuple] = []
    parts = []
    for g, cfg in enumerate(members):
        slots = cfg.nodes()
        m_slots = len(slots)
        if m_slots == 2:
            iu = np.triu_indices(data.n, 1)
            nodes = np.column_stack(iu).astype(np.int64)
        else:
            nodes = _sample_tuples(data.n, m_slots, instance_cap, seed)
        feats, yplus, yminus, slot_of = _member_arrays(data, cfg, nodes)

        ret_translate = node_translate
        if retained_nodes_mode:
            ret_slot_nodes = cfg.retained_nodes()
            nui_slot_nodes = cfg.eliminated_nodes()
            ret_rows = node_code[nodes[:, [slot_of[v] for v in ret_slot_nodes]]] if ret_slot_nodes else np.empty((nodes.shape[0], 0), dtype=np.int64)
            nui_rows = node_code[nodes[:, [slot_of[v] for v in nui_slot_nodes]]] if nui_slot_nodes else np.empty((nodes.shape[0], 0), dtype=np.int64)
        else:
            if retained_dyads:
                dyad_code, dyad_keys = data.dyad_codes()
                cols = []
                for (a, b) in sorted(retained_dyads):
                    cols.append(dyad_code[nodes[:, slot_of[a]], nodes[:, slot_of[b]]])
                ret_rows = np.column_stack(cols)
                ret_translate = lambda raw: (
                    dyad_keys[raw[0]] if len(raw) == 1 else tuple(dyad_keys[c] for c in raw)
                )
            else:
                ret_rows = np.empty((nodes.shape[0], 0), dtype=np.int64)
            resid_nodes = {v for d in retained_dyads for v in d}
            nui_slot_nodes = [v for v in slots if v not in resid_nodes]
            nui_rows = (
                node_code[nodes[:, [slot_of[v] for v in nui_slot_nodes]]]
                if nui_slot_nodes
                else np.empty((nodes.shape[0], 0), dtype=np.int64)
            )

        parts.append(
            (
                feats,
                yplus,
                yminus,
                np.full(nodes.shape[0], g, dtype=np.int64),
                _code_rows(ret_rows, ret_registry, ret_keys, ret_translate),
                _code_rows(nui_rows, nui_registry, nui_keys, node_translate),
            )
        )
    labels = (
        list(member_labels)
        if member_labels is not None
        else [f"g{g}" for g in range(len(members))]
    )
    return _MomentTable(
        feats=np.concatenate([p[0] for p in parts]),
        yplus=np.concatenate([p[1] for p in parts]),
        yminus=np.concatenate([p[2] for p in parts]),
        member=np.concatenate([p[3] for p in parts]),
        retained=np.concatenate([p[4] for p in parts]),
        nuisance=np.concatenate([p[5] for p in parts]),
        member_labels=labels,
        retained_keys=ret_keys,
        nuisance_keys=nui_keys,
    )


# ---------------------------------------------------------------------------
# Envelope evaluation
# ---------------------------------------------------------------------------


def _group_moments(table: _MomentTable, dw: np.ndarray, c_grid: np.ndarray, min_cell_count: int):
    """Per (member, retained, nuisance) group: counts and the two moment
    curves over the c grid.  Means are count ratios, so the result does not
    depend on row order."""
    keys = np.stack([table.retained, table.member, table.nuisance], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    order = np.argsort(inv, kind="stable")
    sorted_inv = inv[order]
    boundaries = np.concatenate(
        [[0], np.flatnonzero(np.diff(sorted_inv)) + 1, [inv.size]]
    )
    groups = []
    dropped = []
    for gi in range(uniq.shape[0]):
        rows = order[boundaries[gi] : boundaries[gi + 1]]
        m = rows.size
        ret, mem, nui = (int(v) for v in uniq[gi])
        if m < min_cell_count:
            dropped.append((ret, mem, nui, m))
            continue
        dw_g = dw[rows]
        dwp = np.sort(dw_g[table.yplus[rows]])
        dwm = np.sort(dw_g[table.yminus[rows]])
        lo = np.searchsorted(dwp, c_grid, side="right") / m
        hi_cnt = dwm.size - np.searchsorted(dwm, c_grid, side="left")
        up = 1.0 - hi_cnt / m
        se_lo = np.sqrt(lo * (1.0 - lo) / m)
        se_up = np.sqrt((hi_cnt / m) * (1.0 - hi_cnt / m) / m)
        # CDF-like monotonicity in c must hold exactly by construction
        assert np.all(np.diff(lo) >= 0) and np.all(np.diff(up) >= 0)
        groups.append((ret, mem, nui, m, lo, up, se_lo, se_up))
    return groups, dropped


def _violation_units(deficit: float, se: float) -> float:
    if deficit <= 0:
        return 0.0
    if se == 0.0:
        return math.inf
    return deficit / se


def _evaluate_envelope(
    table: _MomentTable,
    theta: Theta,
    c_grid: np.ndarray | None,
    *,
    slack: float,
    min_cell_count: int,
    family: str,
    config_id: str,
) -> BoundsResult:
    dw = table.feats @ theta.vector
    if c_grid is None:
        c_grid = default_c_grid(dw)
    c_grid = np.asarray(c_grid, dtype=float)
    groups, dropped = _group_moments(table, dw, c_grid, min_cell_count)
    warnings = [
        f"dropped cell (retained={table.retained_keys[r]}, member={table.member_labels[m]},"
        f" nuisance={table.nuisance_keys[u]}): count {cnt} < {min_cell_count}"
        for r, m, u, cnt in dropped
    ]
    if dropped:
        log.warning(
            "%s/%s: dropped %d cells with count < %d (%d rows)",
            family, config_id, len(dropped), min_cell_count,
            sum(d[3] for d in dropped),
        )

    by_ret: dict[int, list] = {}
    for g in groups:
        by_ret.setdefault(g[0], []).append(g)

    evaluations: list[BoundEvaluation] = []
    violations: list[Violation] = []
    cells: list[ConditioningCell] = []
    for ret in sorted(by_ret):
        gs = by_ret[ret]
        count = sum(g[3] for g in gs)
        label = "all" if table.retained_keys[ret] == () else f"h={table.retained_keys[ret]}"
        cell = ConditioningCell(key=table.retained_keys[ret], count=count, label=label)
        cells.append(cell)
        lo_stack = np.stack([g[4] for g in gs])
        up_stack = np.stack([g[5] for g in gs])
        se_lo_stack = np.stack([g[6] for g in gs])
        se_up_stack = np.stack([g[7] for g in gs])
        arg_lo = np.argmax(lo_stack, axis=0)
        arg_up = np.argmin(up_stack, axis=0)
        idx = np.arange(c_grid.size)
        lower = lo_stack[arg_lo, idx]
        upper = up_stack[arg_up, idx]
        se_lower = se_lo_stack[arg_lo, idx]
        se_upper = se_up_stack[arg_up, idx]
        for ci, c in enumerate(c_grid):
            se_comb = math.hypot(se_lower[ci], se_upper[ci])
            units = _violation_units(lower[ci] - upper[ci], se_comb)
            ev = BoundEvaluation(
                c=float(c),
                lower=float(lower[ci]),
                upper=float(upper[ci]),
                se_lower=float(se_lower[ci]),
                se_upper=float(se_upper[ci]),
                cell=cell,
                violation_se=units,
                passed=units <= slack,
            )
            evaluations.append(ev)
            if not ev.passed:
                violations.append(
                    Violation(family, config_id, cell.label, float(c), units)
                )
    return BoundsResult(
        family=family,
        config_id=config_id,
        theta=theta,
        evaluations=evaluations,
        violations=violations,
        passed=not violations,
        warnings=warnings,
        cells=cells,
    )


def _evaluate_percell(
    table: _MomentTable,
    theta: Theta,
    middle: "CompositeCDF",
    c_grid: np.ndarray | None,
    *,
    slack: float,
    min_cell_count: int,
    family: str,
    config_id: str,
) -> BoundsResult:
    """Two one-sided tests per (cell, c) against a known middle CDF."""
    dw = table.feats @ theta.vector
    if c_grid is None:
        c_grid = default_c_grid(dw)
    c_grid = np.asarray(c_grid, dtype=float)
    fmid = middle(c_grid)
    groups, dropped = _group_moments(table, dw, c_grid, min_cell_count)
    warnings = [
        f"dropped cell nuisance={table.nuisance_keys[u]}: count {cnt} < {min_cell_count}"
        for _, _, u, cnt in dropped
    ]
    if dropped:
        log.warning(
            "%s/%s: dropped %d cells with count < %d",
            family, config_id, len(dropped), min_cell_count,
        )
    evaluations: list[BoundEvaluation] = []
    violations: list[Violation] = []
    cells: list[ConditioningCell] = []
    for ret, mem, nui, m, lo, up, se_lo, se_up in groups:
        key = table.nuisance_keys[nui]
        cell = ConditioningCell(key=key, count=m, label=f"z={key}")
        cells.append(cell)
        for ci, c in enumerate(c_grid):
            units = max(
                _violation_units(lo[ci] - fmid[ci], se_lo[ci]),
                _violation_units(fmid[ci] - up[ci], se_up[ci]),
            )
            ev = BoundEvaluation(
                c=float(c),
                lower=float(lo[ci]),
                upper=float(up[ci]),
                se_lower=float(se_lo[ci]),
                se_upper=float(se_up[ci]),
                cell=cell,
                middle=float(fmid[ci]),
                violation_se=units,
                passed=units <= slack,
            )
            evaluations.append(ev)
            if not ev.passed:
                violations.append(Violation(family, config_id, cell.label, float(c), units))
    return BoundsResult(
        family=family,
        config_id=config_id,
        theta=theta,
        evaluations=evaluations,
        violations=violations,
        passed=not violations,
        warnings=warnings,
        cells=cells,
    )


# ---------------------------------------------------------------------------
# Public restriction families
# ---------------------------------------------------------------------------


def dyad_panel_bounds(
    data: PanelData,
    theta: Theta,
    c_grid: np.ndarray | None = None,
    *,
    slack: float = 3.0,
    min_cell_count: int = 30,
) -> BoundsResult:
    """Dyad-panel sandwich: per dyad-history cell h and threshold c,
    max_t E[D_t 1{W_t(theta) <= c} | h] <= min_s (1 - E[(1-D_s) 1{W_s(theta) >= c} | h]).

    Integrates the dyad effect out against its unknown conditional law, so it
    needs homogeneous shock marginals over time but tolerates arbitrary
    serial correlation.  Requires T >= 2.
    """
    if data.T < 2:
        raise ValueError("dyad-panel bounds need at least two dates (T >= 2)")
    table = _dyad_panel_table(data)
    return _evaluate_envelope(
        table,
        theta,
        c_grid,
        slack=slack,
        min_cell_count=min_cell_count,
        family="dyad_panel",
        config_id="panel",
    )


def _require_dyad_balanced(cfg: SignedConfiguration) -> None:
    rho = cfg.residual_load()
    if rho:
        dyad = sorted(rho)[0]
        raise ValueError(
            f"configuration is not dyad-balanced: dyad {dyad} has residual load {rho[dyad]}"
        )


def signed_subgraph_bounds(
    data: PanelData,
    theta: Theta,
    cfg: SignedConfiguration,
    c_grid: np.ndarray | None = None,
    *,
    instance_cap: int = 200_000,
    seed: int = 0,
    slack: float = 3.0,
    min_cell_count: int = 30,
    config_id: str | None = None,
) -> BoundsResult:
    """Signed-subgraph sandwich for a dyad-balanced configuration; the
    two-cell (one dyad, two dates) special case is the dyad-transition bound.

    The sandwiched CDF of the shock contrast is unconditional, so the verdict
    per c compares the sup over node-history cells of the lower moment to the
    inf over cells of the upper moment.  Valid under arbitrary serial
    correlation.
    """
    if not cfg.plus or not cfg.minus:
        raise ValueError("both sides of the configuration must be nonempty")
    _require_dyad_balanced(cfg)
    table = _pattern_class_table(
        data, [cfg], instance_cap=instance_cap, seed=seed, member_labels=["g0"]
    )
    return _evaluate_envelope(
        table,
        theta,
        c_grid,
        slack=slack,
        min_cell_count=min_cell_count,
        family="signed_subgraph",
        config_id=config_id or "cfg",
    )


def partial_envelope(
    data: PanelData,
    theta: Theta,
    members: Sequence[SignedConfiguration],
    c_grid: np.ndarray | None = None,
    *,
    instance_cap: int = 200_000,
    seed: int = 0,
    slack: float = 3.0,
    min_cell_count: int = 30,
    config_id: str = "class",
    member_labels: Sequence[str] | None = None,
) -> BoundsResult:
    """Envelope over a class of comparison objects sharing one residual-load
    vector: canceled dyads are differenced out (their node histories are
    profiled over), uncanceled dyads are integrated out (their covariate
    histories are the retained conditioning).

    The class with one-cell members per date reproduces the dyad-panel
    bounds; a single dyad-balanced member reproduces the signed-subgraph
    bounds.  Members with empty minus sides are allowed (the weak-inequality
    variant).  Pooling distinct members into one envelope requires the
    residual contribution's conditional law to be common across members;
    date-symmetric classes satisfy it under serially independent shocks.
    """
    if not members:
        raise ValueError("the comparison class is empty")
    rho0 = members[0].residual_load()
    for g, cfg in enumerate(members[1:], start=1):
        rho = cfg.residual_load()
        if rho != rho0:
            bad = sorted(set(rho.items()) ^ set(rho0.items()))[0][0]
            raise ValueError(
                f"member {g} has a different residual load on dyad {bad}"
            )
    table = _pattern_class_table(
        data,
        members,
        retained_dyads=sorted(rho0),
        instance_cap=instance_cap,
        seed=seed,
        member_labels=member_labels,
    )
    return _evaluate_envelope(
        table,
        theta,
        c_grid,
        slack=slack,
        min_cell_count=min_cell_count,
        family="partial_envelope",
        config_id=config_id,
    )


# ---------------------------------------------------------------------------
# Composite-error CDFs
# ---------------------------------------------------------------------------


class CompositeCDF:
    """CDF of a weighted sum of independent shocks on a quadrature grid.

    Evaluable anywhere by linear interpolation; the declared absolute error
    budget is 1e-6 (grid discretization, tail truncation at 12 total scale
    units, and interpolation are each far below it for smooth marginals).
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray, weights: tuple[float, ...]):
        self.grid = grid
        self.values = values
        self.weights = weights
        self.declared_error = 1e-6

    def __call__(self, c) -> np.ndarray | float:
        out = np.interp(c, self.grid, self.values, left=0.0, right=1.0)
        if np.isscalar(c):
            return float(out)
        return out

    def max_grid_increment(self) -> float:
        return float(np.max(np.diff(self.values)))

    def endpoint_masses(self) -> tuple[float, float]:
        return float(self.values[0]), float(1.0 - self.values[-1])


def _config_weights(cfg) -> tuple[float, ...]:
    if isinstance(cfg, WeightedConfiguration):
        return tuple(w for _, w in cfg.cells)
    return tuple([1.0] * len(cfg.plus) + [-1.0] * len(cfg.minus))


def composite_cdf(
    shocks,
    cfg,
    *,
    points: int = 2**14,
    span: float = 12.0,
) -> CompositeCDF:
    """Known-convolution CDF of the shock contrast sum_e w_e U_e.

    Requires a serially independent shock specification with a known
    marginal; weighted configurations must be completely node-balanced (the
    sandwiched CDF is unconditional only then).  The grid spans +/- span
    total scale units (sum_e |w_e| times the marginal scale) with ``points``
    intervals; components are folded in by iterated pairwise convolution of
    the running CDF with each component's trapezoid-weighted density (done
    via FFT, identical to the direct trapezoid sum up to roundoff).
    """
    if not getattr(shocks, "serially_independent", False):
        raise ValueError(
            "composite CDF needs serial independence; only the latent-CDF"
            " sandwich is available under serial correlation"
        )
    if isinstance(cfg, WeightedConfiguration) and not cfg.is_node_balanced():
        raise ValueError("weighted configurations must be completely node-balanced")
    weights = _config_weights(cfg)
    if not weights:
        raise ValueError("configuration has no cells")
    marginal = shocks.marginal
    scale = float(marginal.std())
    if not np.isfinite(scale) or scale <= 0:
        q = marginal.ppf([0.001, 0.999])
        scale = float(q[1] - q[0]) / 2.0
    L = span * sum(abs(w) for w in weights) * scale
    N = points + 1  # odd point count puts 0 exactly on the grid
    grid = np.linspace(-L, L, N)
    h = grid[1] - grid[0]
    M = (N - 1) // 2

    w0 = weights[0]
    if w0 > 0:
        F = np.asarray(marginal.cdf(grid / w0), dtype=float)
    else:
        F = 1.0 - np.asarray(marginal.cdf(grid / w0), dtype=float)
    for w in weights[1:]:
        dens = np.asarray(marginal.pdf(grid / w), dtype=float) / abs(w)
        kern = dens * h
        kern[0] *= 0.5
        kern[-1] *= 0.5
        fext = np.concatenate([np.zeros(M), F, np.ones(M)])
        conv = spsig.fftconvolve(fext, kern)
        F = conv[2 * M : 2 * M + N]
    F = np.clip(F, 0.0, 1.0)
    F = np.maximum.accumulate(F)
    if F[-1] > 0:
        F = F / F[-1]
    return CompositeCDF(grid, F, weights)


def known_cdf_bounds(
    data: PanelData,
    theta: Theta,
    cfg: SignedConfiguration,
    c_grid: np.ndarray | None = None,
    *,
    shocks=None,
    instance_cap: int = 200_000,
    seed: int = 0,
    slack: float = 3.0,
    min_cell_count: int = 30,
    config_id: str | None = None,
) -> BoundsResult:
    """Explicit sandwich for a dyad-balanced configuration when the marginal
    CDF is known and shocks are serially independent: per conditioning cell z
    and threshold c, both one-sided checks run against the convolution middle
    term (lower <= F(c) and F(c) <= upper).

    The c = 0 dyad-transition case is the max-score check: the difference of
    two iid continuous shocks is symmetric, so F(0) = 1/2.
    """
    if not cfg.plus or not cfg.minus:
        raise ValueError("both sides of the configuration must be nonempty")
    _require_dyad_balanced(cfg)
    shocks = shocks if shocks is not None else data.shocks
    if shocks is None:
        raise ValueError("known-CDF bounds need the shock specification")
    middle = composite_cdf(shocks, cfg)
    table = _pattern_class_table(
        data, [cfg], instance_cap=instance_cap, seed=seed, member_labels=["g0"]
    )
    return _evaluate_percell(
        table,
        theta,
        middle,
        c_grid,
        slack=slack,
        min_cell_count=min_cell_count,
        family="known_cdf",
        config_id=config_id or "cfg",
    )


def weighted_node_bounds(
    data: PanelData,
    theta: Theta,
    wcfg: WeightedConfiguration,
    c_grid: np.ndarray | None = None,
    *,
    shocks=None,
    use_middle: bool = True,
    instance_cap: int = 200_000,
    seed: int = 0,
    slack: float = 3.0,
    min_cell_count: int = 30,
    config_id: str | None = None,
) -> BoundsResult:
    """Weighted node-differencing under additive node effects: conditions on
    the retained nodes' histories (weighted incidence nonzero) and profiles
    the sup/inf over eliminated-node histories.

    For a completely node-balanced configuration with a known serially
    independent marginal, the middle CDF is the known convolution and both
    one-sided checks run per cell; otherwise the latent-CDF envelope runs per
    retained-history cell.
    """
    if not wcfg.plus or not wcfg.minus:
        raise ValueError("both weight sign classes must be nonempty")
    shocks = shocks if shocks is not None else data.shocks
    balanced = wcfg.is_node_balanced()
    table = _pattern_class_table(
        data,
        [wcfg],
        retained_nodes_mode=True,
        instance_cap=instance_cap,
        seed=seed,
        member_labels=["g0"],
    )
    if (
        balanced
        and use_middle
        and shocks is not None
        and getattr(shocks, "serially_independent", False)
    ):
        middle = composite_cdf(shocks, wcfg)
        return _evaluate_percell(
            table,
            theta,
            middle,
            c_grid,
            slack=slack,
            min_cell_count=min_cell_count,
            family="weighted_node",
            config_id=config_id or "wcfg",
        )
    return _evaluate_envelope(
        table,
        theta,
        c_grid,
        slack=slack,
        min_cell_count=min_cell_count,
        family="weighted_node",
        config_id=config_id or "wcfg",
    )


# ---------------------------------------------------------------------------
# Identified sets
# ---------------------------------------------------------------------------

_STANDARD_FAMILIES = (
    "dyad_panel",
    "dyad_transitions",
    "balanced_subgraphs",
    "node_balanced_tetrads",
)


def _transition_patterns(T: int) -> list[tuple[str, SignedConfiguration]]:
    out = []
    for s in range(1, T + 1):
        for t in range(s + 1, T + 1):
            out.append(
                (f"trans[{t}>{s}]", SignedConfiguration(((0, 1, t),), ((0, 1, s),)))
            )
    return out


def _two_dyad_patterns(T: int) -> list[tuple[str, SignedConfiguration]]:
    """Dyad-balanced two-dyad subgraphs: both dyads transition s -> t."""
    out = []
    for s in range(1, T + 1):
        for t in range(s + 1, T + 1):
            cfg = SignedConfiguration(
                ((0, 1, t), (2, 3, t)), ((0, 1, s), (2, 3, s))
            )
            out.append((f"pair[{t}>{s}]", cfg))
    return out


def _tetrad_patterns(T: int) -> list[tuple[str, SignedConfiguration]]:
    """Within-date tetrads: completely node-balanced but not dyad-balanced;
    their unconditional sandwich is valid only under additive node effects
    (the weighted node-differencing route with unit weights)."""
    out = []
    for t in range(1, T + 1):
        cfg = SignedConfiguration(((0, 1, t), (2, 3, t)), ((0, 2, t), (1, 3, t)))
        out.append((f"tetrad[t={t}]", cfg))
    return out


def identified_set(
    data: PanelData,
    theta_grid: Sequence[Theta],
    families: Sequence[str] = ("dyad_panel", "dyad_transitions", "balanced_subgraphs"),
    slack: float = 3.0,
    c_grid: np.ndarray | None = None,
    *,
    instance_cap: int = 200_000,
    seed: int = 0,
    min_cell_count: int = 30,
) -> IdentifiedSetReport:
    """Grid membership test: a theta passes when every selected restriction
    family shows no violation beyond ``slack`` combined standard errors.

    Families are independent screens intersected without any sharp
    combination.  dyad_panel, dyad_transitions, and balanced_subgraphs are
    valid under unrestricted dyad effects; node_balanced_tetrads presumes
    additive node effects.  The c grid defaults to per-theta quantiles of
    the realized index or contrast values, plus 0.
    """
    if not theta_grid:
        raise ValueError("theta grid is empty")
    if not families:
        raise ValueError("restriction menu is empty")
    unknown = [f for f in families if f not in _STANDARD_FAMILIES]
    if unknown:
        raise ValueError(f"unknown families {unknown}; known: {_STANDARD_FAMILIES}")

    tables: list[tuple[str, str, _MomentTable]] = []
    if "dyad_panel" in families:
        if data.T < 2:
            raise ValueError("dyad-panel bounds need at least two dates (T >= 2)")
        tables.append(("dyad_panel", "panel", _dyad_panel_table(data)))
    pattern_menu = {
        "dyad_transitions": _transition_patterns,
        "balanced_subgraphs": _two_dyad_patterns,
        "node_balanced_tetrads": _tetrad_patterns,
    }
    for fam, patterns in pattern_menu.items():
        if fam not in families:
            continue
        for label, cfg in patterns(data.T):
            tables.append(
                (
                    fam,
                    label,
                    _pattern_class_table(
                        data, [cfg], instance_cap=instance_cap, seed=seed
                    ),
                )
            )

    verdicts = []
    for theta in theta_grid:
        violations: list[Violation] = []
        for family, label, table in tables:
            res = _evaluate_envelope(
                table,
                theta,
                c_grid,
                slack=slack,
                min_cell_count=min_cell_count,
                family=family,
                config_id=label,
            )
            violations.extend(res.violations)
        verdicts.append(ThetaVerdict(theta=theta, passed=not violations, violations=violations))
    return IdentifiedSetReport(slack=slack, families=tuple(families), verdicts=verdicts)
