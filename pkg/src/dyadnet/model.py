"""Structural model for dynamic dyadic link formation.

A panel of undirected binary networks evolves as

    D[i,j,t] = 1{ z_dyad(i,j,t)'alpha + x_lag(i,j,t)'lambda + A[i,j] - U[i,j,t] >= 0 }

where z_dyad is the coordinate-wise absolute difference of node covariates,
x_lag is a vector of statistics of the date t-1 network, A is a time-invariant
dyad effect and U is an idiosyncratic shock.  This module houses the domain
types (panel, covariates, parameters, heterogeneity and shock specifications,
statistic registry), the forward simulator, and panel serialization.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

__all__ = [
    "NetworkPanel",
    "NodeCovariatePanel",
    "Theta",
    "UnrestrictedDyad",
    "AdditiveNode",
    "LatentDistance",
    "UnrestrictedDyadDraw",
    "AdditiveNodeDraw",
    "LatentDistanceDraw",
    "IidLogistic",
    "IidKnownMarginal",
    "Ar1GaussianCopula",
    "CovariateSpec",
    "EmptyInitial",
    "ErdosRenyiInitial",
    "GivenInitial",
    "LaggedLink",
    "CommonFriends",
    "FriendsOfFriends",
    "StatisticRegistry",
    "default_registry",
    "ModelSpec",
    "SimulationResult",
    "dyadic_covariates",
    "lagged_stats",
    "index_W",
    "simulate_panel",
    "dyadic_covariate_tensor",
    "statistic_tensor",
    "save_panel",
    "load_panel",
]


def _rng(seed: int, *key: int) -> np.random.Generator:
    """Substream generator: a stable (seed, key) scheme.

    Shocks use key (3, t) per date so enlarging T never perturbs earlier dates.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


_KEY_HETEROGENEITY = 0
_KEY_COVARIATES = 1
_KEY_INITIAL = 2
_KEY_SHOCKS = 3


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class NetworkPanel:
    """Binary symmetric adjacency arrays for dates 0..T.

    Parameters
    ----------
    links : ndarray, shape (T+1, n, n)
        links[t] is the adjacency matrix at date t.  Must be 0/1, symmetric,
        with a zero diagonal.  Stored read-only.
    """

    def __init__(self, links: np.ndarray):
        links = np.asarray(links)
        if links.ndim != 3 or links.shape[1] != links.shape[2]:
            raise ValueError("links must have shape (T+1, n, n)")
        if not np.isin(links, (0, 1)).all():
            raise ValueError("links must be binary")
        if np.abs(links - np.transpose(links, (0, 2, 1))).max(initial=0) != 0:
            raise ValueError("links must be symmetric in (i, j) at every date")
        if links.shape[0] and np.abs(np.diagonal(links, axis1=1, axis2=2)).max(initial=0) != 0:
            raise ValueError("self-links are not allowed")
        self.links = links.astype(np.int8)
        self.links.flags.writeable = False

    @property
    def n(self) -> int:
        return self.links.shape[1]

    @property
    def T(self) -> int:
        return self.links.shape[0] - 1

    def adjacency(self, t: int) -> np.ndarray:
        if not 0 <= t <= self.T:
            raise ValueError(f"date {t} outside 0..{self.T}")
        return self.links[t]

    def link(self, i: int, j: int, t: int) -> int:
        if i == j:
            raise ValueError("no self-links")
        return int(self.adjacency(t)[i, j])

    def link_rate(self, t: int | None = None) -> float:
        """Mean link indicator over dyads (and over dates 1..T if t is None)."""
        iu = np.triu_indices(self.n, 1)
        if t is not None:
            return float(self.adjacency(t)[iu].mean())
        return float(self.links[1:, iu[0], iu[1]].mean())


class NodeCovariatePanel:
    """Node-level covariates Z[i, t] for dates 1..T.

    values has shape (T, n, d_z); date t lives at index t-1.  When ``support``
    is given, every entry must belong to the per-coordinate finite support
    (discrete mode, which makes exact conditioning cells well defined).
    """

    def __init__(self, values: np.ndarray, support: tuple[tuple[float, ...], ...] | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3:
            raise ValueError("values must have shape (T, n, d_z)")
        if not np.isfinite(values).all():
            raise ValueError("covariates must be finite")
        if support is not None:
            if len(support) != values.shape[2]:
                raise ValueError("support must declare one value set per coordinate")
            for k, sup in enumerate(support):
                if not np.isin(values[:, :, k], np.asarray(sup, dtype=float)).all():
                    raise ValueError(f"coordinate {k} leaves its declared support")
        self.values = values
        self.values.flags.writeable = False
        self.support = support

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def d_z(self) -> int:
        return self.values.shape[2]

    @property
    def discrete(self) -> bool:
        return self.support is not None

    def z(self, i: int, t: int) -> np.ndarray:
        if not 1 <= t <= self.T:
            raise ValueError(f"date {t} outside 1..{self.T}")
        if not 0 <= i < self.n:
            raise ValueError(f"node {i} outside 0..{self.n - 1}")
        return self.values[t - 1, i]

    def node_history(self, i: int) -> tuple[float, ...]:
        """Full covariate history of node i, flattened over (t, coordinate)."""
        return tuple(self.values[:, i, :].ravel().tolist())


@dataclasses.dataclass(frozen=True)
class Theta:
    """Index parameters: alpha on dyadic covariates, lam on lagged statistics."""

    alpha: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(self, "lam", np.atleast_1d(np.asarray(self.lam, dtype=float)))

    @property
    def d_h(self) -> int:
        return self.alpha.size

    @property
    def d_x(self) -> int:
        return self.lam.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.lam])

    @classmethod
    def from_vector(cls, v: np.ndarray, d_h: int) -> "Theta":
        v = np.asarray(v, dtype=float)
        return cls(v[:d_h], v[d_h:])

    def scaled(self, k: float) -> "Theta":
        return Theta(k * self.alpha, k * self.lam)


# --- heterogeneity -----------------------------------------------------------


class UnrestrictedDyad:
    """Realized unrestricted dyad effects: a symmetric (n, n) matrix."""

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.array_equal(A, A.T):
            raise ValueError("A must be a symmetric square matrix")
        self.A = A

    def realize(self, n, Z, rng):
        if self.A.shape[0] != n:
            raise ValueError("dyad-effect matrix size does not match n")
        return self

    def dyad_effects(self) -> np.ndarray:
        return self.A


class AdditiveNode:
    """Realized additive node effects: A[i,j] = nu[i] + nu[j]."""

    def __init__(self, nu: np.ndarray):
        self.nu = np.asarray(nu, dtype=float)

    def realize(self, n, Z, rng):
        if self.nu.size != n:
            raise ValueError("nu size does not match n")
        return self

    def dyad_effects(self) -> np.ndarray:
        return self.nu[:, None] + self.nu[None, :]


class LatentDistance:
    """Realized latent-distance effects: A[i,j] = nu[i] + nu[j] - |xi[i] - xi[j]|."""

    def __init__(self, nu: np.ndarray, xi: np.ndarray):
        self.nu = np.asarray(nu, dtype=float)
        self.xi = np.asarray(xi, dtype=float)
        if self.nu.shape != self.xi.shape:
            raise ValueError("nu and xi must have equal length")

    def realize(self, n, Z, rng):
        if self.nu.size != n:
            raise ValueError("nu size does not match n")
        return self

    def dyad_effects(self) -> np.ndarray:
        return (
            self.nu[:, None]
            + self.nu[None, :]
            - np.abs(self.xi[:, None] - self.xi[None, :])
        )


@dataclasses.dataclass
class UnrestrictedDyadDraw:
    """Draw A[i,j] iid normal(loc, scale) on the upper triangle, symmetrized."""

    loc: float = 0.0
    scale: float = 1.0

    def realize(self, n: int, Z: NodeCovariatePanel, rng: np.random.Generator) -> UnrestrictedDyad:
        A = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        A[iu] = self.loc + self.scale * rng.standard_normal(iu[0].size)
        return UnrestrictedDyad(A + A.T)


@dataclasses.dataclass
class AdditiveNodeDraw:
    """Draw nu_i iid normal(loc, scale); ``hook(nu, Z, rng)`` may rewrite nu to
    induce dependence between node effects and covariate histories."""

    loc: float = 0.0
    scale: float = 1.0
    hook: Callable[[np.ndarray, NodeCovariatePanel, np.random.Generator], np.ndarray] | None = None

    def realize(self, n: int, Z: NodeCovariatePanel, rng: np.random.Generator) -> AdditiveNode:
        nu = self.loc + self.scale * rng.standard_normal(n)
        if self.hook is not None:
            nu = np.asarray(self.hook(nu, Z, rng), dtype=float)
        return AdditiveNode(nu)


@dataclasses.dataclass
class LatentDistanceDraw:
    """Draw nu_i normal(nu_loc, nu_scale) and latent positions xi_i normal(0, xi_scale)."""

    nu_loc: float = 0.0
    nu_scale: float = 1.0
    xi_scale: float = 1.0

    def realize(self, n: int, Z: NodeCovariatePanel, rng: np.random.Generator) -> LatentDistance:
        nu = self.nu_loc + self.nu_scale * rng.standard_normal(n)
        xi = self.xi_scale * rng.standard_normal(n)
        return LatentDistance(nu, xi)


# --- shocks ------------------------------------------------------------------


class _ShockBase:
    """Per-dyad, per-date shocks built from date-keyed uniform substreams.

    ``start`` maps the date-1 uniforms to (U_1, state); ``step`` advances one
    date.  Marginals are homogeneous across dates by construction.
    """

    marginal: object  # scipy.stats frozen distribution
    serially_independent: bool

    def validate(self):
        # spot-check that the marginal CDF is continuous and strictly increasing
        q = self.marginal.ppf([0.25, 0.5, 0.75])
        if not np.all(np.diff(q) > 0):
            raise ValueError("marginal CDF must be strictly increasing")

    def start(self, u: np.ndarray):
        raise NotImplementedError

    def step(self, u: np.ndarray, state):
        raise NotImplementedError


class IidLogistic(_ShockBase):
    """Shocks iid standard logistic across dyads and dates."""

    def __init__(self):
        self.marginal = sps.logistic()
        self.serially_independent = True

    def start(self, u):
        return self.marginal.ppf(u), None

    def step(self, u, state):
        return self.marginal.ppf(u), None


class IidKnownMarginal(_ShockBase):
    """Serially independent shocks with a known marginal (scipy frozen dist)."""

    def __init__(self, marginal):
        self.marginal = marginal
        self.serially_independent = True
        self.validate()

    def start(self, u):
        return self.marginal.ppf(u), None

    def step(self, u, state):
        return self.marginal.ppf(u), None


class Ar1GaussianCopula(_ShockBase):
    """Serially correlated shocks: a Gaussian AR(1) copula with the given
    stationary marginal.  rho=0 coincides in distribution with
    IidKnownMarginal of the same marginal."""

    def __init__(self, rho: float, marginal=None):
        if not -1.0 < rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        self.rho = float(rho)
        self.marginal = sps.logistic() if marginal is None else marginal
        self.serially_independent = rho == 0.0
        self.validate()

    def _to_marginal(self, e):
        return self.marginal.ppf(sps.norm.cdf(e))

    def start(self, u):
        e = sps.norm.ppf(u)
        return self._to_marginal(e), e

    def step(self, u, state):
        e = self.rho * state + np.sqrt(1.0 - self.rho**2) * sps.norm.ppf(u)
        return self._to_marginal(e), e


# --- covariates and initial network ------------------------------------------


@dataclasses.dataclass
class CovariateSpec:
    """Node covariate process, iid across nodes and dates.

    With ``support`` set (default: binary per coordinate) values are drawn
    uniformly from the finite support and conditioning cells can be matched
    exactly.  A custom ``sampler(rng, T, n, d_z)`` may be supplied instead;
    bounds conditioning on continuous draws then needs a user binning map.
    """

    d_z: int = 1
    support: tuple[tuple[float, ...], ...] | None = None
    sampler: Callable[[np.random.Generator, int, int, int], np.ndarray] | None = None

    def __post_init__(self):
        if self.support is None and self.sampler is None:
            self.support = ((0.0, 1.0),) * self.d_z

    def draw(self, T: int, n: int, rng: np.random.Generator) -> NodeCovariatePanel:
        if self.sampler is not None:
            values = np.asarray(self.sampler(rng, T, n, self.d_z), dtype=float)
            return NodeCovariatePanel(values, support=self.support)
        values = np.empty((T, n, self.d_z))
        for k, sup in enumerate(self.support):
            sup = np.asarray(sup, dtype=float)
            values[:, :, k] = rng.choice(sup, size=(T, n))
        return NodeCovariatePanel(values, support=self.support)


class EmptyInitial:
    def realize(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.zeros((n, n), dtype=np.int8)


@dataclasses.dataclass
class ErdosRenyiInitial:
    p: float

    def realize(self, n: int, rng: np.random.Generator) -> np.ndarray:
        D = np.zeros((n, n), dtype=np.int8)
        iu = np.triu_indices(n, 1)
        D[iu] = rng.random(iu[0].size) < self.p
        return D + D.T


class GivenInitial:
    def __init__(self, adjacency: np.ndarray):
        self.adjacency = np.asarray(adjacency)

    def realize(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.adjacency.shape != (n, n):
            raise ValueError("given initial network has the wrong shape")
        return self.adjacency.astype(np.int8)


# --- lagged statistic registry -------------------------------------------------


class LaggedLink:
    """D[i,j,t-1]: own lagged link status."""

    name = "lagged_link"

    def evaluate(self, prev: np.ndarray) -> np.ndarray:
        return prev.astype(float)


class CommonFriends:
    """Number of common neighbors k of i and j in the lagged network."""

    name = "common_friends"

    def evaluate(self, prev: np.ndarray) -> np.ndarray:
        P = prev.astype(float)
        return P @ P  # zero diagonal of P removes k = i and k = j terms


class FriendsOfFriends:
    """Count of nodes k (k != i, j) not directly linked to i at t-1 but
    reachable from i through some intermediary m not in {i, j, k}.

    Anchored at the lower-indexed node of the canonical dyad, so the value is
    a function of the unordered dyad; it is not symmetric in the roles of the
    two endpoints.
    """

    name = "friends_of_friends"

    def evaluate(self, prev: np.ndarray) -> np.ndarray:
        n = prev.shape[0]
        P = prev.astype(float)
        paths2 = P @ P  # paths2[i,k] counts m with i-m-k, m != i,k by zero diagonal
        out = np.zeros((n, n))
        # reachable[i,k] via m != i,j,k requires removing the m=j path per dyad (i,j)
        for j in range(n):
            via = paths2 - np.outer(P[:, j], P[j, :])
            eligible = (P == 0) & (via >= 1)
            eligible[:, j] = False
            np.fill_diagonal(eligible, False)
            out[:, j] = eligible.sum(axis=1)
        # anchor at the lower-indexed node: entry (i,j) uses the count of the
        # smaller index regardless of argument order
        anchored = np.where(np.arange(n)[:, None] < np.arange(n)[None, :], out, out.T)
        np.fill_diagonal(anchored, 0.0)
        return anchored


class StatisticRegistry:
    """Ordered list of lagged network statistics.

    Each statistic maps the date t-1 adjacency matrix to an (n, n) matrix of
    dyad values; it may depend only on the lagged network and the dyad
    identity (sequential exogeneity).
    """

    def __init__(self, statistics: Sequence[object]):
        if not statistics:
            raise ValueError("registry needs at least one statistic")
        self.statistics = list(statistics)

    @property
    def d_x(self) -> int:
        return len(self.statistics)

    @property
    def names(self) -> list[str]:
        return [getattr(s, "name", type(s).__name__) for s in self.statistics]

    def evaluate(self, prev: np.ndarray) -> np.ndarray:
        """Stack statistic matrices: output shape (d_x, n, n)."""
        return np.stack([s.evaluate(prev) for s in self.statistics])


def default_registry() -> StatisticRegistry:
    return StatisticRegistry([LaggedLink(), CommonFriends()])


# --- model spec and simulation output ------------------------------------------


@dataclasses.dataclass
class ModelSpec:
    n: int
    T: int
    theta0: Theta
    heterogeneity: object = dataclasses.field(default_factory=lambda: AdditiveNodeDraw())
    shocks: object = dataclasses.field(default_factory=IidLogistic)
    covariates: CovariateSpec = dataclasses.field(default_factory=CovariateSpec)
    registry: StatisticRegistry = dataclasses.field(default_factory=default_registry)
    initial: object = dataclasses.field(default_factory=EmptyInitial)

    def __post_init__(self):
        if self.theta0.d_h != self.covariates.d_z:
            raise ValueError("theta0.alpha dimension must equal d_z")
        if self.theta0.d_x != self.registry.d_x:
            raise ValueError("theta0.lam dimension must equal the registry size")
        if self.n < 2 or self.T < 1:
            raise ValueError("need n >= 2 and T >= 1")


@dataclasses.dataclass
class SimulationResult:
    """Simulated panel plus the realized-latents record used by exact oracles."""

    panel: NetworkPanel
    covariates: NodeCovariatePanel
    spec: ModelSpec
    seed: int
    heterogeneity: object
    dyad_effects: np.ndarray          # (n, n) realized A
    shocks: np.ndarray                # (T, n, n) realized U, date t at index t-1
    index: np.ndarray                 # (T, n, n) realized W at theta0

    @property
    def nu(self) -> np.ndarray | None:
        return getattr(self.heterogeneity, "nu", None)

    @property
    def xi(self) -> np.ndarray | None:
        return getattr(self.heterogeneity, "xi", None)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def dyadic_covariates(Z: NodeCovariatePanel, i: int, j: int, t: int) -> np.ndarray:
    """Coordinate-wise absolute covariate difference |Z_it - Z_jt|."""
    if i == j:
        raise ValueError("dyadic covariates need two distinct nodes")
    return np.abs(Z.z(i, t) - Z.z(j, t))


def lagged_stats(panel: NetworkPanel, registry: StatisticRegistry, i: int, j: int, t: int) -> np.ndarray:
    """Registry statistics for dyad (i, j) evaluated on the date t-1 network."""
    if t < 1:
        raise ValueError("lagged statistics need t >= 1 (no lag at date 0)")
    if t > panel.T:
        raise ValueError(f"date {t} outside 1..{panel.T}")
    if i == j:
        raise ValueError("no self-dyads")
    prev = panel.adjacency(t - 1)
    return np.array([s.evaluate(prev)[i, j] for s in registry.statistics])


def index_W(theta: Theta, zdyad: np.ndarray, xlag: np.ndarray) -> float:
    """Linear index z'alpha + x'lambda."""
    zdyad = np.asarray(zdyad, dtype=float)
    xlag = np.asarray(xlag, dtype=float)
    if zdyad.shape != (theta.d_h,) or xlag.shape != (theta.d_x,):
        raise ValueError("index dimensions do not match theta")
    return float(zdyad @ theta.alpha + xlag @ theta.lam)


def dyadic_covariate_tensor(Z: NodeCovariatePanel, t: int) -> np.ndarray:
    """All-dyad covariate differences at date t: shape (d_z, n, n)."""
    zt = Z.values[t - 1]
    return np.abs(zt[:, None, :] - zt[None, :, :]).transpose(2, 0, 1)


def statistic_tensor(panel: NetworkPanel, registry: StatisticRegistry, t: int) -> np.ndarray:
    """All-dyad lagged statistics for date t: shape (d_x, n, n)."""
    if t < 1:
        raise ValueError("lagged statistics need t >= 1")
    return registry.evaluate(panel.adjacency(t - 1))


def simulate_panel(
    spec: ModelSpec,
    initial: np.ndarray | None = None,
    seed: int = 0,
    shock_seed: int | None = None,
) -> SimulationResult:
    """Simulate the panel forward over dates 1..T.

    Deterministic given ``seed``.  ``shock_seed`` reseeds only the shock
    substreams, holding covariates, heterogeneity, and the initial network
    fixed (used by conditional-frequency checks).
    """
    n, T = spec.n, spec.T
    Z = spec.covariates.draw(T, n, _rng(seed, _KEY_COVARIATES))
    het = spec.heterogeneity.realize(n, Z, _rng(seed, _KEY_HETEROGENEITY))
    A = het.dyad_effects()
    if initial is None:
        D0 = spec.initial.realize(n, _rng(seed, _KEY_INITIAL))
    else:
        D0 = GivenInitial(initial).realize(n, _rng(seed, _KEY_INITIAL))

    iu = np.triu_indices(n, 1)
    links = np.zeros((T + 1, n, n), dtype=np.int8)
    links[0] = D0
    U = np.zeros((T, n, n))
    W = np.zeros((T, n, n))
    sseed = seed if shock_seed is None else shock_seed
    state = None
    alpha, lam = spec.theta0.alpha, spec.theta0.lam
    for t in range(1, T + 1):
        u = _rng(sseed, _KEY_SHOCKS, t).random(iu[0].size)
        if t == 1:
            u_t, state = spec.shocks.start(u)
        else:
            u_t, state = spec.shocks.step(u, state)
        Ut = np.zeros((n, n))
        Ut[iu] = u_t
        Ut = Ut + Ut.T
        zd = dyadic_covariate_tensor(Z, t)
        xl = spec.registry.evaluate(links[t - 1])
        Wt = np.einsum("k,kij->ij", alpha, zd) + np.einsum("k,kij->ij", lam, xl)
        Dt = np.zeros((n, n), dtype=np.int8)
        Dt[iu] = (Wt[iu] + A[iu] - Ut[iu] >= 0).astype(np.int8)
        links[t] = Dt + Dt.T
        U[t - 1] = Ut
        W[t - 1] = Wt

    return SimulationResult(
        panel=NetworkPanel(links),
        covariates=Z,
        spec=spec,
        seed=seed,
        heterogeneity=het,
        dyad_effects=A,
        shocks=U,
        index=W,
    )


# ---------------------------------------------------------------------------
# Serialization: columnar text format, exact round-trip
# ---------------------------------------------------------------------------


def save_panel(path: str, panel: NetworkPanel, covariates: NodeCovariatePanel) -> None:
    """Write the panel and covariates to a columnar text file.

    Header: ``panel <n> <T> <d_z>``; link rows ``L i j t D`` for every dyad
    i<j and date 0..T; covariate rows ``Z i t v_1 .. v_dz`` with repr floats
    (exact round-trip).
    """
    n, T = panel.n, panel.T
    lines = [f"panel {n} {T} {covariates.d_z}"]
    iu = np.triu_indices(n, 1)
    for t in range(T + 1):
        d = panel.adjacency(t)[iu]
        lines.extend(
            f"L {i} {j} {t} {int(v)}" for i, j, v in zip(iu[0], iu[1], d)
        )
    for t in range(1, T + 1):
        for i in range(n):
            vals = " ".join(repr(float(v)) for v in covariates.z(i, t))
            lines.append(f"Z {i} {t} {vals}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_panel(path: str) -> tuple[NetworkPanel, NodeCovariatePanel]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "panel":
            raise ValueError("not a panel file: bad header")
        n, T, d_z = int(header[1]), int(header[2]), int(header[3])
        links = np.zeros((T + 1, n, n), dtype=np.int8)
        values = np.zeros((T, n, d_z))
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "L":
                i, j, t, d = int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4])
                links[t, i, j] = links[t, j, i] = d
            elif parts[0] == "Z":
                i, t = int(parts[1]), int(parts[2])
                values[t - 1, i] = [float(v) for v in parts[3:]]
            else:
                raise ValueError(f"unknown row tag {parts[0]!r}")
    return NetworkPanel(links), NodeCovariatePanel(values)
