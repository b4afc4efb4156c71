"""Four-mode CV cluster states from p-squeezed vacua and passive networks.

The preset networks below were solved so that the outputs reproduce the known
finite-squeezing nullifiers of the linear cluster exactly::

    p1 - x2      = sqrt(2) pA
    p2 - x1 - x3 = sqrt(5/2) pC + sqrt(1/2) pD
    p3 - x2 - x4 = sqrt(1/2) pA - sqrt(5/2) pB
    p4 - x3      = sqrt(2) pD

where pA..pD are the squeezed quadratures of the four inputs. The T-shape
network swaps the 1/5 beam splitter for a half beam splitter; the diamond
(a four-cycle) is the linear cluster after local Fourier rotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import elements
from .gaussian import (
    GaussianState,
    LinearProcess,
    QuadratureForm,
    SymplecticOp,
    db,
    embed,
    form_stats,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)


@dataclass(frozen=True)
class ClusterGraph:
    n: int
    edges: frozenset
    preset: str = "custom"

    def __post_init__(self):
        edges = frozenset(frozenset(e) for e in self.edges)
        for e in edges:
            if len(e) != 2:
                raise ValueError("self-loops are not allowed")
            if any(not 0 <= i < self.n for i in e):
                raise ValueError(f"edge {sorted(e)} out of range for {self.n} modes")
        object.__setattr__(self, "edges", edges)

    def neighbors(self, a: int) -> list[int]:
        return sorted(b for e in self.edges if a in e for b in e if b != a)

    def adjacency(self) -> np.ndarray:
        V = np.zeros((self.n, self.n))
        for e in self.edges:
            i, j = sorted(e)
            V[i, j] = V[j, i] = 1.0
        return V


LINEAR4 = ClusterGraph(4, {(0, 1), (1, 2), (2, 3)}, "linear4")
TSHAPE4 = ClusterGraph(4, {(0, 1), (1, 2), (1, 3)}, "tshape4")
DIAMOND4 = ClusterGraph(4, {(0, 2), (0, 3), (1, 2), (1, 3)}, "diamond4")
PRESETS = {"linear": LINEAR4, "tshape": TSHAPE4, "diamond": DIAMOND4}

# (op, modes, parameter); phases in degrees, applied in order to p-squeezed inputs
LINEAR_NETWORK = (
    ("phase", (2,), 90.0),
    ("phase", (3,), 90.0),
    ("bs", (1, 2), 0.2),
    ("bs", (0, 1), 0.5),
    ("bs", (2, 3), 0.5),
    ("fourier", (1,), None),
    ("fourier", (3,), None),
)
TSHAPE_NETWORK = (
    ("phase", (2,), 90.0),
    ("bs", (1, 2), 0.5),
    ("bs", (0, 1), 0.5),
    ("bs", (2, 3), 0.5),
    ("fourier", (1,), None),
    ("phase", (3,), 180.0),
)
DIAMOND_LOCAL_OPS = (
    ("phase", (1,), 90.0),
    ("fourier", (2,), None),
    ("phase", (3,), 180.0),
)
DIAMOND_NETWORK = LINEAR_NETWORK + DIAMOND_LOCAL_OPS
NETWORKS = {"linear": LINEAR_NETWORK, "tshape": TSHAPE_NETWORK, "diamond": DIAMOND_NETWORK}


def _element(op: str, param) -> SymplecticOp:
    if op == "bs":
        return elements.beamsplitter(param)
    if op == "phase":
        return elements.phase(np.deg2rad(param))
    if op == "fourier":
        return elements.fourier()
    raise ValueError(f"unknown network element {op!r}")


def network_op(steps: Iterable[tuple], n: int = 4) -> SymplecticOp:
    S = np.eye(2 * n)
    for op, modes, param in steps:
        S = embed(_element(op, param).S, modes, n) @ S
    return SymplecticOp(S)


def nullifier_forms(g: ClusterGraph) -> list[QuadratureForm]:
    """``p_a - sum_{b in N(a)} x_b`` for every mode ``a``."""
    forms = []
    for a in range(g.n):
        c = np.zeros(2 * g.n)
        c[2 * a + 1] = 1.0
        for b in g.neighbors(a):
            c[2 * b] -= 1.0
        forms.append(QuadratureForm(c))
    return forms


def p_squeezed_inputs(v_sq, v_anti=None, n: int = 4) -> GaussianState:
    """Tensor product of p-squeezed vacua; scalars are shared by all modes."""
    v_sq = np.broadcast_to(np.asarray(v_sq, dtype=float), (n,))
    v_anti = [None] * n if v_anti is None else np.broadcast_to(np.asarray(v_anti, dtype=float), (n,))
    return tensor(*(squeezed_vacuum(v, a, np.pi / 2) for v, a in zip(v_sq, v_anti)))


def cluster_process(shape: str) -> LinearProcess:
    return LinearProcess(network_op(NETWORKS[shape]).S)


def build_cluster(shape: str, v_sq, v_anti=None) -> GaussianState:
    if shape not in NETWORKS:
        raise ValueError(f"unknown cluster shape {shape!r}; expected one of {sorted(NETWORKS)}")
    return linear_process(cluster_process(shape), p_squeezed_inputs(v_sq, v_anti))


def build_linear_cluster4(v_sq, v_anti=None) -> GaussianState:
    return build_cluster("linear", v_sq, v_anti)


def build_tshape4(v_sq, v_anti=None) -> GaussianState:
    return build_cluster("tshape", v_sq, v_anti)


def build_diamond4(v_sq, v_anti=None) -> GaussianState:
    return build_cluster("diamond", v_sq, v_anti)


def graph_network(g: ClusterGraph) -> SymplecticOp:
    """Passive network turning p-squeezed inputs into the cluster of any graph.

    Uses the unitary ``(I + iV)(I + V^2)^(-1/2)`` with ``V`` the adjacency matrix.
    """
    V = g.adjacency()
    w, Q = np.linalg.eigh(np.eye(g.n) + V @ V)
    X = Q @ np.diag(w**-0.5) @ Q.T
    Y = V @ X
    S = np.zeros((2 * g.n, 2 * g.n))
    S[0::2, 0::2], S[0::2, 1::2] = X, -Y
    S[1::2, 0::2], S[1::2, 1::2] = Y, X
    return SymplecticOp(S)


def build_graph_state(g: ClusterGraph, v_sq, v_anti=None) -> GaussianState:
    return linear_process(LinearProcess(graph_network(g).S), p_squeezed_inputs(v_sq, v_anti, g.n))


@dataclass(frozen=True)
class NullifierRow:
    label: str
    variance: float
    vacuum_variance: float

    @property
    def db(self) -> float:
        return db(self.variance, self.vacuum_variance)


def nullifier_table(state: GaussianState, g: ClusterGraph) -> list[NullifierRow]:
    """Nullifier variances with their vacuum references (same form on vacuum)."""
    vac = vacuum(g.n)
    return [
        NullifierRow(f.label(), form_stats(state, f)[1], form_stats(vac, f)[1])
        for f in nullifier_forms(g)
    ]


@dataclass(frozen=True)
class InseparabilityResult:
    sums: tuple[float, float, float]
    bound: float = 4.0

    @property
    def verdicts(self) -> tuple[bool, bool, bool]:
        return tuple(s < self.bound for s in self.sums)

    @property
    def fully_inseparable(self) -> bool:
        return all(self.verdicts)


def inseparability_check(state: GaussianState, g: ClusterGraph = LINEAR4) -> InseparabilityResult:
    """Pairwise nullifier-variance sums for the four-mode linear cluster, each vs 4."""
    if state.n_modes != 4:
        raise ValueError("inseparability check needs a four-mode state")
    if g.edges != LINEAR4.edges:
        raise ValueError("the inseparability sums are defined for the linear cluster")
    v = [form_stats(state, f)[1] for f in nullifier_forms(g)]
    return InseparabilityResult((v[0] + v[1], v[3] + v[2], v[1] + v[2]))


def inseparability_threshold(lo: float = 1e-6, hi: float = 1.0, tol: float = 1e-12) -> float:
    """Largest shared v_sq at which the linear cluster passes all three sums (bisection)."""
    passes = lambda v: inseparability_check(build_linear_cluster4(v)).fully_inseparable  # noqa: E731
    if not passes(lo) or passes(hi):
        raise ValueError("threshold not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if passes(mid) else (lo, mid)
    return 0.5 * (lo + hi)


def local_fourier_all(state: GaussianState) -> GaussianState:
    F = elements.fourier()
    S = np.kron(np.eye(state.n_modes), F.S)
    return GaussianState(S @ state.mean, S @ state.cov @ S.T)


def transform_form(f: QuadratureForm, op: SymplecticOp) -> QuadratureForm:
    """Form on the transformed state with the same statistics: ``c -> c S^-1``."""
    return QuadratureForm(np.linalg.solve(op.S.T, f.coeffs), f.offset - f.coeffs @ np.linalg.solve(op.S, op.d))
