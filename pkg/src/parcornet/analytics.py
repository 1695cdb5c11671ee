"""Descriptive measures, centralities, and shock propagation on a
partial correlation network.

The graph is the binarized network: nodes j,k are adjacent exactly when
the partial correlation is nonzero. Weighted quantities (strength,
eigenvector centrality, shocks) use the matrix entries themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DivergenceError, NumericError
from .matrices import PartialCorrelationMatrix

EIG_TOL = 1e-12
EIG_MAX_ITER = 10_000


@dataclass(frozen=True)
class NetworkMeasures:
    p: int
    edge_count: int
    mean_degree: float
    mean_distance: float
    mean_eccentricity: float
    mean_clustering: float
    mean_strength: float

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "edge_count": self.edge_count,
            "mean_degree": self.mean_degree,
            "mean_distance": self.mean_distance,
            "mean_eccentricity": self.mean_eccentricity,
            "mean_clustering": self.mean_clustering,
            "mean_strength": self.mean_strength,
        }


@dataclass(frozen=True)
class NodeCentralities:
    degree: np.ndarray
    strength: np.ndarray
    eigenvector: np.ndarray


@dataclass(frozen=True)
class ShockResult:
    node: int
    initial: np.ndarray
    steady_state: np.ndarray
    total: float
    spectral_radius: float
    abs_radius_bound: float


def _pc_values(network) -> np.ndarray:
    if isinstance(network, PartialCorrelationMatrix):
        return network.values
    return PartialCorrelationMatrix(np.asarray(network, dtype=float)).values


def adjacency(network) -> np.ndarray:
    """Boolean adjacency: an edge wherever the entry is nonzero."""
    vals = _pc_values(network)
    adj = vals != 0.0
    np.fill_diagonal(adj, False)
    return adj


def degrees(network) -> np.ndarray:
    return adjacency(network).sum(axis=1)


def strengths(network, absolute: bool = False) -> np.ndarray:
    """Row sums of the weights; signed by default, absolute on request."""
    vals = _pc_values(network)
    return np.abs(vals).sum(axis=1) if absolute else vals.sum(axis=1)


def distance_matrix(network) -> np.ndarray:
    """Unweighted shortest-path distances; inf marks unreachable pairs."""
    adj = adjacency(network)
    return shortest_path(csr_matrix(adj), method="D", directed=False, unweighted=True)


def eccentricities(network) -> np.ndarray:
    """Max finite distance from each node; isolated nodes get 0."""
    d = distance_matrix(network)
    np.fill_diagonal(d, np.inf)
    ecc = np.zeros(d.shape[0])
    for j in range(d.shape[0]):
        finite = d[j][np.isfinite(d[j])]
        ecc[j] = finite.max() if finite.size else 0.0
    return ecc


def mean_distance(network) -> float:
    """Mean over finite-distance unordered pairs; 0 when there are none."""
    d = distance_matrix(network)
    iu = np.triu_indices_from(d, k=1)
    vals = d[iu]
    finite = vals[np.isfinite(vals)]
    return float(finite.mean()) if finite.size else 0.0


def clustering_coefficients(network) -> np.ndarray:
    """Triangles over wedges per node; degree < 2 gives 0."""
    a = adjacency(network).astype(float)
    deg = a.sum(axis=1)
    triangles = np.diag(a @ a @ a) / 2.0
    out = np.zeros(a.shape[0])
    for j in range(a.shape[0]):
        k = deg[j]
        if k >= 2.0:
            out[j] = triangles[j] / (k * (k - 1.0) / 2.0)
    return out


def eigenvector_centrality(network, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> np.ndarray:
    """Principal eigenvector of |P|, scaled so the largest entry is 1.

    Power iteration on |P| + I from a uniform start; the identity shift
    makes the top eigenvalue strictly dominant for any symmetric
    nonnegative matrix, so the iteration cannot oscillate. With equal
    disconnected components the limit splits mass by the uniform start
    rather than picking one component. An all-zero matrix returns zeros.
    """
    w = np.abs(_pc_values(network))
    p = w.shape[0]
    if w.max() == 0.0:
        return np.zeros(p)
    shifted = w + np.eye(p)
    v = np.full(p, 1.0 / np.sqrt(p))
    for _ in range(max_iter):
        nxt = shifted @ v
        nxt /= np.linalg.norm(nxt)
        if np.abs(nxt - v).max() < tol:
            v = nxt
            break
        v = nxt
    else:
        raise NumericError(f"eigenvector centrality did not converge in {max_iter} iterations")
    top = np.abs(v).max()
    return np.abs(v) / top if top > 0.0 else np.zeros(p)


def node_centralities(network, absolute_strength: bool = False) -> NodeCentralities:
    return NodeCentralities(
        degree=degrees(network),
        strength=strengths(network, absolute=absolute_strength),
        eigenvector=eigenvector_centrality(network),
    )


def measures(network, absolute_strength: bool = False) -> NetworkMeasures:
    vals = _pc_values(network)
    adj = adjacency(vals)
    p = vals.shape[0]
    deg = adj.sum(axis=1)
    return NetworkMeasures(
        p=p,
        edge_count=int(adj.sum()) // 2,
        mean_degree=float(deg.mean()),
        mean_distance=mean_distance(vals),
        mean_eccentricity=float(eccentricities(vals).mean()),
        mean_clustering=float(clustering_coefficients(vals).mean()),
        mean_strength=float(strengths(vals, absolute=absolute_strength).mean()),
    )


def spectral_radius(network) -> float:
    """Largest absolute eigenvalue (symmetric input)."""
    vals = _pc_values(network)
    return float(np.abs(np.linalg.eigvalsh(vals)).max())


def abs_radius_bound(network, tol: float = 1e-10, max_iter: int = EIG_MAX_ITER) -> float:
    """Power-iteration estimate of the spectral radius of |P|; an upper
    bound for the radius of P itself."""
    w = np.abs(_pc_values(network))
    if w.max() == 0.0:
        return 0.0
    v = np.full(w.shape[0], 1.0 / np.sqrt(w.shape[0]))
    est = 0.0
    for _ in range(max_iter):
        nxt = (w + np.eye(w.shape[0])) @ v
        norm = np.linalg.norm(nxt)
        nxt /= norm
        new_est = float(v @ w @ v)
        if abs(new_est - est) < tol:
            return new_est
        est = new_est
        v = nxt
    return est


def shock(network, node: int) -> ShockResult:
    """Steady state of s(t+1) = e_node + P s(t).

    Requires spectral radius < 1; otherwise the series has no limit and
    DivergenceError (carrying the radius) is raised. The limit solves
    (I - P) s = e_node.
    """
    vals = _pc_values(network)
    p = vals.shape[0]
    if not (0 <= node < p):
        raise NumericError(f"node {node} out of range for p={p}")
    rho = spectral_radius(vals)
    if rho >= 1.0:
        raise DivergenceError(
            f"shock propagation diverges: spectral radius {rho:.6f} >= 1",
            spectral_radius=rho,
        )
    e = np.zeros(p)
    e[node] = 1.0
    steady = np.linalg.solve(np.eye(p) - vals, e)
    return ShockResult(
        node=node,
        initial=e,
        steady_state=steady,
        total=float(steady.sum()),
        spectral_radius=rho,
        abs_radius_bound=abs_radius_bound(vals),
    )
