"""Neighborhood selection: one penalized regression per node.

Each column is regressed on all others with a shared penalty; a node's
neighbors are the columns with nonzero coefficients. The centered Gram
matrix is computed once and sliced per response, so the p regressions
cost one matrix product plus p coordinate descents.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .elastic_net import COEF_TOL, KKT_TOL, MAX_SWEEPS, PenaltyConfig, solve_gram
from .errors import ConfigError, ShapeError
from .matrices import Dataset, EdgeSet

RULES = ("and", "or")


@dataclass(frozen=True)
class Neighborhoods:
    """Per-node neighbor sets; unconverged lists nodes whose regression hit the sweep cap."""

    p: int
    sets: tuple
    unconverged: tuple = ()


@dataclass(frozen=True)
class NeighborhoodResult:
    neighborhoods: Neighborhoods
    edges: EdgeSet
    rule: str


def centered_gram(values: np.ndarray) -> np.ndarray:
    """X_c^T X_c / n for column-centered X."""
    x = np.asarray(values, dtype=float)
    xc = x - x.mean(axis=0)
    return xc.T @ xc / x.shape[0]


def select_neighborhoods(
    data: Dataset,
    penalty: PenaltyConfig,
    tol: float = COEF_TOL,
    max_sweeps: int = MAX_SWEEPS,
    kkt_tol: float = KKT_TOL,
    gram: np.ndarray | None = None,
) -> Neighborhoods:
    """Run the p conditional regressions and collect nonzero supports.

    A regression that hits the sweep cap is kept (its support is still
    used) but recorded in unconverged and reported through warnings.
    Callers that already hold the centered Gram of data pass it as gram.
    """
    if not isinstance(data, Dataset):
        data = Dataset(np.asarray(data, dtype=float))
    p = data.p
    if gram is None:
        gram = centered_gram(data.values)
    elif gram.shape != (p, p):
        raise ShapeError(f"gram must have shape ({p},{p}), got {gram.shape}")
    sets = []
    bad = []
    for k in range(p):
        others = np.delete(np.arange(p), k)
        sub = gram[np.ix_(others, others)]
        cross = gram[others, k]
        fit = solve_gram(sub, cross, gram[k, k], penalty, tol, max_sweeps, kkt_tol)
        if not fit.converged:
            bad.append(k)
            warnings.warn(f"regression for node {k} did not converge in {fit.sweeps} sweeps")
        sets.append(frozenset(int(others[j]) for j in np.nonzero(fit.coefficients)[0]))
    return Neighborhoods(p, tuple(sets), tuple(bad))


def assemble_edges(neighborhoods, rule: str) -> EdgeSet:
    """Combine directed neighbor sets into undirected edges.

    "and" keeps (j,k) only when each node selected the other; "or" keeps
    it when either did. The "and" set is always a subset of the "or" set.
    """
    rule = str(rule).lower()
    if rule not in RULES:
        raise ConfigError(f"rule must be one of {RULES}, got {rule!r}")
    if isinstance(neighborhoods, Neighborhoods):
        p, sets = neighborhoods.p, neighborhoods.sets
    else:
        sets = tuple(frozenset(s) for s in neighborhoods)
        p = len(sets)
    pairs = set()
    for j in range(p):
        for k in sets[j]:
            if not (0 <= k < p) or k == j:
                raise ConfigError(f"neighbor {k} of node {j} is out of range")
            if j < k:
                hit = j in sets[k]
                if (rule == "and" and hit) or (rule == "or"):
                    pairs.add((j, k))
            elif rule == "or":
                pairs.add((k, j))
    return EdgeSet.from_pairs(p, pairs)


def select_edges(
    data: Dataset,
    penalty: PenaltyConfig,
    rule: str = "and",
    gram: np.ndarray | None = None,
) -> NeighborhoodResult:
    """Neighborhood selection followed by edge assembly."""
    nbhd = select_neighborhoods(data, penalty, gram=gram)
    return NeighborhoodResult(nbhd, assemble_edges(nbhd, rule), str(rule).lower())
