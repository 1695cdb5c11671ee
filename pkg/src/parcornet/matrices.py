"""Core matrix and data types.

Square-matrix inputs are validated for symmetry up to a relative
tolerance and stored in exactly symmetrized form; all containers are
immutable after construction.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, ShapeError

SYMMETRY_RTOL = 1e-8
PD_PIVOT_TOL = 1e-12


def _square_values(m, name: str) -> np.ndarray:
    a = np.array(getattr(m, "values", m), dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be a square 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite entries")
    return a


def symmetrize(m, name: str = "matrix") -> np.ndarray:
    """Return (M + M.T) / 2 after checking symmetry to SYMMETRY_RTOL."""
    a = _square_values(m, name)
    scale = max(float(np.abs(a).max()), 1.0)
    gap = float(np.abs(a - a.T).max())
    if gap > SYMMETRY_RTOL * scale:
        raise ShapeError(
            f"{name} is not symmetric: max asymmetry {gap:.3e} exceeds "
            f"{SYMMETRY_RTOL:.0e} relative tolerance"
        )
    return 0.5 * (a + a.T)


def is_positive_definite(m) -> bool:
    """Cholesky-based test; pivots must clear PD_PIVOT_TOL relative to the diagonal."""
    a = symmetrize(m)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    pivots = np.diag(chol) ** 2
    scale = max(float(np.abs(np.diag(a)).max()), 1.0)
    return bool(pivots.min() > PD_PIVOT_TOL * scale)


@dataclass(frozen=True)
class PrecisionMatrix:
    """Symmetric positive definite matrix (a precision or a scatter inverse)."""

    values: np.ndarray

    def __post_init__(self):
        a = symmetrize(self.values, "precision matrix")
        if a.shape[0] < 2:
            raise ShapeError("precision matrix needs dimension >= 2")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)
        if not is_positive_definite(a):
            raise DomainError("precision matrix is not positive definite")

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def to_json_dict(self) -> dict:
        return {"p": self.p, "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PrecisionMatrix":
        return cls(np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class PartialCorrelationMatrix:
    """Symmetric matrix with zero diagonal and off-diagonal entries in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        a = symmetrize(self.values, "partial correlation matrix")
        if a.shape[0] < 2:
            raise ShapeError("partial correlation matrix needs dimension >= 2")
        if np.abs(np.diag(a)).max() > 0.0:
            raise DomainError("partial correlation matrix must have an exactly zero diagonal")
        if np.abs(a).max() > 1.0 + 1e-9:
            raise DomainError("partial correlations must lie in [-1, 1]")
        a = np.clip(a, -1.0, 1.0)
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def edge_set(self) -> "EdgeSet":
        """Edges are exactly the nonzero off-diagonal entries."""
        jj, kk = np.nonzero(np.triu(self.values, k=1))
        return EdgeSet.from_pairs(self.p, zip(jj.tolist(), kk.tolist()))

    def to_json_dict(self) -> dict:
        return {"p": self.p, "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PartialCorrelationMatrix":
        return cls(np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class EdgeSet:
    """Unordered node pairs over nodes 0..p-1, no self loops."""

    p: int
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 1:
            raise ShapeError("EdgeSet needs p >= 1")
        canon = set()
        for j, k in self.pairs:
            j, k = int(j), int(k)
            if j == k:
                raise DomainError(f"self loop ({j},{k}) not allowed")
            if not (0 <= j < self.p and 0 <= k < self.p):
                raise DomainError(f"edge ({j},{k}) out of range for p={self.p}")
            canon.add((min(j, k), max(j, k)))
        object.__setattr__(self, "pairs", frozenset(canon))

    @classmethod
    def from_pairs(cls, p: int, pairs) -> "EdgeSet":
        return cls(p, frozenset((int(j), int(k)) for j, k in pairs))

    @classmethod
    def from_adjacency(cls, adj) -> "EdgeSet":
        a = symmetrize(np.asarray(adj, dtype=float), "adjacency")
        jj, kk = np.nonzero(np.triu(a, k=1))
        return cls.from_pairs(a.shape[0], zip(jj.tolist(), kk.tolist()))

    @classmethod
    def empty(cls, p: int) -> "EdgeSet":
        return cls(p, frozenset())

    @classmethod
    def complete(cls, p: int) -> "EdgeSet":
        return cls.from_pairs(p, ((j, k) for j in range(p) for k in range(j + 1, p)))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        j, k = pair
        return (min(j, k), max(j, k)) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def to_adjacency(self) -> np.ndarray:
        adj = np.zeros((self.p, self.p), dtype=bool)
        for j, k in self.pairs:
            adj[j, k] = adj[k, j] = True
        return adj

    def union(self, other: "EdgeSet") -> "EdgeSet":
        if other.p != self.p:
            raise ShapeError("edge sets have different p")
        return EdgeSet(self.p, self.pairs | other.pairs)

    def intersection(self, other: "EdgeSet") -> "EdgeSet":
        if other.p != self.p:
            raise ShapeError("edge sets have different p")
        return EdgeSet(self.p, self.pairs & other.pairs)

    def issubset(self, other: "EdgeSet") -> bool:
        return self.p == other.p and self.pairs <= other.pairs

    def to_json_dict(self) -> dict:
        # nodes are 1-based in external formats
        return {"p": self.p, "edges": [[j + 1, k + 1] for j, k in sorted(self.pairs)]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "EdgeSet":
        return cls.from_pairs(int(d["p"]), ((j - 1, k - 1) for j, k in d["edges"]))

    def to_csv_text(self) -> str:
        lines = ["i,j"]
        lines += [f"{j + 1},{k + 1}" for j, k in sorted(self.pairs)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv_text(cls, text: str, p: int) -> "EdgeSet":
        rows = [r for r in csv.reader(text.splitlines()) if r]
        if rows and rows[0][:2] == ["i", "j"]:
            rows = rows[1:]
        return cls.from_pairs(p, ((int(r[0]) - 1, int(r[1]) - 1) for r in rows))


@dataclass(frozen=True)
class Dataset:
    """n x p observation matrix with optional positive row weights."""

    values: np.ndarray
    names: tuple | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        a = np.array(self.values, dtype=float, copy=True)
        if a.ndim != 2:
            raise ShapeError(f"data must be 2-d, got shape {a.shape}")
        n, p = a.shape
        if n < 2 or p < 2:
            raise ShapeError(f"data needs n >= 2 rows and p >= 2 columns, got {a.shape}")
        if not np.all(np.isfinite(a)):
            bad = int(np.argwhere(~np.isfinite(a))[0][0])
            raise DataError(f"data contains non-finite values (first bad row {bad})")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != p:
                raise ShapeError(f"{len(names)} column names for {p} columns")
            object.__setattr__(self, "names", names)
        if self.weights is not None:
            w = np.array(self.weights, dtype=float, copy=True)
            if w.shape != (n,):
                raise ShapeError(f"weights must have shape ({n},), got {w.shape}")
            if not np.all(np.isfinite(w)) or w.min() <= 0.0:
                raise DataError("weights must be finite and strictly positive")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> tuple:
        if self.names is not None:
            return self.names
        return tuple(f"x{j + 1}" for j in range(self.p))

    def to_csv_text(self) -> str:
        lines = [",".join(self.column_names())]
        lines += [",".join(f"{v:.17g}" for v in row) for row in self.values]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv_text(cls, text: str) -> "Dataset":
        rows = [r for r in csv.reader(text.splitlines()) if r]
        if not rows:
            raise DataError("empty CSV")
        header = rows[0]
        try:
            [float(v) for v in header]
        except ValueError:
            names = tuple(header)
            body = rows[1:]
        else:
            names = None
            body = rows
        try:
            vals = np.asarray([[float(v) for v in r] for r in body], dtype=float)
        except ValueError as exc:
            raise DataError(f"non-numeric cell in data CSV: {exc}") from exc
        return cls(vals, names=names)


def precision_to_partial_correlation(theta) -> PartialCorrelationMatrix:
    """p_jk = -theta_jk / sqrt(theta_jj * theta_kk), zero diagonal.

    Invariant under theta -> D theta D for positive diagonal D.
    """
    a = symmetrize(theta, "precision matrix")
    d = np.diag(a)
    if d.min() <= 0.0:
        bad = int(np.argmin(d))
        raise DomainError(f"nonpositive diagonal entry at index {bad}")
    inv_sd = 1.0 / np.sqrt(d)
    pc = -a * np.outer(inv_sd, inv_sd)
    np.fill_diagonal(pc, 0.0)
    return PartialCorrelationMatrix(pc)


def scatter_to_precision(psi, nu: float) -> PrecisionMatrix:
    """Rescale a scatter inverse to the precision of the implied covariance.

    For a scale-mixture model with tail parameter nu > 2 the covariance is
    nu/(nu-2) times the scatter, so the precision is (nu-2)/nu times psi.
    """
    if nu <= 2.0:
        raise DomainError(f"need nu > 2 for a finite covariance, got {nu}")
    a = symmetrize(psi, "scatter inverse")
    return PrecisionMatrix((nu - 2.0) / nu * a)


def save_matrix_csv(m, path) -> None:
    a = _square_values(m, "matrix")
    np.savetxt(path, a, delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    a = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return a


def save_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_json_dict(), fh, indent=2)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
