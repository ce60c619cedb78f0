"""Attributed graph container, file I/O, synthetic generation and GCN propagation."""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import GraphParseError, ShapeError, ValidationError


def _canonical_edges(edges, n):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if edges.min() < 0 or edges.max() >= n:
        raise ValidationError(f"edge endpoint outside [0, {n})")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ValidationError("self-loops are not allowed")
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class AttributedGraph:
    """Undirected attributed graph with dense node attributes.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``,
    sorted lexicographically. Arrays are read-only; derived operators are
    cached on first use.

    Ground-truth labels are kept behind the :attr:`labels` property so that
    callers which must stay label-free can work on :meth:`without_labels`.
    """

    __slots__ = ("n", "edges", "attributes", "_labels", "_cache")

    def __init__(self, n, edges, attributes, labels=None):
        n = int(n)
        if n < 1:
            raise ValidationError("graph needs at least one node")
        attributes = np.asarray(attributes, dtype=np.float64)
        if attributes.ndim == 1:
            attributes = attributes[:, None]
        if attributes.ndim != 2 or attributes.shape[0] != n:
            raise ShapeError(f"attribute matrix has shape {attributes.shape}, expected ({n}, d)")
        if attributes.shape[1] < 1:
            raise ShapeError("attribute dimension must be >= 1")
        if labels is not None:
            labels = np.asarray(labels)
            if labels.shape != (n,):
                raise ShapeError(f"labels have shape {labels.shape}, expected ({n},)")
            if not np.isin(labels, (0, 1)).all():
                raise ValidationError("labels must be 0/1")
            labels = _frozen(labels.astype(np.int8))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", _frozen(_canonical_edges(edges, n)))
        object.__setattr__(self, "attributes", _frozen(attributes))
        object.__setattr__(self, "_labels", labels)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("AttributedGraph is immutable")

    def __repr__(self):
        return f"AttributedGraph(n={self.n}, edges={self.num_edges}, d={self.d}, labeled={self.has_labels})"

    @property
    def d(self) -> int:
        return self.attributes.shape[1]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def has_labels(self) -> bool:
        return self._labels is not None

    @property
    def labels(self) -> np.ndarray | None:
        return self._labels

    def without_labels(self) -> AttributedGraph:
        """Label-free copy sharing topology and attributes."""
        g = AttributedGraph.__new__(AttributedGraph)
        object.__setattr__(g, "n", self.n)
        object.__setattr__(g, "edges", self.edges)
        object.__setattr__(g, "attributes", self.attributes)
        object.__setattr__(g, "_labels", None)
        object.__setattr__(g, "_cache", {})
        return g

    def with_labels(self, labels) -> AttributedGraph:
        return AttributedGraph(self.n, self.edges, self.attributes, labels)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency without self-loops (CSR)."""
        if "adj" not in self._cache:
            i, j = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * len(i))
            a = sp.csr_matrix(
                (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(self.n, self.n)
            )
            a.sum_duplicates()
            self._cache["adj"] = a
        return self._cache["adj"]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def content_hash(self) -> str:
        """Digest of topology and attributes (labels excluded)."""
        if "hash" not in self._cache:
            h = hashlib.sha256()
            h.update(np.int64(self.n).tobytes())
            h.update(np.ascontiguousarray(self.edges).tobytes())
            h.update(np.ascontiguousarray(self.attributes).tobytes())
            self._cache["hash"] = h.hexdigest()
        return self._cache["hash"]

    def same_as(self, other: AttributedGraph) -> bool:
        if self.n != other.n:
            return False
        if not (np.array_equal(self.edges, other.edges) and np.array_equal(self.attributes, other.attributes)):
            return False
        if (self._labels is None) != (other._labels is None):
            return False
        return self._labels is None or np.array_equal(self._labels, other._labels)


def normalized_adjacency(g: AttributedGraph) -> sp.csr_matrix:
    """Symmetrically normalized adjacency with self-loops, D^-1/2 (A + I) D^-1/2.

    The result is cached on the graph and marked read-only.
    """
    if "norm_adj" in g._cache:
        return g._cache["norm_adj"]
    a_hat = g.adjacency() + sp.identity(g.n, format="csr")
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(deg)
    d = sp.diags(inv_sqrt)
    op = (d @ a_hat @ d).tocsr()
    op.sort_indices()
    for arr in (op.data, op.indices, op.indptr):
        arr.setflags(write=False)
    g._cache["norm_adj"] = op
    return op


def generate_synthetic(n, d, communities, intra_p, inter_p, seed, *, mean_scale=1.0, noise_std=1.0):
    """Stochastic-block-model graph with community-dependent Gaussian attributes.

    Nodes are split into ``communities`` contiguous, near-equal blocks. Each
    pair inside a block is connected with probability ``intra_p``, across
    blocks with ``inter_p``. Attributes are ``mean[c] + noise`` where the
    community means are drawn from ``N(0, mean_scale^2)``.
    """
    for name, p in (("intra_p", intra_p), ("inter_p", inter_p)):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"{name}={p} outside [0, 1]")
    if inter_p > intra_p:
        raise ValidationError("inter_p must not exceed intra_p")
    if not n >= communities >= 1:
        raise ValidationError("need n >= communities >= 1")
    if d < 1:
        raise ValidationError("d must be >= 1")

    rng = np.random.default_rng(seed)
    block = community_of(n, communities)
    iu, ju = np.triu_indices(n, k=1)
    probs = np.where(block[iu] == block[ju], intra_p, inter_p)
    keep = rng.random(len(iu)) < probs
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    means = rng.normal(0.0, mean_scale, size=(communities, d))
    attributes = means[block] + rng.normal(0.0, noise_std, size=(n, d))
    return AttributedGraph(n, edges, attributes)


def community_of(n, communities):
    """Block membership used by :func:`generate_synthetic`."""
    return (np.arange(n) * communities) // n


# -- file formats -----------------------------------------------------------


def read_id_map(path) -> dict[str, int]:
    mapping = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise GraphParseError(path, lineno, "expected 'external_id,internal_id'")
            try:
                mapping[row[0]] = int(row[1])
            except ValueError:
                raise GraphParseError(path, lineno, f"internal id {row[1]!r} is not an integer") from None
    return mapping


def write_id_map(mapping: dict[str, int], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for ext, internal in sorted(mapping.items(), key=lambda kv: kv[1]):
            w.writerow([ext, internal])


def _read_edges(path, id_map):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphParseError(path, lineno, f"expected two node ids, got {line!r}")
            ids = []
            for tok in parts:
                if id_map is not None:
                    if tok not in id_map:
                        raise GraphParseError(path, lineno, f"unknown node id {tok!r}")
                    ids.append(id_map[tok])
                else:
                    try:
                        ids.append(int(tok))
                    except ValueError:
                        raise GraphParseError(path, lineno, f"node id {tok!r} is not an integer") from None
            if ids[0] == ids[1]:
                raise GraphParseError(path, lineno, f"self-loop on node {parts[0]}")
            pairs.append(ids)
    return pairs


def _read_attributes(path):
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise GraphParseError(path, lineno, "non-numeric attribute value") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise GraphParseError(path, lineno, f"expected {width} columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ShapeError(f"{path}: no attribute rows")
    return np.array(rows, dtype=np.float64)


def _read_labels(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line not in ("0", "1"):
                raise ValidationError(f"{path}:{lineno}: label {line!r} is not 0 or 1")
            out.append(int(line))
    return np.array(out, dtype=np.int8)


def load_graph(edge_path, attribute_path, label_path=None, id_map_path=None) -> AttributedGraph:
    """Read a graph from an edge list, an attribute CSV and optional labels.

    Node ``r`` is row ``r`` of the attribute file. With ``id_map_path`` the
    edge file may use arbitrary string ids, translated through the
    ``external_id,internal_id`` CSV.
    """
    id_map = read_id_map(id_map_path) if id_map_path is not None else None
    attributes = _read_attributes(attribute_path)
    n = attributes.shape[0]
    pairs = _read_edges(edge_path, id_map)
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise ShapeError(f"edge ({i}, {j}) references a node outside the {n} attribute rows")
    labels = None
    if label_path is not None:
        labels = _read_labels(label_path)
        if len(labels) != n:
            raise ShapeError(f"{label_path}: {len(labels)} labels for {n} nodes")
    return AttributedGraph(n, pairs, attributes, labels)


def save_graph(g: AttributedGraph, directory, *, include_labels=True) -> dict[str, Path]:
    """Write ``edges.txt``, ``attributes.csv`` and (if present) ``labels.txt``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"edges": directory / "edges.txt", "attributes": directory / "attributes.csv"}
    with open(paths["edges"], "w", encoding="utf-8") as fh:
        for i, j in g.edges:
            fh.write(f"{i}\t{j}\n")
    with open(paths["attributes"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in g.attributes:
            w.writerow([repr(float(v)) for v in row])
    if include_labels and g.has_labels:
        paths["labels"] = directory / "labels.txt"
        with open(paths["labels"], "w", encoding="utf-8") as fh:
            fh.writelines(f"{int(v)}\n" for v in g.labels)
    return paths
