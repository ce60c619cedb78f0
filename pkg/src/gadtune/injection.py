"""Planting structural (clique) and contextual (attribute swap) anomalies."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError, ValidationError
from .graph import AttributedGraph, save_graph


@dataclass(frozen=True)
class InjectionPlan:
    clique_size: int = 15
    clique_count: int = 1
    contextual_count: int = 15
    candidate_pool: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.clique_size < 2:
            raise ValidationError("clique_size must be >= 2")
        if self.clique_count < 0 or self.contextual_count < 0:
            raise ValidationError("anomaly counts must be non-negative")
        if self.candidate_pool < 1:
            raise ValidationError("candidate_pool must be >= 1")

    @property
    def structural_count(self) -> int:
        return self.clique_size * self.clique_count

    @property
    def total(self) -> int:
        return self.structural_count + self.contextual_count

    @classmethod
    def for_ratio(cls, n, ratio, *, clique_size=15, candidate_pool=50, seed=0):
        """Plan about ``ratio * n`` anomalies, split evenly between the two kinds.

        The structural half is rounded to whole cliques; the contextual count
        absorbs the remainder so the total stays at ``round(ratio * n)``.
        """
        total = int(round(ratio * n))
        cliques = int(round(total / 2 / clique_size))
        cliques = min(cliques, total // clique_size)
        return cls(
            clique_size=clique_size,
            clique_count=cliques,
            contextual_count=total - cliques * clique_size,
            candidate_pool=candidate_pool,
            seed=seed,
        )


@dataclass(frozen=True)
class InjectionResult:
    graph: AttributedGraph
    plan: InjectionPlan
    cliques: list[list[int]]
    contextual: list[int]
    sources: list[int]  # node whose attributes were copied, aligned with ``contextual``

    def manifest(self) -> dict:
        return {
            "plan": asdict(self.plan),
            "n": self.graph.n,
            "structural_nodes": sorted(int(v) for c in self.cliques for v in c),
            "cliques": [[int(v) for v in c] for c in self.cliques],
            "contextual_nodes": [int(v) for v in self.contextual],
            "contextual_sources": [int(v) for v in self.sources],
            "anomaly_count": self.plan.total,
            "anomaly_ratio": self.plan.total / self.graph.n,
        }


def inject(g: AttributedGraph, plan: InjectionPlan) -> InjectionResult:
    """Return a labeled copy of ``g`` with planted anomalies.

    All anomalous nodes are drawn at once without replacement, so the clique
    members and the contextual nodes are disjoint. Each contextual node gets
    the attribute row of whichever of ``plan.candidate_pool`` random other
    nodes lies furthest from it in Euclidean distance; distances and copied
    rows both refer to the pre-injection attributes.
    """
    if g.has_labels:
        raise ValidationError("graph already carries labels")
    n = g.n
    if plan.total > n:
        raise CapacityError(f"plan needs {plan.total} distinct nodes, graph has {n}")
    if plan.contextual_count and plan.candidate_pool > n - 1:
        raise CapacityError(f"candidate_pool={plan.candidate_pool} exceeds the {n - 1} other nodes")

    rng = np.random.default_rng(plan.seed)
    chosen = rng.permutation(n)[: plan.total]
    q, p = plan.clique_size, plan.clique_count
    cliques = [sorted(int(v) for v in chosen[i * q:(i + 1) * q]) for i in range(p)]
    contextual = [int(v) for v in chosen[p * q:]]

    new_edges = [g.edges]
    for members in cliques:
        iu, ju = np.triu_indices(len(members), k=1)
        m = np.asarray(members)
        new_edges.append(np.stack([m[iu], m[ju]], axis=1))
    edges = np.concatenate(new_edges, axis=0)

    original = g.attributes
    attributes = original.copy()
    sources = []
    for v in contextual:
        others = np.delete(np.arange(n), v)
        cand = rng.choice(others, size=plan.candidate_pool, replace=False)
        dist = np.linalg.norm(original[cand] - original[v], axis=1)
        src = int(cand[np.argmax(dist)])
        attributes[v] = original[src]
        sources.append(src)

    labels = np.zeros(n, dtype=np.int8)
    labels[chosen] = 1
    out = AttributedGraph(n, edges, attributes, labels)
    return InjectionResult(out, plan, cliques, contextual, sources)


def save_injected(result: InjectionResult, directory) -> dict[str, Path]:
    """Write the labeled graph files plus ``injection.json``."""
    paths = save_graph(result.graph, directory)
    paths["manifest"] = Path(directory) / "injection.json"
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(result.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
