"""
Partição da rede em clusters e reconfiguração adaptativa por época.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np

from ..exceptions import ConsistencyError, DomainError
from ..topology.network import NetworkGraph
from .community import girvan_newman, kemeny_constant
from .thresholds import ThresholdTable, threshold_lookup

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cluster:
    """Conjunto conexo de nós que atua como unidade de roteamento."""
    id: int
    members: FrozenSet[int]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class ClusterStats:
    """Tentativas e passagens de um cluster na época corrente."""
    attempts: int = 0
    passes: int = 0

    def record(self, passed: bool):
        self.attempts += 1
        if passed:
            self.passes += 1

    @property
    def rate(self) -> Optional[float]:
        """Taxa de passagem de emaranhamento (None sem tentativas)."""
        return self.passes / self.attempts if self.attempts else None


@dataclass(frozen=True)
class ReconfigConfig:
    k: int = 4
    epoch_length: int = 500

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"k deve ser >= 2 (recebido {self.k})")
        if self.epoch_length < 1:
            raise DomainError(f"epoch_length deve ser >= 1 (recebido {self.epoch_length})")


class Clustering:
    """Partição exata dos nós em clusters conexos, com adjacência entre clusters."""

    def __init__(self, graph: NetworkGraph, clusters: Mapping[int, Iterable[int]],
                 next_id: Optional[int] = None, check_connected: bool = True):
        self.graph = graph
        self.clusters: Dict[int, FrozenSet[int]] = {
            cid: frozenset(members) for cid, members in sorted(clusters.items())
        }
        self.node_of: Dict[int, int] = {}
        for cid, members in self.clusters.items():
            if not members:
                raise ConsistencyError(f"Cluster {cid} vazio")
            for node in members:
                if node in self.node_of:
                    raise ConsistencyError(f"Nó {node} em mais de um cluster")
                if node not in graph.nodes:
                    raise ConsistencyError(f"Nó {node} não existe na rede")
                self.node_of[node] = cid
        if len(self.node_of) != len(graph.nodes):
            missing = sorted(set(graph.nodes) - set(self.node_of))[:5]
            raise ConsistencyError(f"Partição não cobre todos os nós (ex.: {missing})")

        self.cluster_adjacency: Dict[Tuple[int, int], int] = {}
        for edge in graph.edges.values():
            a, b = self.node_of[edge.u], self.node_of[edge.v]
            if a != b:
                pair = (min(a, b), max(a, b))
                self.cluster_adjacency[pair] = self.cluster_adjacency.get(pair, 0) + edge.width

        self._neighbors: Dict[int, Set[int]] = {cid: set() for cid in self.clusters}
        for a, b in self.cluster_adjacency:
            self._neighbors[a].add(b)
            self._neighbors[b].add(a)

        default_next = max(self.clusters) + 1 if self.clusters else 0
        self.next_id = max(next_id if next_id is not None else 0, default_next)

        if check_connected:
            g = graph.to_networkx()
            for cid, members in self.clusters.items():
                if len(members) > 1 and not nx.is_connected(g.subgraph(members)):
                    raise ConsistencyError(f"Cluster {cid} não induz subgrafo conexo")

    @classmethod
    def from_parts(cls, graph: NetworkGraph, parts: Iterable[Iterable[int]]) -> "Clustering":
        return cls(graph, {i: frozenset(p) for i, p in enumerate(parts)})

    @classmethod
    def whole(cls, graph: NetworkGraph) -> "Clustering":
        """Um único cluster com todos os nós (estado inicial padrão)."""
        return cls(graph, {0: frozenset(graph.nodes)})

    @classmethod
    def singletons(cls, graph: NetworkGraph) -> "Clustering":
        return cls(graph, {i: frozenset([node]) for i, node in enumerate(graph.nodes)}, check_connected=False)

    @classmethod
    def grid_blocks(cls, graph: NetworkGraph, block: int) -> "Clustering":
        """Blocos quadrados block x block numa grade."""
        side = graph.meta.get('side')
        if graph.meta.get('kind') != 'grid' or side is None:
            raise DomainError("Blocos quadrados exigem uma topologia em grade")
        if block < 1 or side % block:
            raise DomainError(f"Bloco {block} não divide o lado da grade {side}")
        per_row = side // block
        parts: Dict[int, Set[int]] = {}
        for node in graph.nodes:
            r, c = divmod(node, side)
            parts.setdefault((r // block) * per_row + c // block, set()).add(node)
        return cls(graph, parts)

    def __len__(self) -> int:
        return len(self.clusters)

    def ids(self) -> List[int]:
        return list(self.clusters)

    def cluster(self, cid: int) -> Cluster:
        return Cluster(cid, self.clusters[cid])

    def size(self, cid: int) -> int:
        return len(self.clusters[cid])

    def neighbors(self, cid: int) -> List[int]:
        return sorted(self._neighbors[cid])

    def channels_between(self, a: int, b: int) -> int:
        return self.cluster_adjacency.get((min(a, b), max(a, b)), 0)

    def centroid(self, cid: int) -> Tuple[float, float]:
        positions = np.array([self.graph.nodes[n].position for n in self.clusters[cid]])
        x, y = positions.mean(axis=0)
        return float(x), float(y)

    def size_profile(self) -> Tuple[int, ...]:
        """Multiconjunto de tamanhos (ordenado), usado para detectar regime estacionário."""
        return tuple(sorted(len(m) for m in self.clusters.values()))


def _is_local_minimum(clustering: Clustering, cid: int, k: int) -> bool:
    """Maioria estrita dos vizinhos com tamanho < |c|/k."""
    neighbors = clustering.neighbors(cid)
    if not neighbors:
        return False
    limit = clustering.size(cid) / k
    small = sum(1 for n in neighbors if clustering.size(n) < limit)
    return 2 * small > len(neighbors)


class _WorkingPartition:
    """Partição mutável usada durante uma reconfiguração."""

    def __init__(self, clustering: Clustering):
        self.graph = clustering.graph.to_networkx()
        self.clusters: Dict[int, FrozenSet[int]] = dict(clustering.clusters)
        self.node_of: Dict[int, int] = dict(clustering.node_of)
        self.next_id = clustering.next_id

    def replace(self, removed: Iterable[int], parts: Iterable[FrozenSet[int]]) -> List[int]:
        for cid in removed:
            del self.clusters[cid]
        new_ids = []
        for part in parts:
            cid = self.next_id
            self.next_id += 1
            self.clusters[cid] = frozenset(part)
            for node in part:
                self.node_of[node] = cid
            new_ids.append(cid)
        return new_ids

    def neighbors(self, cid: int) -> List[int]:
        found = set()
        for node in self.clusters[cid]:
            for nb in self.graph.neighbors(node):
                other = self.node_of[nb]
                if other != cid:
                    found.add(other)
        return sorted(found)


def reconfigure(clustering: Clustering, stats: Mapping[int, ClusterStats], table: ThresholdTable,
                cfg: ReconfigConfig, graph: NetworkGraph) -> Clustering:
    """Reconfiguração adaptativa de clusters ao fim de uma época."""
    network_size = len(graph)
    rates: Dict[int, Optional[float]] = {}
    to_split: List[int] = []
    to_merge: List[int] = []

    for cid in clustering.ids():
        rate = stats[cid].rate if cid in stats else None
        rates[cid] = rate
        merge_t, split_t = threshold_lookup(table, clustering.size(cid), network_size)
        if (rate is not None and rate >= split_t) or _is_local_minimum(clustering, cid, cfg.k):
            to_split.append(cid)
        elif rate is not None and rate <= merge_t:
            to_merge.append(cid)

    work = _WorkingPartition(clustering)
    merged: Set[int] = set()

    for cid in to_split:
        members = work.clusters[cid]
        arity = min(cfg.k, len(members))
        if arity < 2:
            # Singleton não se divide, mas segue disponível como parceiro de merge
            continue
        parts = girvan_newman(work.graph.subgraph(members), arity)
        new_ids = work.replace([cid], parts)
        logger.debug(f"Split: cluster {cid} ({len(members)} nós) -> {new_ids}")

    for cid in sorted(to_merge, key=lambda c: (rates[c], c)):
        if cid not in work.clusters or cid in merged:
            continue
        neighbors = work.neighbors(cid)
        if not neighbors:
            continue

        if len(neighbors) == 1:
            other = neighbors[0]
            if other in merged:
                continue
            union = work.clusters[cid] | work.clusters[other]
            new_ids = work.replace([cid, other], [union])
            merged.update([cid, other, *new_ids])
            logger.debug(f"Merge direto: {cid} + {other} -> {new_ids[0]}")
            continue

        best = None
        for x1, x2 in itertools.combinations(neighbors, 2):
            union = work.clusters[cid] | work.clusters[x1] | work.clusters[x2]
            score = kemeny_constant(work.graph.subgraph(union))
            candidate = (score, x1, x2)
            if best is None or candidate < best:
                best = candidate
        score, x1, x2 = best
        if math.isinf(score):
            continue
        if {cid, x1, x2} & merged:
            continue

        union = work.clusters[cid] | work.clusters[x1] | work.clusters[x2]
        parts = girvan_newman(work.graph.subgraph(union), 2)
        new_ids = work.replace([cid, x1, x2], parts)
        merged.update([cid, x1, x2, *new_ids])
        logger.debug(f"Merge: {cid} + {x1} + {x2} -> {new_ids} (Kemeny {score:.3f})")

    result = Clustering(graph, work.clusters, work.next_id)
    if len(result) != len(clustering):
        logger.info(
            f"Reconfiguração: {len(clustering)} -> {len(result)} clusters "
            f"({len(to_split)} splits marcados, {len(to_merge)} merges marcados)"
        )
    return result

