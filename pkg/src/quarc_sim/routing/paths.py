"""
Seleção de caminhos sobre o grafo de clusters (Dijkstra, fila FIFO).
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Tuple

import networkx as nx

from ..clustering.partition import Clustering
from ..exceptions import ConsistencyError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Request:
    """Pedido de emaranhamento fim-a-fim entre S e D."""
    id: int
    source: int
    destination: int
    arrival_slot: int
    hop_distance: int = 0

    def __post_init__(self):
        if self.source == self.destination:
            raise DomainError(f"Pedido {self.id}: origem e destino iguais ({self.source})")


@dataclass(frozen=True)
class ClusterPath:
    """Caminho C_0..C_k de clusters para um pedido."""
    request_id: int
    source: int
    destination: int
    clusters: Tuple[int, ...]
    members: Tuple[FrozenSet[int], ...]

    def __len__(self) -> int:
        return len(self.clusters)

    def nodes(self) -> FrozenSet[int]:
        return frozenset().union(*self.members)


@dataclass
class PathSelection:
    """Resultado de um slot: caminhos servidos e pedidos pulados."""
    paths: List[ClusterPath] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)


def cluster_graph(clustering: Clustering) -> nx.DiGraph:
    """Grafo dirigido de clusters: peso(A->B) = |A| / canais(A,B)."""
    g = nx.DiGraph()
    g.add_nodes_from(clustering.ids())
    for (a, b), channels in clustering.cluster_adjacency.items():
        g.add_edge(a, b, weight=clustering.size(a) / channels)
        g.add_edge(b, a, weight=clustering.size(b) / channels)
    return g


def select_paths(queue: Iterable[Request], clustering: Clustering) -> PathSelection:
    """Atende pedidos do mais antigo ao mais novo; cada cluster serve um pedido por slot."""
    working = cluster_graph(clustering)
    selection = PathSelection()

    for request in sorted(queue, key=lambda r: (r.arrival_slot, r.id)):
        try:
            start = clustering.node_of[request.source]
            end = clustering.node_of[request.destination]
        except KeyError as exc:
            raise ConsistencyError(f"Pedido {request.id}: nó {exc} sem cluster") from exc

        if start not in working or end not in working:
            selection.skipped.append(request.id)
            continue
        if start == end:
            route = [start]
        else:
            try:
                route = nx.dijkstra_path(working, start, end, weight='weight')
            except nx.NetworkXNoPath:
                selection.skipped.append(request.id)
                continue

        working.remove_nodes_from(route)
        selection.paths.append(ClusterPath(
            request.id,
            request.source,
            request.destination,
            tuple(route),
            tuple(clustering.clusters[c] for c in route),
        ))

    if selection.skipped:
        logger.debug(f"Pedidos pulados neste slot: {selection.skipped}")
    return selection
