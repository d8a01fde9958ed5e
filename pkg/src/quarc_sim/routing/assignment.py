"""
Atribuição de qubits a canais por prioridade aleatória.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..topology.network import Channel, NetworkGraph
from .paths import ClusterPath

logger = logging.getLogger(__name__)


@dataclass
class QubitAssignment:
    """Canais que receberam um qubit em cada extremo."""
    assigned: List[Channel]
    remaining_capacity: Dict[int, float]
    edges: Tuple[int, ...]


def candidate_edges(path: ClusterPath, graph: NetworkGraph, consecutive_only: bool = False) -> List[int]:
    """Arestas dentro de algum C_i ou entre clusters do caminho.

    Com `consecutive_only`, arestas entre clusters não consecutivos ficam de fora.
    """
    position: Dict[int, int] = {}
    for idx, members in enumerate(path.members):
        for node in members:
            position[node] = idx

    selected = []
    for edge in graph.edges.values():
        pu, pv = position.get(edge.u), position.get(edge.v)
        if pu is None or pv is None:
            continue
        if consecutive_only and abs(pu - pv) > 1:
            continue
        selected.append(edge.id)
    return selected


def assign_qubits(path: ClusterPath, graph: NetworkGraph, rng: np.random.Generator,
                  consecutive_only: bool = False) -> QubitAssignment:
    """Prioridade a_l ~ U[0,1) por aresta; canal i recebe a_l + i; atribuição em ordem crescente."""
    edges = candidate_edges(path, graph, consecutive_only)
    priorities = rng.random(len(edges))

    order: List[Tuple[float, int, int]] = []
    for a, edge_id in zip(priorities, edges):
        for index in range(graph.edges[edge_id].width):
            order.append((float(a) + index, edge_id, index))
    order.sort()

    capacity = {node: graph.nodes[node].capacity for node in path.nodes()}
    assigned: List[Channel] = []
    for _, edge_id, index in order:
        edge = graph.edges[edge_id]
        if capacity[edge.u] >= 1 and capacity[edge.v] >= 1:
            capacity[edge.u] -= 1
            capacity[edge.v] -= 1
            assigned.append((edge_id, index))

    logger.debug(f"Pedido {path.request_id}: {len(assigned)} canais atribuídos em {len(edges)} arestas")
    return QubitAssignment(assigned, capacity, tuple(edges))
