"""
Detecção de comunidades (Girvan-Newman) e constante de Kemeny.
"""

import logging
import math
from typing import Dict, FrozenSet, Hashable, List, Tuple

import networkx as nx

from ..exceptions import DomainError, InfeasibleSplitError

logger = logging.getLogger(__name__)

EdgeKey = Tuple[Hashable, Hashable]

# Empates de betweenness dentro desta tolerância
_TIE_TOLERANCE = 1e-9


def _key(u, v) -> EdgeKey:
    return (u, v) if u <= v else (v, u)


def edge_betweenness(subgraph: nx.Graph) -> Dict[EdgeKey, float]:
    """Betweenness de arestas (Brandes), pares não ordenados, arestas de peso 1."""
    if subgraph.number_of_nodes() == 0:
        raise DomainError("Subgrafo vazio")
    raw = nx.edge_betweenness_centrality(subgraph, normalized=False, weight=None)
    return {_key(u, v): float(value) for (u, v), value in raw.items()}


def _edge_rank(graph: nx.Graph, edge: EdgeKey):
    """Critério de desempate: menor id de aresta (atributo `id`), senão o par de nós."""
    edge_id = graph.edges[edge].get('id')
    return (0, edge_id, edge) if edge_id is not None else (1, 0, edge)


def _components(graph: nx.Graph) -> List[FrozenSet]:
    return [frozenset(c) for c in nx.connected_components(graph)]


def _merge_overshoot(original: nx.Graph, parts: List[FrozenSet], k: int) -> List[FrozenSet]:
    """Funde as menores componentes na vizinha mais conectada até restarem k."""
    parts = list(parts)
    while len(parts) > k:
        parts.sort(key=lambda c: (len(c), min(c)))
        smallest = parts.pop(0)
        links = []
        for idx, other in enumerate(parts):
            count = sum(1 for u in smallest for v in original.neighbors(u) if v in other)
            links.append((-count, len(other), min(other), idx))
        links.sort()
        target = links[0][3]
        parts[target] = parts[target] | smallest
    return parts


def most_central_edge(graph: nx.Graph) -> EdgeKey:
    """Aresta de maior betweenness; empates pelo menor id de aresta."""
    betweenness = edge_betweenness(graph)
    top = max(betweenness.values())
    candidates = [e for e, b in betweenness.items() if top - b <= _TIE_TOLERANCE]
    return min(candidates, key=lambda e: _edge_rank(graph, e))


def girvan_newman(subgraph: nx.Graph, k: int) -> List[FrozenSet]:
    """Particiona o subgrafo em exatamente k conjuntos de nós.

    Usa `nx.community.girvan_newman` com `most_central_edge` até existirem
    pelo menos k componentes; o excedente é fundido na vizinha mais conectada.
    """
    if k < 1:
        raise DomainError(f"k deve ser positivo (recebido {k})")
    if subgraph.number_of_nodes() < k:
        raise InfeasibleSplitError(
            f"Impossível dividir {subgraph.number_of_nodes()} nós em {k} partes"
        )

    components = _components(subgraph)
    if len(components) < k:
        for level in nx.community.girvan_newman(subgraph, most_valuable_edge=most_central_edge):
            components = [frozenset(c) for c in level]
            if len(components) >= k:
                break

    if len(components) > k:
        components = _merge_overshoot(subgraph, components, k)

    logger.debug(f"Girvan-Newman: {subgraph.number_of_nodes()} nós em {k} partes")
    return sorted(components, key=min)


def kemeny_constant(subgraph: nx.Graph) -> float:
    """Constante de Kemeny do passeio aleatório simples; inf se desconexo."""
    if subgraph.number_of_nodes() < 2:
        raise DomainError("Constante de Kemeny exige pelo menos 2 nós")
    if not nx.is_connected(subgraph):
        return math.inf
    return float(nx.kemeny_constant(subgraph, weight=None))
