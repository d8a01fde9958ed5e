"""
Modelo de rede quântica e geradores de topologia (grade 2-D e Waxman).
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import pdist, squareform

from ..exceptions import DomainError, InvalidTopologyError, TopologyCalibrationError

logger = logging.getLogger(__name__)

# Capacidade ilimitada de qubits (tratada como +inf na atribuição)
UNLIMITED = -1

Channel = Tuple[int, int]  # (edge id, índice do canal)


@dataclass(frozen=True)
class Node:
    """Nó da rede com memória quântica."""
    id: int
    position: Tuple[float, float]
    qubit_capacity: int
    fusion_prob: float

    def __post_init__(self):
        if not 0.0 <= self.fusion_prob <= 1.0:
            raise InvalidTopologyError(f"Nó {self.id}: fusion_prob fora de [0,1]: {self.fusion_prob}")
        if self.qubit_capacity < 0 and self.qubit_capacity != UNLIMITED:
            raise InvalidTopologyError(f"Nó {self.id}: capacidade negativa: {self.qubit_capacity}")

    @property
    def capacity(self) -> float:
        """Capacidade efetiva (inf quando ilimitada)."""
        return math.inf if self.qubit_capacity == UNLIMITED else float(self.qubit_capacity)


@dataclass(frozen=True)
class Edge:
    """Aresta com um ou mais canais quânticos."""
    id: int
    u: int
    v: int
    length: float
    channel_probs: Tuple[float, ...]

    def __post_init__(self):
        if self.u == self.v:
            raise InvalidTopologyError(f"Aresta {self.id}: extremos iguais ({self.u})")
        if self.length <= 0:
            raise InvalidTopologyError(f"Aresta {self.id}: comprimento deve ser positivo")
        if len(self.channel_probs) < 1:
            raise InvalidTopologyError(f"Aresta {self.id}: largura deve ser >= 1")
        if any(not 0.0 <= p <= 1.0 for p in self.channel_probs):
            raise InvalidTopologyError(f"Aresta {self.id}: probabilidade de canal fora de [0,1]")

    @property
    def width(self) -> int:
        return len(self.channel_probs)

    @property
    def endpoints(self) -> Tuple[int, int]:
        return (self.u, self.v)

    def other(self, node: int) -> int:
        """Retorna o extremo oposto a `node`."""
        return self.v if node == self.u else self.u

    def channels(self) -> List[Channel]:
        return [(self.id, i) for i in range(self.width)]


class NetworkGraph:
    """Grafo da rede: nós, arestas multi-canal e adjacência.

    Imutável após a construção; pode ser compartilhado entre simulações.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge], meta: Optional[Dict[str, Any]] = None):
        self.nodes: Dict[int, Node] = {n.id: n for n in sorted(nodes, key=lambda n: n.id)}
        self.edges: Dict[int, Edge] = {e.id: e for e in sorted(edges, key=lambda e: e.id)}
        self.meta: Dict[str, Any] = dict(meta or {})

        self._pair_index: Dict[Tuple[int, int], int] = {}
        incident: Dict[int, List[int]] = {n: [] for n in self.nodes}
        for edge in self.edges.values():
            if edge.u not in self.nodes or edge.v not in self.nodes:
                raise InvalidTopologyError(f"Aresta {edge.id} referencia nó inexistente")
            pair = (min(edge.u, edge.v), max(edge.u, edge.v))
            if pair in self._pair_index:
                raise InvalidTopologyError(f"Mais de uma aresta entre {pair}; use a largura")
            self._pair_index[pair] = edge.id
            incident[edge.u].append(edge.id)
            incident[edge.v].append(edge.id)

        self.adjacency: Dict[int, Tuple[int, ...]] = {n: tuple(ids) for n, ids in incident.items()}
        self._nx: Optional[nx.Graph] = None
        self._hops: Optional[Dict[int, Dict[int, int]]] = None

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def num_channels(self) -> int:
        return sum(e.width for e in self.edges.values())

    def edge_between(self, u: int, v: int) -> Optional[Edge]:
        edge_id = self._pair_index.get((min(u, v), max(u, v)))
        return self.edges[edge_id] if edge_id is not None else None

    def neighbors(self, node: int) -> List[int]:
        return [self.edges[e].other(node) for e in self.adjacency[node]]

    def to_networkx(self) -> nx.Graph:
        """Visão networkx (cacheada) com `pos`, `id` e `width` como atributos."""
        if self._nx is None:
            g = nx.Graph()
            for node in self.nodes.values():
                g.add_node(node.id, pos=node.position)
            for edge in self.edges.values():
                g.add_edge(edge.u, edge.v, id=edge.id, width=edge.width, length=edge.length)
            self._nx = g
        return self._nx

    def hop_distances(self) -> Dict[int, Dict[int, int]]:
        """Distâncias em saltos entre todos os pares (topologia estática)."""
        if self._hops is None:
            self._hops = {u: dict(d) for u, d in nx.all_pairs_shortest_path_length(self.to_networkx())}
        return self._hops

    def diameter(self) -> int:
        return max(max(d.values()) for d in self.hop_distances().values())

    def mean_channel_prob(self) -> float:
        probs = [p for e in self.edges.values() for p in e.channel_probs]
        return float(np.mean(probs)) if probs else 0.0

    def is_connected(self) -> bool:
        return len(self.nodes) > 0 and nx.is_connected(self.to_networkx())

    def with_channel_probs(self, probs: Dict[int, Tuple[float, ...]]) -> "NetworkGraph":
        """Nova rede com probabilidades de canal substituídas por aresta."""
        edges = [
            Edge(e.id, e.u, e.v, e.length, tuple(probs.get(e.id, e.channel_probs)))
            for e in self.edges.values()
        ]
        return NetworkGraph(self.nodes.values(), edges, self.meta)

    def with_alpha(self, alpha: float) -> "NetworkGraph":
        """Aplica p_c = exp(-alpha * L) a todos os canais."""
        return self.with_channel_probs({
            e.id: tuple([math.exp(-alpha * e.length)] * e.width) for e in self.edges.values()
        })

    def with_fusion_prob(self, q: float) -> "NetworkGraph":
        nodes = [Node(n.id, n.position, n.qubit_capacity, q) for n in self.nodes.values()]
        return NetworkGraph(nodes, self.edges.values(), self.meta)

    def to_document(self) -> Dict[str, Any]:
        return {
            'meta': self.meta,
            'nodes': [
                {
                    'id': n.id,
                    'x': n.position[0],
                    'y': n.position[1],
                    'qubits': None if n.qubit_capacity == UNLIMITED else n.qubit_capacity,
                    'q': n.fusion_prob,
                }
                for n in self.nodes.values()
            ],
            'edges': [
                {
                    'id': e.id,
                    'u': e.u,
                    'v': e.v,
                    'length': e.length,
                    'width': e.width,
                    'p': list(e.channel_probs),
                }
                for e in self.edges.values()
            ],
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "NetworkGraph":
        try:
            nodes = [
                Node(
                    id=int(n['id']),
                    position=(float(n['x']), float(n['y'])),
                    qubit_capacity=UNLIMITED if n.get('qubits') is None else int(n['qubits']),
                    fusion_prob=float(n['q']),
                )
                for n in document['nodes']
            ]
            edges = []
            for e in document['edges']:
                probs = tuple(float(p) for p in e['p'])
                if 'width' in e and int(e['width']) != len(probs):
                    raise InvalidTopologyError(f"Aresta {e['id']}: width difere do número de probabilidades")
                edges.append(Edge(int(e['id']), int(e['u']), int(e['v']), float(e['length']), probs))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTopologyError(f"Documento de topologia malformado: {exc}") from exc
        return cls(nodes, edges, document.get('meta'))


def make_grid(side: int, width: int = 1, qubits_per_node: int = UNLIMITED,
              p: float = 1.0, q: float = 1.0) -> NetworkGraph:
    """Grade side x side com vizinhança 4, arestas de comprimento 1."""
    if side < 2:
        raise InvalidTopologyError(f"Grade precisa de lado >= 2 (recebido {side})")
    if width < 1:
        raise InvalidTopologyError(f"Largura de aresta deve ser >= 1 (recebido {width})")

    nodes = [
        Node(r * side + c, (float(c), float(r)), qubits_per_node, q)
        for r in range(side) for c in range(side)
    ]
    edges: List[Edge] = []
    probs = tuple([p] * width)
    for r in range(side):
        for c in range(side):
            node = r * side + c
            if c + 1 < side:
                edges.append(Edge(len(edges), node, node + 1, 1.0, probs))
            if r + 1 < side:
                edges.append(Edge(len(edges), node, node + side, 1.0, probs))

    logger.debug(f"Grade {side}x{side} criada: {len(nodes)} nós, {len(edges)} arestas")
    return NetworkGraph(nodes, edges, {'kind': 'grid', 'side': side})


def calibrate_alpha(graph: NetworkGraph, E_p: float) -> float:
    """Encontra alpha tal que a média de exp(-alpha*L) sobre todos os canais seja E_p."""
    if not 0.0 < E_p < 1.0:
        raise DomainError(f"E_p deve estar em (0,1), recebido {E_p}")
    lengths = np.array([e.length for e in graph.edges.values() for _ in range(e.width)], dtype=float)
    if lengths.size == 0:
        raise DomainError("Rede sem canais")
    if np.any(lengths <= 0):
        raise DomainError("Comprimentos de aresta devem ser positivos")

    def residual(alpha: float) -> float:
        return float(np.mean(np.exp(-alpha * lengths))) - E_p

    upper = 1.0 / float(lengths.min())
    while residual(upper) > 0:
        upper *= 2.0
    alpha = brentq(residual, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    logger.debug(f"alpha calibrado: {alpha:.6g} para E_p={E_p}")
    return float(alpha)


def rescale_to_mean(graph: NetworkGraph, E_p: float) -> NetworkGraph:
    """Atalho: calibra alpha e aplica às probabilidades de canal."""
    return graph.with_alpha(calibrate_alpha(graph, E_p))


@dataclass
class WaxmanSettings:
    """Parâmetros do modelo de Waxman (não fixados pela literatura de origem)."""
    alpha: float = 0.4
    beta: float = 0.4
    degree_tolerance: float = 0.05
    max_attempts: int = 100


def _waxman_scale(base: np.ndarray, target_edges: float) -> float:
    """Fator s tal que sum(min(1, s*base)) = target_edges."""
    def expected(scale: float) -> float:
        return float(np.minimum(1.0, scale * base).sum()) - target_edges

    upper = 1.0 / float(base.min())
    return float(brentq(expected, 0.0, upper, xtol=1e-12))


def make_waxman(n: int, target_avg_degree: float = 6.0, qubit_range: Tuple[int, int] = (10, 14),
                width_range: Tuple[int, int] = (3, 7), E_p: float = 0.6, q: float = 0.9,
                seed: int = 0, settings: Optional[WaxmanSettings] = None) -> NetworkGraph:
    """Topologia Waxman conexa no quadrado unitário com grau médio ajustado."""
    settings = settings or WaxmanSettings()
    if n < 2:
        raise InvalidTopologyError(f"Waxman precisa de n >= 2 (recebido {n})")
    pairs = n * (n - 1) / 2
    target_edges = target_avg_degree * n / 2
    if target_avg_degree <= 0 or target_edges > pairs:
        raise TopologyCalibrationError(
            f"Grau médio {target_avg_degree} inatingível com {n} nós (máximo {n - 1})"
        )

    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(settings.max_attempts):
        rng = np.random.default_rng([seed, attempt])
        positions = rng.random((n, 2))
        distances = pdist(positions)
        span = float(distances.max())
        base = settings.beta * np.exp(-distances / (settings.alpha * span))
        scale = _waxman_scale(base, target_edges)
        mask = rng.random(base.size) < np.minimum(1.0, scale * base)

        realized = 2.0 * int(mask.sum()) / n
        if abs(realized - target_avg_degree) > settings.degree_tolerance * target_avg_degree:
            logger.debug(f"Waxman tentativa {attempt}: grau {realized:.2f} fora da tolerância")
            continue
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(zip(iu[mask].tolist(), ju[mask].tolist()))
        if not nx.is_connected(g):
            logger.debug(f"Waxman tentativa {attempt}: grafo desconexo, sorteando novamente")
            continue

        qubits = rng.integers(qubit_range[0], qubit_range[1] + 1, size=n)
        widths = rng.integers(width_range[0], width_range[1] + 1, size=int(mask.sum()))
        lengths = squareform(distances)
        nodes = [
            Node(i, (float(positions[i, 0]), float(positions[i, 1])), int(qubits[i]), q)
            for i in range(n)
        ]
        edges = [
            Edge(eid, int(u), int(v), max(float(lengths[u, v]), 1e-9), tuple([1.0] * int(w)))
            for eid, ((u, v), w) in enumerate(zip(sorted(g.edges()), widths))
        ]
        graph = NetworkGraph(nodes, edges, {'kind': 'waxman', 'n': n, 'seed': seed, 'attempt': attempt})
        logger.info(f"Topologia Waxman gerada: {n} nós, {len(edges)} arestas (tentativa {attempt})")
        return rescale_to_mean(graph, E_p)

    raise TopologyCalibrationError(
        f"Não foi possível gerar Waxman conexa com grau {target_avg_degree} "
        f"em {settings.max_attempts} tentativas"
    )


def save_topology(path: str, graph: NetworkGraph, schedule_document: Optional[List[Dict[str, Any]]] = None):
    """Salva a topologia (e opcionalmente a agenda) em JSON."""
    document = graph.to_document()
    if schedule_document is not None:
        document['schedule'] = schedule_document
    Path(path).write_text(json.dumps(document, indent=2, ensure_ascii=False), encoding='utf-8')
    logger.info(f"Topologia salva em {path}")


def load_topology_document(path: str) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)
