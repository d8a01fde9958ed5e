"""
Geração de links, protocolo de fusão e decisão de sucesso por percolação.

Semântica de sucesso/falha apenas: não há simulação de estados quânticos.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np

from ..exceptions import ConsistencyError, DomainError
from ..routing.assignment import QubitAssignment, assign_qubits
from ..routing.paths import ClusterPath
from ..topology.network import Channel, NetworkGraph
from ..topology.schedule import ParameterView

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkSample:
    channel: Channel
    success: bool


@dataclass(frozen=True)
class FusionAttempt:
    node: int
    links: FrozenSet[Channel]
    success: bool
    tier: int  # 1 = primária, >= 2 = secundária


class LinkGraph:
    """Grafo cujos vértices são links e cujas arestas são fusões bem-sucedidas."""

    def __init__(self, graph: nx.Graph, endpoints: Dict[Channel, Tuple[int, int]]):
        self.graph = graph
        self.endpoints = endpoints
        self._incident: Dict[int, Set[Channel]] = defaultdict(set)
        for link, (u, v) in endpoints.items():
            self._incident[u].add(link)
            self._incident[v].add(link)

    @property
    def vertices(self) -> List[Channel]:
        return sorted(self.graph.nodes())

    @property
    def arcs(self) -> List[Tuple[Channel, Channel]]:
        return sorted(tuple(sorted(a)) for a in self.graph.edges())

    def incident(self, node: int) -> Set[Channel]:
        return self._incident.get(node, set())


def sample_links(assignment: QubitAssignment, params: ParameterView,
                 rng: np.random.Generator) -> List[LinkSample]:
    """Bernoulli(p_c) independente para cada canal atribuído."""
    channels = sorted(assignment.assigned)
    if not channels:
        return []
    probs = np.array([params.channel_prob(e, i) for e, i in channels])
    draws = rng.random(len(channels)) < probs
    return [LinkSample(ch, bool(ok)) for ch, ok in zip(channels, draws)]


def fusion_plan(node: int, links: Iterable[Channel],
                graph: Optional[NetworkGraph] = None) -> List[FrozenSet[Channel]]:
    """Rodadas gulosas: o link de menor id de cada aresta incidente forma uma fusão.

    Um link que sobraria sozinho entra na fusão anterior; conjuntos unitários
    nunca são emitidos.
    """
    remaining: Dict[int, List[int]] = defaultdict(list)
    for edge_id, index in links:
        if graph is not None and node not in graph.edges[edge_id].endpoints:
            raise ConsistencyError(f"Link {(edge_id, index)} não incide no nó {node}")
        remaining[edge_id].append(index)
    for indices in remaining.values():
        indices.sort()

    total = sum(len(v) for v in remaining.values())
    plan: List[List[Channel]] = []
    carried: List[Channel] = []
    while total:
        selected = [(e, remaining[e].pop(0)) for e in sorted(remaining) if remaining[e]]
        total -= len(selected)
        if total == 1:
            leftover = next((e, remaining[e].pop(0)) for e in sorted(remaining) if remaining[e])
            selected.append(leftover)
            total = 0
        selected = carried + selected
        carried = []
        if len(selected) >= 2:
            plan.append(selected)
        elif plan:
            plan[-1].extend(selected)
        else:
            # Só uma aresta incidente até aqui: acumula para a próxima rodada
            carried = selected
    return [frozenset(s) for s in plan]


def sample_fusions(plans: Mapping[int, List[FrozenSet[Channel]]], q: Mapping[int, float],
                   rng: np.random.Generator) -> List[FusionAttempt]:
    """Bernoulli(q do nó) para cada conjunto planejado; tier = índice da rodada."""
    attempts: List[FusionAttempt] = []
    for node in sorted(plans):
        sets = plans[node]
        if not sets:
            continue
        draws = rng.random(len(sets)) < q[node]
        for tier, (links, ok) in enumerate(zip(sets, draws), start=1):
            attempts.append(FusionAttempt(node, links, bool(ok), tier))
    return attempts


def build_link_graph(links: Iterable[LinkSample], fusions: Iterable[FusionAttempt],
                     graph: NetworkGraph) -> LinkGraph:
    """Vértices = links bem-sucedidos; cada fusão bem-sucedida vira um clique."""
    g = nx.Graph()
    endpoints: Dict[Channel, Tuple[int, int]] = {}
    for sample in links:
        if sample.success:
            g.add_node(sample.channel)
            endpoints[sample.channel] = graph.edges[sample.channel[0]].endpoints

    for fusion in fusions:
        if not fusion.success:
            continue
        members = sorted(fusion.links)
        for link in members:
            if link not in endpoints:
                raise ConsistencyError(f"Fusão no nó {fusion.node} referencia link ausente {link}")
            if fusion.node not in endpoints[link]:
                raise ConsistencyError(f"Fusão no nó {fusion.node} usa link não incidente {link}")
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                g.add_edge(members[a], members[b])
    return LinkGraph(g, endpoints)


def _connects(graph: nx.Graph, entry: Set[Channel], exit_: Set[Channel]) -> bool:
    seen: Set[Channel] = set()
    for link in sorted(entry):
        if link in seen or link not in graph:
            continue
        component = nx.node_connected_component(graph, link)
        if component & exit_:
            return True
        seen |= component
    return False


def end_to_end_success(lg: LinkGraph, source: int, destination: int) -> bool:
    """Existe componente com um link incidente a S e outro incidente a D."""
    return _connects(lg.graph, lg.incident(source), lg.incident(destination))


def cluster_pass(lg: LinkGraph, path: ClusterPath, source: int, destination: int, i: int) -> bool:
    """O cluster i ligou o segmento anterior (ou S) ao seguinte (ou D)?"""
    k = len(path.members) - 1
    if not 0 <= i <= k:
        raise DomainError(f"Índice de cluster {i} fora de [0, {k}]")

    previous = {source} if i == 0 else set(path.members[i - 1])
    following = {destination} if i == k else set(path.members[i + 1])
    allowed = previous | set(path.members[i]) | following

    kept = [link for link, (u, v) in lg.endpoints.items() if u in allowed and v in allowed]
    restricted = lg.graph.subgraph(kept)
    entry = {link for link in kept if set(lg.endpoints[link]) & previous}
    exit_ = {link for link in kept if set(lg.endpoints[link]) & following}
    return _connects(restricted, entry, exit_)


@dataclass
class SlotOutcome:
    """Resultado de um pedido atendido num slot."""
    request_id: int
    cluster_ids: Tuple[int, ...]
    links: List[LinkSample] = field(default_factory=list)
    fusions: List[FusionAttempt] = field(default_factory=list)
    success: bool = False
    passes: List[bool] = field(default_factory=list)

    def to_trace(self) -> Dict:
        return {
            'request': self.request_id,
            'clusters': list(self.cluster_ids),
            'links': [[list(s.channel), s.success] for s in self.links],
            'fusions': [
                {'node': f.node, 'links': sorted(list(l) for l in f.links), 'tier': f.tier, 'ok': f.success}
                for f in self.fusions
            ],
            'success': self.success,
            'passes': self.passes,
        }


def evaluate_request(path: ClusterPath, graph: NetworkGraph, params: ParameterView,
                     rng: np.random.Generator, consecutive_only: bool = False) -> SlotOutcome:
    """Pipeline completo de um pedido: qubits, links, fusões, sucesso e passagens."""
    assignment = assign_qubits(path, graph, rng, consecutive_only)
    links = sample_links(assignment, params, rng)

    by_node: Dict[int, List[Channel]] = defaultdict(list)
    for sample in links:
        if sample.success:
            u, v = graph.edges[sample.channel[0]].endpoints
            by_node[u].append(sample.channel)
            by_node[v].append(sample.channel)
    plans = {node: fusion_plan(node, chans) for node, chans in by_node.items()}
    q = {node: params.fusion_prob(node) for node in plans}
    fusions = sample_fusions(plans, q, rng)

    lg = build_link_graph(links, fusions, graph)
    success = end_to_end_success(lg, path.source, path.destination)
    passes = [cluster_pass(lg, path, path.source, path.destination, i) for i in range(len(path.members))]
    return SlotOutcome(path.request_id, path.clusters, links, fusions, success, passes)
