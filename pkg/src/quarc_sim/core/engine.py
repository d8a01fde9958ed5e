"""
Laço de simulação em slots: geração de pedidos, roteamento, percolação e reconfiguração por época.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..clustering.partition import Clustering, ClusterStats, ReconfigConfig, reconfigure
from ..clustering.thresholds import ThresholdTable, builtin_2d_table
from ..exceptions import ConfigError
from ..percolation.fusion import SlotOutcome, evaluate_request
from ..routing.paths import Request, select_paths
from ..topology.network import NetworkGraph
from ..topology.schedule import ParameterSchedule, apply_schedule
from .metrics import EpochClusterRecord, MetricsLog, RequestRecord, SlotRecord
from .streams import RandomStreams
from .trace import TraceWriter

logger = logging.getLogger(__name__)

MODES = ('adaptive', 'static')
DISTRIBUTIONS = ('uniform', 'bimodal')


@dataclass(frozen=True)
class RequestDistribution:
    """Distribuição dos pares S-D.

    No modo bimodal, `near_share` dos pedidos têm distância em saltos igual a
    `near` x diâmetro e o restante `far` x diâmetro.
    """
    kind: str = 'uniform'
    near: float = 0.25
    far: float = 0.75
    near_share: float = 0.5

    def __post_init__(self):
        if self.kind not in DISTRIBUTIONS:
            raise ConfigError('requests.distribution', f"distribuição desconhecida: {self.kind}")
        for key in ('near', 'far'):
            if not 0.0 < getattr(self, key) <= 1.0:
                raise ConfigError(f'requests.{key}', "fração do diâmetro deve estar em (0,1]")
        if not 0.0 <= self.near_share <= 1.0:
            raise ConfigError('requests.near_share', "deve estar em [0,1]")


class RequestQueue:
    """Fila FIFO global de pedidos, sempre reabastecida até `capacity`."""

    def __init__(self, graph: NetworkGraph, capacity: int = 10,
                 distribution: Optional[RequestDistribution] = None):
        if capacity < 1:
            raise ConfigError('requests.queue_capacity', f"deve ser >= 1 (recebido {capacity})")
        if len(graph) < 2:
            raise ConfigError('topology', "são necessários pelo menos 2 nós para gerar pedidos")
        self.graph = graph
        self.capacity = capacity
        self.distribution = distribution or RequestDistribution()
        self.pending: List[Request] = []
        self._next_id = 0
        self._nodes = list(graph.nodes)
        self._hops = graph.hop_distances()
        self._pairs_by_distance: Optional[Dict[int, List[Tuple[int, int]]]] = None

    def __len__(self) -> int:
        return len(self.pending)

    def __iter__(self):
        return iter(self.pending)

    def _distance_buckets(self) -> Dict[int, List[Tuple[int, int]]]:
        if self._pairs_by_distance is None:
            buckets: Dict[int, List[Tuple[int, int]]] = {}
            for u in self._nodes:
                for v, d in sorted(self._hops[u].items()):
                    if u != v:
                        buckets.setdefault(d, []).append((u, v))
            self._pairs_by_distance = buckets
        return self._pairs_by_distance

    def _draw_pair(self, rng: np.random.Generator) -> Tuple[int, int]:
        if self.distribution.kind == 'uniform':
            n = len(self._nodes)
            i = int(rng.integers(n))
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            return self._nodes[i], self._nodes[j]

        buckets = self._distance_buckets()
        diameter = max(buckets)
        share = self.distribution.near if rng.random() < self.distribution.near_share else self.distribution.far
        target = max(1, int(round(share * diameter)))
        # Distância sem pares: usa a mais próxima disponível
        distance = min(buckets, key=lambda d: (abs(d - target), d))
        pairs = buckets[distance]
        return pairs[int(rng.integers(len(pairs)))]

    def refill(self, slot: int, rng: np.random.Generator) -> List[Request]:
        """Gera pedidos novos (chegada = `slot`) até a fila ficar cheia."""
        created = []
        while len(self.pending) < self.capacity:
            source, destination = self._draw_pair(rng)
            request = Request(
                self._next_id, source, destination, slot,
                self._hops[source].get(destination, -1),
            )
            self._next_id += 1
            self.pending.append(request)
            created.append(request)
        return created

    def remove(self, request_ids: Iterable[int]):
        done = set(request_ids)
        self.pending = [r for r in self.pending if r.id not in done]


@dataclass(frozen=True)
class SimulationConfig:
    """Parâmetros do laço de simulação (a topologia e a agenda vêm à parte)."""
    slots: int = 0
    epoch_length: int = 500
    k: int = 4
    queue_capacity: int = 10
    distribution: RequestDistribution = field(default_factory=RequestDistribution)
    mode: str = 'adaptive'
    seed: int = 0
    consecutive_only: bool = False

    def __post_init__(self):
        if self.slots < 0:
            raise ConfigError('slots', f"deve ser >= 0 (recebido {self.slots})")
        if self.epoch_length < 1:
            raise ConfigError('epoch_length', f"deve ser >= 1 (recebido {self.epoch_length})")
        if self.k < 2:
            raise ConfigError('k', f"deve ser >= 2 (recebido {self.k})")
        if self.queue_capacity < 1:
            raise ConfigError('requests.queue_capacity', f"deve ser >= 1 (recebido {self.queue_capacity})")
        if self.mode not in MODES:
            raise ConfigError('mode', f"modo desconhecido: {self.mode} (opções: {', '.join(MODES)})")
        if self.seed < 0:
            raise ConfigError('seed', f"deve ser >= 0 (recebido {self.seed})")

    @property
    def epochs(self) -> int:
        return math.ceil(self.slots / self.epoch_length)


class QuarcSimulator:
    """Estado de uma simulação: fila, clusterização, estatísticas da época e log."""

    def __init__(self, graph: NetworkGraph, config: SimulationConfig,
                 schedule: Optional[ParameterSchedule] = None,
                 thresholds: Optional[ThresholdTable] = None,
                 initial: Optional[Clustering] = None,
                 trace: Optional[TraceWriter] = None):
        self.graph = graph
        self.config = config
        self.schedule = schedule or ParameterSchedule()
        self.thresholds = thresholds or builtin_2d_table()
        self.clustering = initial or Clustering.whole(graph)
        if self.clustering.graph is not graph:
            raise ConfigError('clustering', "a clusterização inicial pertence a outra topologia")
        self.reconfig = ReconfigConfig(config.k, config.epoch_length)
        self.streams = RandomStreams(config.seed)
        self.queue = RequestQueue(graph, config.queue_capacity, config.distribution)
        self.trace = trace
        self.stats: Dict[int, ClusterStats] = {}
        self.slot = 0
        self.epoch = 0

        ys = [node.position[1] for node in graph.nodes.values()]
        self.log = MetricsLog(meta={
            'network_size': len(graph),
            'epoch_length': config.epoch_length,
            'mode': config.mode,
            'seed': config.seed,
            'split_y': (min(ys) + max(ys)) / 2 if ys else 0.5,
        })

    def run_slot(self) -> SlotRecord:
        """Um slot: reabastece a fila, roteia, percola e contabiliza."""
        slot = self.slot
        for request in self.queue.refill(slot, self.streams.for_arrivals(slot)):
            self.log.add_request(RequestRecord(
                request.id, request.source, request.destination,
                request.hop_distance, request.arrival_slot,
            ))

        params = apply_schedule(self.graph, self.schedule, slot)
        selection = select_paths(self.queue.pending, self.clustering)
        outcomes: List[SlotOutcome] = [
            evaluate_request(
                path, self.graph, params,
                self.streams.for_request(slot, path.request_id),
                self.config.consecutive_only,
            )
            for path in selection.paths
        ]
        outcomes.sort(key=lambda o: o.request_id)

        satisfied = []
        for outcome in outcomes:
            self.log.mark_attempt(outcome.request_id)
            for cid, passed in zip(outcome.cluster_ids, outcome.passes):
                self.stats.setdefault(cid, ClusterStats()).record(passed)
            if outcome.success:
                self.log.mark_satisfied(outcome.request_id, slot)
                satisfied.append(outcome.request_id)

        if self.trace is not None:
            self.trace.slot(slot, self.queue.pending, selection, outcomes)
        self.queue.remove(satisfied)

        record = SlotRecord(slot, len(outcomes), len(satisfied), len(selection.skipped), len(self.clustering))
        self.log.slots.append(record)
        self.slot += 1
        return record

    def run_epoch(self, slots: Optional[int] = None, reconfigure_after: bool = True) -> Clustering:
        """Executa uma época e, no modo adaptativo, reconfigura os clusters."""
        for _ in range(self.config.epoch_length if slots is None else slots):
            self.run_slot()

        records = []
        for cid in self.clustering.ids():
            stats = self.stats.get(cid, ClusterStats())
            x, y = self.clustering.centroid(cid)
            records.append(EpochClusterRecord(
                self.epoch, self.slot - 1, cid, self.clustering.size(cid),
                stats.attempts, stats.passes, x, y,
            ))
        self.log.add_epoch(records, self.clustering.node_of)

        if self.config.mode == 'adaptive' and reconfigure_after:
            self.clustering = reconfigure(self.clustering, self.stats, self.thresholds, self.reconfig, self.graph)
        if self.trace is not None:
            self.trace.epoch(self.epoch, self.slot, len(self.clustering))

        logger.debug(f"Época {self.epoch} concluída no slot {self.slot}: {len(self.clustering)} clusters")
        self.stats = {}
        self.epoch += 1
        return self.clustering

    def run(self) -> MetricsLog:
        total = self.config.slots
        while self.slot < total:
            length = min(self.config.epoch_length, total - self.slot)
            self.run_epoch(length, reconfigure_after=self.slot + length < total)
        logger.info(
            f"Simulação concluída: {total} slots, {self.log.total_satisfied} pedidos satisfeitos, "
            f"{len(self.clustering)} clusters"
        )
        return self.log


def run_slot(simulator: QuarcSimulator) -> SlotRecord:
    return simulator.run_slot()


def run_epoch(simulator: QuarcSimulator) -> Clustering:
    return simulator.run_epoch()


def run_simulation(graph: NetworkGraph, config: SimulationConfig,
                   schedule: Optional[ParameterSchedule] = None,
                   thresholds: Optional[ThresholdTable] = None,
                   initial: Optional[Clustering] = None,
                   trace: Optional[TraceWriter] = None) -> MetricsLog:
    """Roda ⌈slots/epoch_length⌉ épocas; no modo estático a partição nunca muda."""
    return QuarcSimulator(graph, config, schedule, thresholds, initial, trace).run()
