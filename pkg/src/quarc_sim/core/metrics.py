"""
Registro de métricas da simulação, resumo e persistência em CSV.
"""

import csv
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from ..exceptions import ConsistencyError, DomainError

logger = logging.getLogger(__name__)

SLOT_COLUMNS = ['slot', 'attempted', 'satisfied', 'skipped', 'clusters']
REQUEST_COLUMNS = ['id', 'source', 'destination', 'hop_distance', 'arrival_slot',
                   'satisfied_slot', 'latency', 'attempts']
CLUSTER_COLUMNS = ['epoch', 'end_slot', 'cluster', 'size', 'attempts', 'passes', 'rate',
                   'centroid_x', 'centroid_y']
SNAPSHOT_COLUMNS = ['epoch', 'node', 'cluster']


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    attempted: int
    satisfied: int
    skipped: int
    clusters: int


@dataclass
class RequestRecord:
    id: int
    source: int
    destination: int
    hop_distance: int
    arrival_slot: int
    satisfied_slot: Optional[int] = None
    attempts: int = 0

    @property
    def latency(self) -> Optional[int]:
        return None if self.satisfied_slot is None else self.satisfied_slot - self.arrival_slot


@dataclass(frozen=True)
class EpochClusterRecord:
    epoch: int
    end_slot: int
    cluster: int
    size: int
    attempts: int
    passes: int
    centroid_x: float
    centroid_y: float

    @property
    def rate(self) -> Optional[float]:
        return self.passes / self.attempts if self.attempts else None


@dataclass
class MetricsLog:
    """Séries por slot, por pedido e por época de uma simulação."""
    slots: List[SlotRecord] = field(default_factory=list)
    requests: Dict[int, RequestRecord] = field(default_factory=dict)
    epochs: List[EpochClusterRecord] = field(default_factory=list)
    snapshots: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def add_request(self, record: RequestRecord):
        if record.id in self.requests:
            raise ConsistencyError(f"Pedido {record.id} registrado duas vezes")
        self.requests[record.id] = record

    def mark_attempt(self, request_id: int):
        self.requests[request_id].attempts += 1

    def mark_satisfied(self, request_id: int, slot: int):
        record = self.requests[request_id]
        if record.satisfied_slot is not None:
            raise ConsistencyError(f"Pedido {request_id} satisfeito duas vezes")
        if slot < record.arrival_slot:
            raise ConsistencyError(f"Pedido {request_id} satisfeito antes de chegar")
        record.satisfied_slot = slot

    def add_epoch(self, records: List[EpochClusterRecord], assignment: Mapping[int, int]):
        for record in records:
            if record.passes > record.attempts:
                raise ConsistencyError(f"Cluster {record.cluster}: passagens > tentativas")
        self.epochs.extend(records)
        epoch = records[0].epoch if records else len(self.snapshots)
        self.snapshots.append({'epoch': epoch, 'node_of': dict(assignment)})

    @property
    def total_satisfied(self) -> int:
        return sum(s.satisfied for s in self.slots)

    def write_csv(self, directory: str) -> Dict[str, Path]:
        """Grava uma CSV por família de métricas; retorna os caminhos."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            'slots': out / 'slots.csv',
            'requests': out / 'requests.csv',
            'clusters': out / 'clusters.csv',
            'snapshots': out / 'snapshots.csv',
        }

        with open(paths['slots'], 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(SLOT_COLUMNS)
            for s in self.slots:
                writer.writerow([s.slot, s.attempted, s.satisfied, s.skipped, s.clusters])

        with open(paths['requests'], 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(REQUEST_COLUMNS)
            for r in sorted(self.requests.values(), key=lambda r: r.id):
                writer.writerow([
                    r.id, r.source, r.destination, r.hop_distance, r.arrival_slot,
                    '' if r.satisfied_slot is None else r.satisfied_slot,
                    '' if r.latency is None else r.latency,
                    r.attempts,
                ])

        with open(paths['clusters'], 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(CLUSTER_COLUMNS)
            for c in self.epochs:
                writer.writerow([
                    c.epoch, c.end_slot, c.cluster, c.size, c.attempts, c.passes,
                    '' if c.rate is None else f"{c.rate:.6f}",
                    f"{c.centroid_x:.6f}", f"{c.centroid_y:.6f}",
                ])

        with open(paths['snapshots'], 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(SNAPSHOT_COLUMNS)
            for snap in self.snapshots:
                for node, cluster in sorted(snap['node_of'].items()):
                    writer.writerow([snap['epoch'], node, cluster])

        logger.debug(f"Métricas gravadas em {out}")
        return paths


def _latency_stats(latencies: List[int]) -> Dict[str, Any]:
    if not latencies:
        return {'count': 0, 'mean': None, 'median': None, 'p95': None, 'histogram': {}}
    values = np.array(latencies, dtype=float)
    return {
        'count': len(latencies),
        'mean': float(values.mean()),
        'median': float(np.median(values)),
        'p95': float(np.percentile(values, 95)),
        'histogram': dict(sorted(Counter(latencies).items())),
    }


def _windowed(series: List[int], window: int) -> List[float]:
    return [float(np.mean(series[i:i + window])) for i in range(0, len(series), window)]


def summarize(log: MetricsLog, window: Optional[int] = None, baseline: Optional[Dict[str, Any]] = None,
              split_y: Optional[float] = None) -> Dict[str, Any]:
    """Relatório agregado: vazão, latência, inanição por distância e clusters por região.

    `window` padrão = duração da época; `split_y` padrão = meio da faixa vertical dos nós.
    Com `baseline` (relatório de uma rodada com fila de capacidade 1) inclui o viés de alocação.
    """
    if window is None:
        window = int(log.meta.get('epoch_length', 500))
    if window < 1:
        raise DomainError(f"Janela deve ser >= 1 (recebida {window})")

    satisfied = [s.satisfied for s in log.slots]
    total = sum(satisfied)
    requests = list(log.requests.values())
    latencies = [r.latency for r in requests if r.latency is not None]

    by_hop: Dict[int, Dict[str, Any]] = {}
    grouped: Dict[int, List[RequestRecord]] = defaultdict(list)
    for r in requests:
        grouped[r.hop_distance].append(r)
    for hop in sorted(grouped):
        group = grouped[hop]
        done = [r for r in group if r.satisfied_slot is not None]
        attempts = sum(r.attempts for r in group)
        hop_latencies = [r.latency for r in done]
        by_hop[hop] = {
            'generated': len(group),
            'satisfied': len(done),
            'attempts': attempts,
            'success_rate': len(done) / attempts if attempts else None,
            'starvation': 1.0 - len(done) / len(group),
            'mean_latency': float(np.mean(hop_latencies)) if hop_latencies else None,
        }

    if split_y is None:
        split_y = float(log.meta.get('split_y', 0.5))
    epochs: Dict[int, List[EpochClusterRecord]] = defaultdict(list)
    for record in log.epochs:
        epochs[record.epoch].append(record)
    clusters_per_epoch = [len(epochs[e]) for e in sorted(epochs)]
    by_region = []
    for e in sorted(epochs):
        lower = [c.size for c in epochs[e] if c.centroid_y < split_y]
        upper = [c.size for c in epochs[e] if c.centroid_y >= split_y]
        by_region.append({
            'epoch': e,
            'lower': float(np.mean(lower)) if lower else None,
            'upper': float(np.mean(upper)) if upper else None,
        })

    report: Dict[str, Any] = {
        'slots': len(log.slots),
        'window': window,
        'throughput': {
            'total': total,
            'mean': total / len(satisfied) if satisfied else 0.0,
            'series': _windowed(satisfied, window),
        },
        'latency': _latency_stats(latencies),
        'starvation': 1.0 - len(latencies) / len(requests) if requests else 0.0,
        'by_hop_distance': by_hop,
        'clusters_per_epoch': clusters_per_epoch,
        'cluster_size_by_region': by_region,
    }
    if baseline is not None:
        report['allocation_bias'] = allocation_bias(report, baseline)
    return report


def allocation_bias(report: Dict[str, Any], baseline: Dict[str, Any]) -> Dict[int, Optional[float]]:
    """Razão, por distância, entre a taxa de sucesso realizada e a máxima (fila de 1 pedido)."""
    realised = {int(h): v.get('success_rate') for h, v in report['by_hop_distance'].items()}
    maximum = {int(h): v.get('success_rate') for h, v in baseline['by_hop_distance'].items()}
    bias: Dict[int, Optional[float]] = {}
    for hop in sorted(realised):
        rate, best = realised[hop], maximum.get(hop)
        bias[hop] = rate / best if rate is not None and best else None
    return bias
