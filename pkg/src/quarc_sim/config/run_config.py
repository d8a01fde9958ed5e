"""
Documento de experimento (JSON) -> RunConfig validado, com padrões preenchidos.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..clustering.partition import Clustering
from ..clustering.thresholds import ThresholdTable, builtin_2d_table
from ..core.engine import DISTRIBUTIONS, MODES, RequestDistribution, SimulationConfig
from ..exceptions import ConfigError, QuarcError
from ..topology.network import (NetworkGraph, UNLIMITED, load_topology_document, make_grid,
                                make_waxman)
from ..topology.schedule import ParameterSchedule

logger = logging.getLogger(__name__)

TOPOLOGY_KINDS = ('grid', 'waxman', 'file')
THRESHOLD_SOURCES = ('builtin-2d', 'file', 'topology-specific')
PARTITION_KINDS = ('whole', 'singletons', 'grid-blocks', 'explicit')
TRACE_LEVELS = ('none', 'routing', 'full')

_TOPOLOGY_KEYS = {
    'grid': {'kind', 'side', 'width', 'qubits', 'p', 'q'},
    'waxman': {'kind', 'n', 'avg_degree', 'qubit_range', 'width_range', 'E_p', 'q', 'seed'},
    'file': {'kind', 'path'},
}
_TOP_KEYS = {
    'topology', 'schedule', 'thresholds', 'mode', 'partition', 'slots', 'epoch_length', 'k',
    'requests', 'seed', 'consecutive_only', 'trace', 'output_dir',
}


def _check_keys(document: Any, allowed: set, prefix: str) -> Dict[str, Any]:
    if not isinstance(document, dict):
        raise ConfigError(prefix or '<raiz>', "esperado um objeto JSON")
    unknown = sorted(set(document) - allowed)
    if unknown:
        key = f"{prefix}.{unknown[0]}" if prefix else unknown[0]
        raise ConfigError(key, "chave desconhecida")
    return document


def _int(document: Dict[str, Any], key: str, default: Optional[int], prefix: str = '',
         minimum: Optional[int] = None) -> Optional[int]:
    name = f"{prefix}.{key}" if prefix else key
    value = document.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"esperado inteiro, recebido {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"deve ser >= {minimum} (recebido {value})")
    return value


def _prob(document: Dict[str, Any], key: str, default: float, prefix: str) -> float:
    name = f"{prefix}.{key}"
    value = document.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
        raise ConfigError(name, f"probabilidade inválida: {value!r}")
    return float(value)


def _range(document: Dict[str, Any], key: str, default: Tuple[int, int], prefix: str) -> Tuple[int, int]:
    value = document.get(key, list(default))
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, int) and v >= 1 for v in value) or value[0] > value[1]):
        raise ConfigError(f"{prefix}.{key}", f"esperado [mínimo, máximo] inteiros positivos, recebido {value!r}")
    return int(value[0]), int(value[1])


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    side: int = 16
    width: int = 1
    qubits: Optional[int] = None
    p: float = 1.0
    q: float = 1.0
    n: int = 100
    avg_degree: float = 6.0
    qubit_range: Tuple[int, int] = (10, 14)
    width_range: Tuple[int, int] = (3, 7)
    E_p: float = 0.6
    seed: int = 0
    path: Optional[str] = None

    def to_document(self) -> Dict[str, Any]:
        if self.kind == 'grid':
            return {'kind': 'grid', 'side': self.side, 'width': self.width, 'qubits': self.qubits,
                    'p': self.p, 'q': self.q}
        if self.kind == 'waxman':
            return {'kind': 'waxman', 'n': self.n, 'avg_degree': self.avg_degree,
                    'qubit_range': list(self.qubit_range), 'width_range': list(self.width_range),
                    'E_p': self.E_p, 'q': self.q, 'seed': self.seed}
        return {'kind': 'file', 'path': self.path}


@dataclass(frozen=True)
class ThresholdSpec:
    source: str = 'builtin-2d'
    path: Optional[str] = None
    # Limiares da grade usados como base para a calibração por topologia
    grid_path: Optional[str] = None
    q: Optional[float] = None

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {'source': self.source}
        if self.source == 'file':
            doc['path'] = self.path
        if self.source == 'topology-specific':
            doc['grid_path'] = self.grid_path
            doc['q'] = self.q
        return doc


@dataclass(frozen=True)
class PartitionSpec:
    kind: str = 'whole'
    block: Optional[int] = None
    parts: Tuple[Tuple[int, ...], ...] = ()

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {'kind': self.kind}
        if self.kind == 'grid-blocks':
            doc['block'] = self.block
        if self.kind == 'explicit':
            doc['parts'] = [list(p) for p in self.parts]
        return doc


@dataclass(frozen=True)
class RequestSpec:
    queue_capacity: int = 10
    distribution: str = 'uniform'
    near: float = 0.25
    far: float = 0.75
    near_share: float = 0.5

    def to_document(self) -> Dict[str, Any]:
        return {'queue_capacity': self.queue_capacity, 'distribution': self.distribution,
                'near': self.near, 'far': self.far, 'near_share': self.near_share}


@dataclass(frozen=True)
class RunConfig:
    """Configuração completa de um experimento."""
    topology: TopologySpec
    schedule: Any = None
    thresholds: ThresholdSpec = field(default_factory=ThresholdSpec)
    mode: str = 'adaptive'
    partition: PartitionSpec = field(default_factory=PartitionSpec)
    slots: int = 10000
    epoch_length: int = 500
    k: int = 4
    requests: RequestSpec = field(default_factory=RequestSpec)
    seed: int = 0
    consecutive_only: bool = False
    trace: str = 'none'
    output_dir: Optional[str] = None

    def to_document(self) -> Dict[str, Any]:
        return {
            'topology': self.topology.to_document(),
            'schedule': self.schedule,
            'thresholds': self.thresholds.to_document() if self.mode == 'adaptive' else None,
            'mode': self.mode,
            'partition': self.partition.to_document(),
            'slots': self.slots,
            'epoch_length': self.epoch_length,
            'k': self.k,
            'requests': self.requests.to_document(),
            'seed': self.seed,
            'consecutive_only': self.consecutive_only,
            'trace': self.trace,
            'output_dir': self.output_dir,
        }

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Aplica flags da CLI (valores None são ignorados) e revalida."""
        values = {k: v for k, v in overrides.items() if v is not None}
        if not values:
            return self
        document = self.to_document()
        document.update(values)
        return parse_config(document)

    def simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            slots=self.slots,
            epoch_length=self.epoch_length,
            k=self.k,
            queue_capacity=self.requests.queue_capacity,
            distribution=RequestDistribution(
                self.requests.distribution, self.requests.near, self.requests.far, self.requests.near_share,
            ),
            mode=self.mode,
            seed=self.seed,
            consecutive_only=self.consecutive_only,
        )


def _parse_topology(document: Any) -> TopologySpec:
    if document is None:
        raise ConfigError('topology', "topologia obrigatória")
    if not isinstance(document, dict) or document.get('kind') not in TOPOLOGY_KINDS:
        raise ConfigError('topology.kind', f"esperado um de: {', '.join(TOPOLOGY_KINDS)}")
    kind = document['kind']
    _check_keys(document, _TOPOLOGY_KEYS[kind], 'topology')

    if kind == 'grid':
        return TopologySpec(
            'grid',
            side=_int(document, 'side', 16, 'topology', 2),
            width=_int(document, 'width', 1, 'topology', 1),
            qubits=_int(document, 'qubits', None, 'topology', 1),
            p=_prob(document, 'p', 1.0, 'topology'),
            q=_prob(document, 'q', 1.0, 'topology'),
        )
    if kind == 'waxman':
        degree = document.get('avg_degree', 6.0)
        if isinstance(degree, bool) or not isinstance(degree, (int, float)) or degree <= 0:
            raise ConfigError('topology.avg_degree', f"deve ser positivo (recebido {degree!r})")
        E_p = document.get('E_p', 0.6)
        if not isinstance(E_p, (int, float)) or not 0.0 < E_p < 1.0:
            raise ConfigError('topology.E_p', f"deve estar em (0,1) (recebido {E_p!r})")
        return TopologySpec(
            'waxman',
            n=_int(document, 'n', 100, 'topology', 2),
            avg_degree=float(degree),
            qubit_range=_range(document, 'qubit_range', (10, 14), 'topology'),
            width_range=_range(document, 'width_range', (3, 7), 'topology'),
            E_p=float(E_p),
            q=_prob(document, 'q', 0.9, 'topology'),
            seed=_int(document, 'seed', 0, 'topology', 0),
        )
    path = document.get('path')
    if not isinstance(path, str) or not path:
        raise ConfigError('topology.path', "caminho do arquivo de topologia obrigatório")
    return TopologySpec('file', path=path)


def _parse_thresholds(document: Any) -> ThresholdSpec:
    if document is None:
        return ThresholdSpec()
    _check_keys(document, {'source', 'path', 'grid_path', 'q'}, 'thresholds')
    source = document.get('source', 'builtin-2d')
    if source not in THRESHOLD_SOURCES:
        raise ConfigError('thresholds.source', f"esperado um de: {', '.join(THRESHOLD_SOURCES)}")
    if source == 'file':
        if not document.get('path'):
            raise ConfigError('thresholds.path', "caminho obrigatório para limiares em arquivo")
        return ThresholdSpec('file', path=document['path'])
    if source == 'topology-specific':
        q = document.get('q')
        if q is not None:
            q = _prob(document, 'q', 0.0, 'thresholds')
        return ThresholdSpec('topology-specific', grid_path=document.get('grid_path'), q=q)
    return ThresholdSpec()


def _parse_partition(document: Any) -> PartitionSpec:
    if document is None:
        return PartitionSpec()
    _check_keys(document, {'kind', 'block', 'parts'}, 'partition')
    kind = document.get('kind', 'whole')
    if kind not in PARTITION_KINDS:
        raise ConfigError('partition.kind', f"esperado um de: {', '.join(PARTITION_KINDS)}")
    if kind == 'grid-blocks':
        block = _int(document, 'block', None, 'partition', 1)
        if block is None:
            raise ConfigError('partition.block', "tamanho do bloco obrigatório")
        return PartitionSpec('grid-blocks', block=block)
    if kind == 'explicit':
        parts = document.get('parts')
        if not isinstance(parts, list) or not parts or not all(isinstance(p, list) and p for p in parts):
            raise ConfigError('partition.parts', "esperado lista não vazia de listas de nós")
        return PartitionSpec('explicit', parts=tuple(tuple(int(n) for n in p) for p in parts))
    return PartitionSpec(kind)


def _parse_requests(document: Any) -> RequestSpec:
    if document is None:
        return RequestSpec()
    _check_keys(document, {'queue_capacity', 'distribution', 'near', 'far', 'near_share'}, 'requests')
    distribution = document.get('distribution', 'uniform')
    if distribution not in DISTRIBUTIONS:
        raise ConfigError('requests.distribution', f"esperado um de: {', '.join(DISTRIBUTIONS)}")
    return RequestSpec(
        queue_capacity=_int(document, 'queue_capacity', 10, 'requests', 1),
        distribution=distribution,
        near=_prob(document, 'near', 0.25, 'requests'),
        far=_prob(document, 'far', 0.75, 'requests'),
        near_share=_prob(document, 'near_share', 0.5, 'requests'),
    )


def parse_config(document: Any) -> RunConfig:
    """Valida o documento e preenche padrões (fila 10, época 500, k 4)."""
    _check_keys(document, _TOP_KEYS, '')
    topology = _parse_topology(document.get('topology'))

    mode = document.get('mode', 'adaptive')
    if mode not in MODES:
        raise ConfigError('mode', f"esperado um de: {', '.join(MODES)}")
    partition = _parse_partition(document.get('partition'))
    if mode == 'static' and 'partition' not in document:
        raise ConfigError('partition', "modo estático exige uma partição explícita")
    if mode == 'static' and document.get('thresholds') is not None:
        raise ConfigError('thresholds', "limiares não se aplicam ao modo estático")
    if partition.kind == 'grid-blocks' and topology.kind != 'grid':
        raise ConfigError('partition.kind', "grid-blocks exige topologia em grade")

    trace = document.get('trace', 'none')
    if trace not in TRACE_LEVELS:
        raise ConfigError('trace', f"esperado um de: {', '.join(TRACE_LEVELS)}")
    consecutive_only = document.get('consecutive_only', False)
    if not isinstance(consecutive_only, bool):
        raise ConfigError('consecutive_only', "esperado booleano")
    output_dir = document.get('output_dir')
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError('output_dir', "esperado caminho (texto)")

    slots = _int(document, 'slots', 10000, minimum=0)
    schedule = document.get('schedule')
    # Valida já na leitura; o documento original é mantido para o manifesto
    ParameterSchedule.from_document(schedule, horizon=slots)

    return RunConfig(
        topology=topology,
        schedule=schedule,
        thresholds=_parse_thresholds(document.get('thresholds')),
        mode=mode,
        partition=partition,
        slots=slots,
        epoch_length=_int(document, 'epoch_length', 500, minimum=1),
        k=_int(document, 'k', 4, minimum=2),
        requests=_parse_requests(document.get('requests')),
        seed=_int(document, 'seed', 0, minimum=0),
        consecutive_only=consecutive_only,
        trace=trace,
        output_dir=output_dir,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"JSON inválido: {exc}") from exc
    return parse_config(document)


def default_document() -> Dict[str, Any]:
    """Documento mínimo (grade 16x16) com todos os padrões explícitos."""
    return parse_config({'topology': {'kind': 'grid'}}).to_document()


def build_graph(config: RunConfig, base_dir: Optional[str] = None) -> NetworkGraph:
    spec = config.topology
    if spec.kind == 'grid':
        qubits = spec.qubits if spec.qubits is not None else UNLIMITED
        return make_grid(spec.side, spec.width, qubits, spec.p, spec.q)
    if spec.kind == 'waxman':
        return make_waxman(spec.n, spec.avg_degree, spec.qubit_range, spec.width_range,
                           spec.E_p, spec.q, spec.seed)
    path = Path(spec.path)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return NetworkGraph.from_document(load_topology_document(str(path)))


def build_schedule(config: RunConfig) -> ParameterSchedule:
    return ParameterSchedule.from_document(config.schedule, horizon=config.slots)


def build_partition(config: RunConfig, graph: NetworkGraph) -> Clustering:
    spec = config.partition
    if spec.kind == 'singletons':
        return Clustering.singletons(graph)
    if spec.kind == 'grid-blocks':
        return Clustering.grid_blocks(graph, spec.block)
    if spec.kind == 'explicit':
        try:
            return Clustering.from_parts(graph, spec.parts)
        except QuarcError as exc:
            raise ConfigError('partition.parts', str(exc)) from exc
    return Clustering.whole(graph)


def load_thresholds(config: RunConfig, base_dir: Optional[str] = None) -> Optional[ThresholdTable]:
    """Tabela de limiares fixa (None para `topology-specific`, que exige calibração)."""
    spec = config.thresholds
    if spec.source == 'file':
        path = Path(spec.path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return ThresholdTable.load(str(path))
    if spec.source == 'topology-specific':
        return None
    return builtin_2d_table()


def grid_thresholds(config: RunConfig) -> ThresholdTable:
    spec = config.thresholds
    return ThresholdTable.load(spec.grid_path) if spec.grid_path else builtin_2d_table()
