"""
Agendas de parâmetros físicos variando no tempo e no espaço.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..exceptions import ConfigError
from .network import NetworkGraph, calibrate_alpha

logger = logging.getLogger(__name__)


def _check_prob(value: Optional[float], key: str):
    if value is not None and not 0.0 <= value <= 1.0:
        raise ConfigError(key, f"probabilidade fora de [0,1]: {value}")


@dataclass(frozen=True)
class RegionOverride:
    """Região retangular [x_min, x_max) x [y_min, y_max) com p próprio."""
    p: float
    x_min: float = -math.inf
    x_max: float = math.inf
    y_min: float = -math.inf
    y_max: float = math.inf

    def contains(self, position: Tuple[float, float]) -> bool:
        x, y = position
        return self.x_min <= x < self.x_max and self.y_min <= y < self.y_max

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {'p': self.p}
        for key in ('x_min', 'x_max', 'y_min', 'y_max'):
            value = getattr(self, key)
            if math.isfinite(value):
                doc[key] = value
        return doc


@dataclass(frozen=True)
class Overrides:
    """Sobrescritas ativas a partir de um slot."""
    p: Optional[float] = None
    q: Optional[float] = None
    E_p: Optional[float] = None
    regions: Tuple[RegionOverride, ...] = ()

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {}
        for key in ('p', 'q', 'E_p'):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        if self.regions:
            doc['regions'] = [r.to_document() for r in self.regions]
        return doc


@dataclass(frozen=True)
class ScheduleEntry:
    start_slot: int
    overrides: Overrides


class ParameterView:
    """Parâmetros efetivos num slot; a topologia base não é alterada."""

    def __init__(self, graph: NetworkGraph, overrides: Optional[Overrides] = None):
        self.graph = graph
        self.overrides = overrides or Overrides()
        self._channel_probs: Dict[int, Tuple[float, ...]] = {}
        self._fusion_probs: Dict[int, float] = {}
        self._resolve()

    def _resolve(self):
        ov = self.overrides
        edges = self.graph.edges.values()

        if ov.E_p is not None:
            alpha = calibrate_alpha(self.graph, ov.E_p)
            probs = {e.id: tuple([math.exp(-alpha * e.length)] * e.width) for e in edges}
        else:
            probs = {e.id: e.channel_probs for e in edges}

        if ov.p is not None:
            probs = {e.id: tuple([ov.p] * e.width) for e in edges}

        # Região vale só para arestas com os dois extremos dentro dela
        for region in ov.regions:
            for e in edges:
                if (region.contains(self.graph.nodes[e.u].position)
                        and region.contains(self.graph.nodes[e.v].position)):
                    probs[e.id] = tuple([region.p] * e.width)

        self._channel_probs = probs
        self._fusion_probs = {
            n.id: ov.q if ov.q is not None else n.fusion_prob for n in self.graph.nodes.values()
        }

    def channel_probs(self, edge_id: int) -> Tuple[float, ...]:
        return self._channel_probs[edge_id]

    def channel_prob(self, edge_id: int, index: int) -> float:
        return self._channel_probs[edge_id][index]

    def fusion_prob(self, node: int) -> float:
        return self._fusion_probs[node]

    def mean_channel_prob(self) -> float:
        probs = [p for ps in self._channel_probs.values() for p in ps]
        return sum(probs) / len(probs) if probs else 0.0


class ParameterSchedule:
    """Sequência de (start_slot, overrides) ordenada estritamente."""

    def __init__(self, entries: Sequence[ScheduleEntry] = ()):
        self.entries: Tuple[ScheduleEntry, ...] = tuple(entries)
        starts = [e.start_slot for e in self.entries]
        if any(s < 0 for s in starts):
            raise ConfigError('schedule', "start_slot deve ser não-negativo")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError('schedule', "start_slot deve ser estritamente crescente")
        for i, entry in enumerate(self.entries):
            ov = entry.overrides
            _check_prob(ov.p, f'schedule[{i}].overrides.p')
            _check_prob(ov.q, f'schedule[{i}].overrides.q')
            if ov.E_p is not None and not 0.0 < ov.E_p < 1.0:
                raise ConfigError(f'schedule[{i}].overrides.E_p', "E_p deve estar em (0,1)")
            for j, region in enumerate(ov.regions):
                _check_prob(region.p, f'schedule[{i}].overrides.regions[{j}].p')
        self._starts = starts
        self._views: Dict[Tuple[int, int], ParameterView] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def active_index(self, slot: int) -> Optional[int]:
        """Índice da última entrada com start_slot <= slot."""
        idx = bisect.bisect_right(self._starts, slot) - 1
        return idx if idx >= 0 else None

    def view(self, graph: NetworkGraph, slot: int) -> ParameterView:
        idx = self.active_index(slot)
        key = (id(graph), -1 if idx is None else idx)
        view = self._views.get(key)
        if view is None or view.graph is not graph:
            overrides = self.entries[idx].overrides if idx is not None else None
            view = ParameterView(graph, overrides)
            self._views[key] = view
            if idx is not None:
                logger.debug(f"Agenda: entrada {idx} ativa a partir do slot {self._starts[idx]}")
        return view

    def change_points(self) -> List[int]:
        return list(self._starts)

    def to_document(self) -> List[Dict[str, Any]]:
        return [{'start_slot': e.start_slot, 'overrides': e.overrides.to_document()} for e in self.entries]

    @classmethod
    def from_document(cls, document: Any, horizon: Optional[int] = None) -> "ParameterSchedule":
        """Aceita lista de entradas ou {"preset": nome, ...}."""
        if document is None:
            return cls()
        if isinstance(document, dict):
            return preset_schedule(document, horizon)
        if not isinstance(document, list):
            raise ConfigError('schedule', "esperado lista de entradas ou objeto com 'preset'")

        entries = []
        for i, item in enumerate(document):
            if not isinstance(item, dict) or 'start_slot' not in item:
                raise ConfigError(f'schedule[{i}]', "entrada precisa de 'start_slot'")
            unknown = set(item) - {'start_slot', 'overrides'}
            if unknown:
                raise ConfigError(f'schedule[{i}].{sorted(unknown)[0]}', "chave desconhecida")
            ov = item.get('overrides', {})
            unknown = set(ov) - {'p', 'q', 'E_p', 'regions'}
            if unknown:
                raise ConfigError(f'schedule[{i}].overrides.{sorted(unknown)[0]}', "chave desconhecida")
            regions = []
            for j, reg in enumerate(ov.get('regions', [])):
                unknown = set(reg) - {'p', 'x_min', 'x_max', 'y_min', 'y_max'}
                if unknown or 'p' not in reg:
                    raise ConfigError(f'schedule[{i}].overrides.regions[{j}]', "região precisa de 'p' e limites válidos")
                regions.append(RegionOverride(**{k: float(v) for k, v in reg.items()}))
            entries.append(ScheduleEntry(
                int(item['start_slot']),
                Overrides(ov.get('p'), ov.get('q'), ov.get('E_p'), tuple(regions)),
            ))
        return cls(entries)


def apply_schedule(graph: NetworkGraph, schedule: ParameterSchedule, slot: int) -> ParameterView:
    """Parâmetros efetivos no slot (agenda vazia = parâmetros base)."""
    return schedule.view(graph, slot)


# Sequência (p, q) de mudanças abruptas
SHIFT_SEQUENCE: Tuple[Tuple[float, float], ...] = ((0.7, 0.8), (0.6, 1.0), (0.8, 0.7), (0.5, 0.9), (0.9, 0.7))


def shift_schedule(pairs: Sequence[Tuple[float, float]] = SHIFT_SEQUENCE, period: int = 5000) -> ParameterSchedule:
    """(p, q) mudam abruptamente a cada `period` slots."""
    return ParameterSchedule([
        ScheduleEntry(i * period, Overrides(p=p, q=q)) for i, (p, q) in enumerate(pairs)
    ])


def decay_schedule(start: float = 0.9, stop: float = 0.5, step: float = 0.01,
                   period: int = 400) -> ParameterSchedule:
    """p decresce de `start` a `stop` em passos de `step` a cada `period` slots."""
    count = int(round((start - stop) / step)) + 1
    return ParameterSchedule([
        ScheduleEntry(i * period, Overrides(p=round(start - i * step, 10))) for i in range(count)
    ])


def oscillation_schedule(low: float = 0.6, high: float = 0.9, period: int = 400,
                         horizon: int = 10000) -> ParameterSchedule:
    """p alterna entre `low` e `high` a cada `period` slots até `horizon`."""
    return ParameterSchedule([
        ScheduleEntry(start, Overrides(p=low if i % 2 == 0 else high))
        for i, start in enumerate(range(0, max(horizon, 1), period))
    ])


def half_plane_schedule(upper_p: float = 0.6, lower_p: float = 0.3, split_y: float = 0.5) -> ParameterSchedule:
    """p diferente nas metades superior e inferior do plano."""
    return ParameterSchedule([
        ScheduleEntry(0, Overrides(regions=(
            RegionOverride(p=upper_p, y_min=split_y),
            RegionOverride(p=lower_p, y_max=split_y),
        ))),
    ])


PRESETS = {
    'shift': shift_schedule,
    'decay': decay_schedule,
    'oscillation': oscillation_schedule,
    'half-plane': half_plane_schedule,
}


def preset_schedule(document: Dict[str, Any], horizon: Optional[int] = None) -> ParameterSchedule:
    params = dict(document)
    name = params.pop('preset', None)
    if name not in PRESETS:
        raise ConfigError('schedule.preset', f"preset desconhecido: {name} (opções: {', '.join(PRESETS)})")
    if name == 'shift' and 'pairs' in params:
        params['pairs'] = [tuple(pq) for pq in params['pairs']]
    if name == 'oscillation' and horizon is not None:
        params.setdefault('horizon', horizon)
    try:
        return PRESETS[name](**params)
    except TypeError as exc:
        raise ConfigError(f'schedule.{name}', f"parâmetros inválidos: {exc}") from exc
