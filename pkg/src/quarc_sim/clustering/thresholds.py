"""
Tabelas de limiares de merge/split por tamanho de cluster (e tamanho de rede).
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ThresholdTableError

logger = logging.getLogger(__name__)

Knots = Tuple[Tuple[int, float], ...]


def _check_knots(points: Sequence[Tuple[int, float]], label: str) -> Knots:
    knots = tuple((int(s), float(t)) for s, t in points)
    if not knots:
        raise ThresholdTableError(f"{label}: tabela vazia")
    sizes = [s for s, _ in knots]
    if any(s < 1 for s in sizes):
        raise ThresholdTableError(f"{label}: tamanhos de cluster devem ser positivos")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ThresholdTableError(f"{label}: tamanhos devem ser estritamente crescentes")
    if any(not 0.0 <= t <= 1.0 for _, t in knots):
        raise ThresholdTableError(f"{label}: limiares devem estar em [0,1]")
    return knots


def _interp(knots: Knots, size: float) -> float:
    xs = [s for s, _ in knots]
    ys = [t for _, t in knots]
    # np.interp é constante fora do intervalo (clamp)
    return float(np.interp(size, xs, ys))


@dataclass(frozen=True)
class ThresholdLayer:
    """Limiares para um tamanho de rede (uma grade N x N)."""
    network_size: Optional[int]
    split_points: Knots
    merge_points: Knots

    def lookup(self, cluster_size: float) -> Tuple[float, float]:
        return _interp(self.merge_points, cluster_size), _interp(self.split_points, cluster_size)

    def knot_sizes(self) -> List[int]:
        return sorted({s for s, _ in self.split_points} | {s for s, _ in self.merge_points})


@dataclass(frozen=True)
class ThresholdTable:
    """Limiares lineares por partes; eixo opcional de tamanho de rede."""
    layers: Tuple[ThresholdLayer, ...]
    source: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.layers:
            raise ThresholdTableError("Tabela de limiares sem camadas")
        sizes = [layer.network_size for layer in self.layers]
        if len(self.layers) > 1:
            if any(s is None for s in sizes):
                raise ThresholdTableError("Com várias camadas, todas precisam de network_size")
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ThresholdTableError("network_sizes devem ser estritamente crescentes")
        for layer in self.layers:
            # Lineares entre nós da união: basta checar nos nós
            for size in layer.knot_sizes():
                merge, split = layer.lookup(size)
                if merge > split + 1e-12:
                    raise ThresholdTableError(
                        f"merge ({merge:.3f}) > split ({split:.3f}) no tamanho {size}"
                        f" (rede {layer.network_size})"
                    )

    @classmethod
    def single(cls, split_points: Sequence[Tuple[int, float]], merge_points: Sequence[Tuple[int, float]],
               network_size: Optional[int] = None, source: Optional[Dict[str, Any]] = None) -> "ThresholdTable":
        layer = ThresholdLayer(
            network_size,
            _check_knots(split_points, 'split'),
            _check_knots(merge_points, 'merge'),
        )
        return cls((layer,), dict(source or {}))

    @property
    def network_sizes(self) -> List[Optional[int]]:
        return [layer.network_size for layer in self.layers]

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            'network_sizes': self.network_sizes,
            'split': [[list(p) for p in layer.split_points] for layer in self.layers],
            'merge': [[list(p) for p in layer.merge_points] for layer in self.layers],
        }
        if self.source:
            doc['source'] = self.source
        return doc

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "ThresholdTable":
        try:
            split = document['split']
            merge = document['merge']
            sizes = document.get('network_sizes')
            # Forma simples: uma única camada [[tamanho, limiar], ...]
            if split and not isinstance(split[0][0], (list, tuple)):
                split, merge = [split], [merge]
            if sizes is None:
                sizes = [None] * len(split)
            if not (len(sizes) == len(split) == len(merge)):
                raise ThresholdTableError("network_sizes, split e merge com comprimentos diferentes")
            layers = tuple(
                ThresholdLayer(
                    None if size is None else int(size),
                    _check_knots(s, f'split[{i}]'),
                    _check_knots(m, f'merge[{i}]'),
                )
                for i, (size, s, m) in enumerate(zip(sizes, split, merge))
            )
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ThresholdTableError(f"Documento de limiares malformado: {exc}") from exc
        return cls(layers, dict(document.get('source', {})))

    def save(self, path: str):
        Path(path).write_text(json.dumps(self.to_document(), indent=2), encoding='utf-8')
        logger.info(f"Limiares salvos em {path}")

    @classmethod
    def load(cls, path: str) -> "ThresholdTable":
        with open(path, 'r', encoding='utf-8') as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as exc:
                raise ThresholdTableError(f"{path}: JSON inválido ({exc})") from exc
        return cls.from_document(document)

    def capped(self, split_cap: Optional[float] = None, merge_cap: Optional[float] = None,
               source: Optional[Dict[str, Any]] = None) -> "ThresholdTable":
        """Nova tabela com limiares limitados por tetos uniformes (merge <= split preservado)."""
        layers = []
        for layer in self.layers:
            split = tuple(
                (s, min(t, split_cap) if split_cap is not None else t) for s, t in layer.split_points
            )
            split_knots = _check_knots(split, 'split')
            merge = []
            for size in layer.knot_sizes():
                value = _interp(layer.merge_points, size)
                if merge_cap is not None:
                    value = min(value, merge_cap)
                merge.append((size, min(value, _interp(split_knots, size))))
            layers.append(ThresholdLayer(layer.network_size, split_knots, _check_knots(merge, 'merge')))
        merged_source = dict(self.source)
        merged_source.update(source or {})
        return ThresholdTable(tuple(layers), merged_source)


def threshold_lookup(table: ThresholdTable, cluster_size: int, network_size: int) -> Tuple[float, float]:
    """(merge, split) interpolados por tamanho de cluster e de rede."""
    if len(table.layers) == 1:
        return table.layers[0].lookup(cluster_size)

    sizes = [layer.network_size for layer in table.layers]
    values = [layer.lookup(cluster_size) for layer in table.layers]
    merge = float(np.interp(network_size, sizes, [m for m, _ in values]))
    split = float(np.interp(network_size, sizes, [s for _, s in values]))
    return merge, split


# Limiares padrão para grades 8x8 e 16x16; `calibrate-grid` gera tabelas novas
BUILTIN_2D_DOCUMENT: Dict[str, Any] = {
    'network_sizes': [64, 256],
    'split': [
        [[4, 0.70], [16, 0.80], [64, 0.90]],
        [[4, 0.65], [16, 0.75], [64, 0.85], [256, 0.90]],
    ],
    'merge': [
        [[1, 0.30], [4, 0.45], [16, 0.60], [64, 0.70]],
        [[1, 0.25], [4, 0.40], [16, 0.55], [64, 0.65], [256, 0.75]],
    ],
    'source': {'kind': 'builtin-2d'},
}


def builtin_2d_table() -> ThresholdTable:
    return ThresholdTable.from_document(BUILTIN_2D_DOCUMENT)
