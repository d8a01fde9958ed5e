"""
Trace em JSON lines das decisões de roteamento e da percolação.
"""

import json
import logging
from pathlib import Path
from typing import IO, Iterable, List, Optional

from ..exceptions import ConfigError
from ..percolation.fusion import SlotOutcome
from ..routing.paths import PathSelection, Request

logger = logging.getLogger(__name__)

TRACE_LEVELS = ('none', 'routing', 'full')


class TraceWriter:
    """Uma linha JSON por slot.

    - routing: fila em ordem FIFO, caminhos escolhidos e pedidos pulados
    - full: também links, fusões e passagens de cada pedido atendido
    """

    def __init__(self, path: Optional[str], level: str = 'none'):
        if level not in TRACE_LEVELS:
            raise ConfigError('trace', f"nível inválido: {level} (opções: {', '.join(TRACE_LEVELS)})")
        self.level = level
        self.path = Path(path) if path else None
        self._handle: Optional[IO[str]] = None
        if self.enabled:
            if self.path is None:
                raise ConfigError('trace', "trace habilitado sem caminho de saída")
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(self.path, 'w', encoding='utf-8')
            logger.info(f"Trace ({level}) em {self.path}")

    @property
    def enabled(self) -> bool:
        return self.level != 'none'

    def slot(self, slot: int, queue: Iterable[Request], selection: PathSelection,
             outcomes: List[SlotOutcome]):
        if self._handle is None:
            return
        entry = {
            'slot': slot,
            'queue': [r.id for r in sorted(queue, key=lambda r: (r.arrival_slot, r.id))],
            'paths': [{'request': p.request_id, 'clusters': list(p.clusters)} for p in selection.paths],
            'skipped': selection.skipped,
            'satisfied': [o.request_id for o in outcomes if o.success],
        }
        if self.level == 'full':
            entry['outcomes'] = [o.to_trace() for o in outcomes]
        self._handle.write(json.dumps(entry, separators=(',', ':')) + '\n')

    def epoch(self, epoch: int, slot: int, clusters: int):
        if self._handle is None:
            return
        self._handle.write(json.dumps({'epoch': epoch, 'slot': slot, 'clusters': clusters}) + '\n')

    def close(self):
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path: str) -> List[dict]:
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]
