"""
Varredura de clusterizações estáticas em grade e derivação dos limiares 2-D.
"""

import csv
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..clustering.partition import Clustering
from ..clustering.thresholds import ThresholdTable
from ..core.engine import SimulationConfig, run_simulation
from ..core.metrics import MetricsLog
from ..exceptions import CalibrationInconclusiveError, DomainError
from ..topology.network import make_grid

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['p', 'config', 'cluster_size', 'mean', 'ci_low', 'ci_high', 'passing_rate', 'samples']


@dataclass(frozen=True)
class Estimate:
    """Média com intervalo de confiança de 95% (t de Student)."""
    mean: float
    half_width: float
    samples: int

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def overlaps(self, other: "Estimate") -> bool:
        return self.low <= other.high and other.low <= self.high

    def above(self, other: "Estimate") -> bool:
        """CI inteiramente acima do CI de `other`."""
        return self.low > other.high


def confidence_interval(samples: Sequence[float], level: float = 0.95) -> Estimate:
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        return Estimate(0.0, 0.0, 0)
    mean = float(values.mean())
    if values.size < 2:
        return Estimate(mean, 0.0, 1)
    sem = float(values.std(ddof=1) / np.sqrt(values.size))
    return Estimate(mean, float(stats.t.ppf(0.5 + level / 2, values.size - 1) * sem), int(values.size))


def batch_means(series: Sequence[float], batches: int = 10) -> Estimate:
    """CI a partir das médias de `batches` lotes contíguos da série."""
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        return Estimate(0.0, 0.0, 0)
    chunks = np.array_split(values, min(batches, values.size))
    return confidence_interval([chunk.mean() for chunk in chunks])


def throughput_estimate(log: MetricsLog, batches: int = 10) -> Estimate:
    return batch_means([s.satisfied for s in log.slots], batches)


def mean_passing_rate(log: MetricsLog, size: Optional[int] = None) -> Optional[float]:
    """Média das taxas de passagem por cluster e época (opcionalmente só de um tamanho)."""
    rates = [r.rate for r in log.epochs if r.rate is not None and (size is None or r.size == size)]
    return float(np.mean(rates)) if rates else None


@dataclass(frozen=True)
class SweepPoint:
    p: float
    config: int
    mean: float
    ci_low: float
    ci_high: float
    passing_rate: Optional[float]
    samples: int

    @property
    def cluster_size(self) -> int:
        return self.config * self.config

    @property
    def estimate(self) -> Estimate:
        return Estimate(self.mean, (self.ci_high - self.ci_low) / 2, self.samples)


@dataclass
class SweepResult:
    """Pontos (p, lado do bloco) -> vazão média com CI e taxa de passagem média."""
    side: int
    q: float
    points: List[SweepPoint] = field(default_factory=list)

    def p_values(self) -> List[float]:
        return sorted({pt.p for pt in self.points})

    def configs(self) -> List[int]:
        return sorted({pt.config for pt in self.points})

    def point(self, p: float, config: int) -> SweepPoint:
        for pt in self.points:
            if pt.p == p and pt.config == config:
                return pt
        raise KeyError((p, config))

    def best_config(self, p: float) -> int:
        """Config com maior vazão média (empate: menor bloco)."""
        candidates = [pt for pt in self.points if pt.p == p]
        return max(candidates, key=lambda pt: (pt.mean, -pt.config)).config

    def to_csv(self, path: str):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(SWEEP_COLUMNS)
            for pt in self.points:
                writer.writerow([
                    pt.p, pt.config, pt.cluster_size, f"{pt.mean:.6f}", f"{pt.ci_low:.6f}",
                    f"{pt.ci_high:.6f}", '' if pt.passing_rate is None else f"{pt.passing_rate:.6f}",
                    pt.samples,
                ])
        logger.info(f"Varredura salva em {path}")

    @classmethod
    def from_csv(cls, path: str, side: int = 0, q: float = 0.0) -> "SweepResult":
        result = cls(side, q)
        with open(path, 'r', newline='', encoding='utf-8') as f:
            for row in csv.DictReader(f):
                result.points.append(SweepPoint(
                    float(row['p']), int(row['config']), float(row['mean']),
                    float(row['ci_low']), float(row['ci_high']),
                    float(row['passing_rate']) if row['passing_rate'] else None,
                    int(row['samples']),
                ))
        return result


@dataclass(frozen=True)
class _PointJob:
    side: int
    q: float
    p: float
    config: int
    seed: int
    slots: int
    epoch_length: int
    qubits: int
    queue_capacity: int


def _run_point(job: _PointJob) -> Tuple[float, int, List[float], Optional[float]]:
    graph = make_grid(job.side, width=1, qubits_per_node=job.qubits, p=job.p, q=job.q)
    config = SimulationConfig(
        slots=job.slots, epoch_length=job.epoch_length, queue_capacity=job.queue_capacity,
        mode='static', seed=job.seed,
    )
    log = run_simulation(graph, config, initial=Clustering.grid_blocks(graph, job.config))
    return job.p, job.config, [s.satisfied for s in log.slots], mean_passing_rate(log)


def sweep_static_grid(side: int, q: float, p_values: Sequence[float], configs: Sequence[int],
                      slots_per_point: int, seed: int = 0, seeds: Optional[Sequence[int]] = None,
                      batches: int = 10, jobs: int = 1, epoch_length: int = 500,
                      qubits: int = 4, queue_capacity: int = 10) -> SweepResult:
    """Vazão de cada bloco quadrado estático para cada p.

    Com uma semente o CI vem de médias por lote; com várias, das médias por semente.
    """
    for config in configs:
        if config < 1 or side % config:
            raise DomainError(f"Bloco {config} não divide o lado da grade {side}")
    seed_list = list(seeds) if seeds else [seed]
    work = [
        _PointJob(side, q, float(p), int(c), int(s), slots_per_point, epoch_length, qubits, queue_capacity)
        for p in sorted(p_values) for c in sorted(configs) for s in seed_list
    ]
    logger.info(f"Varredura: {len(p_values)} valores de p x {len(configs)} configs x {len(seed_list)} sementes")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, work))
    else:
        results = [_run_point(job) for job in work]

    grouped: Dict[Tuple[float, int], List[Tuple[List[float], Optional[float]]]] = defaultdict(list)
    for p, config, series, rate in results:
        grouped[(p, config)].append((series, rate))

    sweep = SweepResult(side, q)
    for (p, config) in sorted(grouped):
        runs = grouped[(p, config)]
        if len(runs) > 1:
            estimate = confidence_interval([np.mean(series) if series else 0.0 for series, _ in runs])
        else:
            estimate = batch_means(runs[0][0], batches)
        rates = [r for _, r in runs if r is not None]
        sweep.points.append(SweepPoint(
            p, config, estimate.mean, estimate.low, estimate.high,
            float(np.mean(rates)) if rates else None, estimate.samples,
        ))
        logger.debug(f"p={p:.3f} bloco={config}: vazão {estimate.mean:.4f} ± {estimate.half_width:.4f}")
    return sweep


def _interpolated(a: float, b: float, t: float) -> float:
    return a + (b - a) * t


def _separated_side(sweep: SweepResult, p_values: List[float], indices: Sequence[int],
                    winner: int, loser: int) -> bool:
    """Algum p do lado indicado tem o CI do vencedor acima do CI do perdedor."""
    for i in indices:
        p = p_values[i]
        if sweep.point(p, winner).estimate.above(sweep.point(p, loser).estimate):
            return True
    return False


def derive_2d_thresholds(sweep: SweepResult, network_size: Optional[int] = None) -> ThresholdTable:
    """Limiares a partir das transições de configuração ótima.

    Em cada cruzamento entre blocos s_pequeno < s_grande, o limiar de split de
    s_grande e o de merge de s_pequeno são as taxas de passagem médias desses
    clusters no p do cruzamento.
    """
    p_values = sweep.p_values()
    configs = sweep.configs()
    if len(configs) < 2 or len(p_values) < 2:
        raise CalibrationInconclusiveError("Varredura precisa de >= 2 configs e >= 2 valores de p")

    split_knots: Dict[int, List[float]] = defaultdict(list)
    merge_knots: Dict[int, List[float]] = defaultdict(list)
    crossings = []

    for i in range(len(p_values) - 1):
        p_a, p_b = p_values[i], p_values[i + 1]
        before, after = sweep.best_config(p_a), sweep.best_config(p_b)
        if before == after:
            continue
        if not (_separated_side(sweep, p_values, range(i, -1, -1), before, after)
                and _separated_side(sweep, p_values, range(i + 1, len(p_values)), after, before)):
            logger.warning(f"Cruzamento {before}->{after} entre p={p_a} e p={p_b} sem separação de CI; ignorado")
            continue

        # p do cruzamento por interpolação linear da diferença das médias
        gap_a = sweep.point(p_a, before).mean - sweep.point(p_a, after).mean
        gap_b = sweep.point(p_b, before).mean - sweep.point(p_b, after).mean
        t = gap_a / (gap_a - gap_b) if gap_a != gap_b else 0.5
        t = min(max(t, 0.0), 1.0)

        small, big = sorted((before, after))
        rates = {}
        for config in (small, big):
            ra, rb = sweep.point(p_a, config).passing_rate, sweep.point(p_b, config).passing_rate
            if ra is None or rb is None:
                rates[config] = ra if rb is None else rb
            else:
                rates[config] = _interpolated(ra, rb, t)
        if rates[small] is None or rates[big] is None:
            logger.warning(f"Cruzamento {small}/{big} sem taxas de passagem; ignorado")
            continue

        split_knots[big * big].append(rates[big])
        merge_knots[small * small].append(rates[small])
        crossings.append({'p': _interpolated(p_a, p_b, t), 'small': small, 'big': big})
        logger.info(f"Cruzamento em p≈{crossings[-1]['p']:.3f}: blocos {small} e {big}")

    if not crossings:
        raise CalibrationInconclusiveError("Nenhum cruzamento com CIs separados na varredura")

    split = sorted((size, float(np.mean(v))) for size, v in split_knots.items())
    merge_raw = sorted((size, float(np.mean(v))) for size, v in merge_knots.items())

    split_sizes = [s for s, _ in split]
    split_values = [t for _, t in split]
    merge = []
    for size, value in merge_raw:
        cap = float(np.interp(size, split_sizes, split_values))
        if value > cap:
            logger.warning(f"Merge {value:.3f} > split {cap:.3f} no tamanho {size}; limitado ao split")
        merge.append((size, min(value, cap)))
    # Knots de split também podem ficar abaixo do merge interpolado
    merge_sizes = [s for s, _ in merge]
    merge_values = [t for _, t in merge]
    split = [(s, max(t, float(np.interp(s, merge_sizes, merge_values)))) for s, t in split]

    return ThresholdTable.single(
        split, merge,
        network_size=network_size if network_size is not None else (sweep.side * sweep.side or None),
        source={'kind': 'grid-sweep', 'side': sweep.side, 'q': sweep.q, 'crossings': crossings},
    )
