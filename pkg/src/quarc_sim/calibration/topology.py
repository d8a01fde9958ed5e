"""
Limiares específicos de topologia: p*, percentil 75 das taxas em regime e tetos.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..clustering.partition import Clustering
from ..clustering.thresholds import ThresholdTable
from ..core.engine import QuarcSimulator, SimulationConfig, run_simulation
from ..exceptions import CalibrationInconclusiveError
from ..topology.network import NetworkGraph, calibrate_alpha
from .grid import Estimate, mean_passing_rate, throughput_estimate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopologyCalibrationSettings:
    slots: int = 5000
    epoch_length: int = 500
    bracket: Tuple[float, float] = (0.05, 0.95)
    max_iterations: int = 20
    batches: int = 10
    stable_epochs: int = 3
    collect_epochs: int = 5
    max_warmup_epochs: int = 60
    percentile: float = 75.0


@dataclass(frozen=True)
class _Comparison:
    E_p: float
    adaptive: Estimate
    singletons: Estimate
    singleton_rate: Optional[float]

    @property
    def gap(self) -> float:
        return self.adaptive.mean - self.singletons.mean


def graph_at(graph: NetworkGraph, E_p: float, q: float) -> NetworkGraph:
    """Rede com α ajustado para média E_p e q uniforme."""
    return graph.with_alpha(calibrate_alpha(graph, E_p)).with_fusion_prob(q)


def _compare(graph: NetworkGraph, grid_table: ThresholdTable, E_p: float, q: float, seed: int,
             settings: TopologyCalibrationSettings) -> _Comparison:
    g = graph_at(graph, E_p, q)
    adaptive = run_simulation(
        g, SimulationConfig(slots=settings.slots, epoch_length=settings.epoch_length, seed=seed),
        thresholds=grid_table,
    )
    singletons = run_simulation(
        g, SimulationConfig(slots=settings.slots, epoch_length=settings.epoch_length, mode='static', seed=seed),
        initial=Clustering.singletons(g),
    )
    result = _Comparison(
        E_p,
        throughput_estimate(adaptive, settings.batches),
        throughput_estimate(singletons, settings.batches),
        mean_passing_rate(singletons),
    )
    logger.info(
        f"E_p={E_p:.4f}: adaptativo {result.adaptive.mean:.4f} ± {result.adaptive.half_width:.4f}, "
        f"singletons {result.singletons.mean:.4f} ± {result.singletons.half_width:.4f}"
    )
    return result


def nearest_rank_percentile(values: List[float], percentile: float) -> float:
    """Percentil por posto mais próximo (sempre um dos valores observados)."""
    if not values:
        raise CalibrationInconclusiveError("Nenhuma taxa de passagem coletada em regime")
    ordered = sorted(values)
    rank = max(1, math.ceil(percentile / 100.0 * len(ordered)))
    return ordered[rank - 1]


def steady_state_rates(graph: NetworkGraph, grid_table: ThresholdTable, seed: int,
                       settings: TopologyCalibrationSettings) -> List[float]:
    """Roda o modo adaptativo até o perfil de tamanhos se repetir e coleta as taxas seguintes."""
    config = SimulationConfig(
        slots=settings.epoch_length * (settings.max_warmup_epochs + settings.collect_epochs),
        epoch_length=settings.epoch_length, seed=seed,
    )
    simulator = QuarcSimulator(graph, config, thresholds=grid_table)

    profiles = [simulator.clustering.size_profile()]
    while True:
        simulator.run_epoch()
        profiles.append(simulator.clustering.size_profile())
        recent = profiles[-(settings.stable_epochs + 1):]
        if len(recent) == settings.stable_epochs + 1 and len(set(recent)) == 1:
            break
        if simulator.epoch >= settings.max_warmup_epochs:
            logger.warning(f"Regime estacionário não atingido em {simulator.epoch} épocas; coletando assim mesmo")
            break
    logger.info(f"Regime estacionário na época {simulator.epoch} com {len(simulator.clustering)} clusters")

    first = simulator.epoch
    for _ in range(settings.collect_epochs):
        simulator.run_epoch()
    return [r.rate for r in simulator.log.epochs if r.epoch >= first and r.rate is not None]


def derive_topology_thresholds(graph: NetworkGraph, grid_table: ThresholdTable, q: float, seed: int = 0,
                               settings: Optional[TopologyCalibrationSettings] = None) -> ThresholdTable:
    """Refina os limiares da grade para uma topologia.

    1. bisseção em E_p até a vazão do modo adaptativo empatar (CIs sobrepostos)
       com a de clusters unitários estáticos;
    2. G_t = percentil 75 das taxas em regime em p*; teto de split = min(G_t, split da grade);
    3. teto de merge = taxa média dos clusters unitários em p*.
    """
    settings = settings or TopologyCalibrationSettings()
    low, high = settings.bracket
    at_low = _compare(graph, grid_table, low, q, seed, settings)
    at_high = _compare(graph, grid_table, high, q, seed, settings)
    if at_low.gap * at_high.gap > 0:
        raise CalibrationInconclusiveError(
            f"Diferença de vazão com o mesmo sinal em E_p={low} e E_p={high}; p* fora do intervalo"
        )

    found: Optional[_Comparison] = None
    for iteration in range(1, settings.max_iterations + 1):
        mid = (low + high) / 2
        current = _compare(graph, grid_table, mid, q, seed, settings)
        if current.adaptive.overlaps(current.singletons):
            found = current
            logger.info(f"p* = {mid:.4f} após {iteration} iterações")
            break
        if (current.gap > 0) == (at_low.gap > 0):
            low, at_low = mid, current
        else:
            high, at_high = mid, current
    if found is None:
        raise CalibrationInconclusiveError(
            f"Bisseção não encontrou empate dentro do CI em {settings.max_iterations} iterações"
        )

    rates = steady_state_rates(graph_at(graph, found.E_p, q), grid_table, seed, settings)
    g_t = nearest_rank_percentile(rates, settings.percentile)
    merge_cap = found.singleton_rate
    logger.info(f"G_t = {g_t:.4f}, taxa média dos singletons = {merge_cap}")

    return grid_table.capped(
        split_cap=g_t,
        merge_cap=merge_cap,
        source={
            'kind': 'topology-specific',
            'p_star': found.E_p,
            'iterations': iteration,
            'G_t': g_t,
            'singleton_rate': merge_cap,
            'steady_state_samples': len(rates),
            'seed': seed,
            'q': q,
            'network_size': len(graph),
            'mean_rate': float(np.mean(rates)),
        },
    )
