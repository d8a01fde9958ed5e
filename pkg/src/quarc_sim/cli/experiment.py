"""
Orquestração de experimentos: execução, artefatos em disco, manifesto e sweeps.
"""

import csv
import hashlib
import json
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx
import numpy as np
import scipy

from .. import __version__
from ..calibration.topology import derive_topology_thresholds
from ..config.run_config import (RunConfig, build_graph, build_partition, build_schedule,
                                 grid_thresholds, load_thresholds)
from ..core.engine import run_simulation
from ..core.metrics import summarize
from ..core.trace import TraceWriter
from ..database.models import RunRecord, RunRegistry
from ..exceptions import ConfigError
from ..topology.network import save_topology

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS = ['config', 'metric', 'seeds', 'mean', 'sem']
AGGREGATE_METRICS = ('throughput', 'latency_mean', 'starvation')


def config_hash(document: Dict[str, Any]) -> str:
    """SHA-256 do documento canônico (chaves ordenadas, sem output_dir)."""
    canonical = {k: v for k, v in document.items() if k != 'output_dir'}
    payload = json.dumps(canonical, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


def library_versions() -> Dict[str, str]:
    return {
        'quarc_sim': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'networkx': networkx.__version__,
        'scipy': scipy.__version__,
    }


def write_json(path: Path, document: Any):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, ensure_ascii=False, default=str), encoding='utf-8')


def parse_seeds(tokens: Sequence[str]) -> List[int]:
    """Aceita '1..10', '1,2,3' ou inteiros soltos."""
    seeds: List[int] = []
    for token in tokens:
        for part in str(token).split(','):
            part = part.strip()
            if not part:
                continue
            try:
                if '..' in part:
                    start, stop = part.split('..', 1)
                    seeds.extend(range(int(start), int(stop) + 1))
                else:
                    seeds.append(int(part))
            except ValueError as exc:
                raise ConfigError('seeds', f"semente inválida: {part}") from exc
    if not seeds or any(s < 0 for s in seeds):
        raise ConfigError('seeds', "informe ao menos uma semente não negativa")
    return seeds


@dataclass
class ExperimentResult:
    status: int
    output_dir: Path
    config_hash: str
    report: Dict[str, Any] = field(default_factory=dict)


def run_experiment(config: RunConfig, output_dir: str, registry: Optional[RunRegistry] = None,
                   base_dir: Optional[str] = None, baseline: bool = False,
                   command: str = 'run') -> ExperimentResult:
    """Executa uma simulação e grava CSVs, relatório, topologia e manifesto."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    document = config.to_document()
    digest = config_hash(document)
    logger.info(f"Execução {digest[:12]} (semente {config.seed}) em {out}")

    graph = build_graph(config, base_dir)
    schedule = build_schedule(config)
    thresholds = load_thresholds(config, base_dir) if config.mode == 'adaptive' else None
    if config.mode == 'adaptive' and thresholds is None:
        q = config.thresholds.q
        if q is None:
            q = float(np.mean([n.fusion_prob for n in graph.nodes.values()]))
        thresholds = derive_topology_thresholds(graph, grid_thresholds(config), q, config.seed)
        thresholds.save(str(out / 'thresholds.json'))

    with TraceWriter(str(out / 'trace.jsonl'), config.trace) as trace:
        log = run_simulation(
            graph, config.simulation_config(), schedule, thresholds,
            build_partition(config, graph), trace if trace.enabled else None,
        )
    log.write_csv(str(out))

    baseline_report = None
    if baseline:
        # Fila de um pedido isola a taxa máxima de sucesso por distância
        single = replace(config.simulation_config(), queue_capacity=1)
        baseline_log = run_simulation(graph, single, schedule, thresholds, build_partition(config, graph))
        baseline_report = summarize(baseline_log)
        write_json(out / 'baseline_report.json', baseline_report)

    report = summarize(log, baseline=baseline_report)
    write_json(out / 'report.json', report)
    save_topology(str(out / 'topology.json'), graph, schedule.to_document() or None)
    write_json(out / 'manifest.json', {
        'command': command,
        'config': document,
        'config_hash': digest,
        'seed': config.seed,
        'versions': library_versions(),
        'created_at': datetime.now().isoformat(timespec='seconds'),
        'artifacts': sorted(p.name for p in out.iterdir() if p.is_file()),
    })

    if registry is not None:
        registry.add_run(RunRecord(
            command=command, config_hash=digest, seed=config.seed, output_dir=str(out),
            slots=config.slots, throughput=report['throughput']['mean'],
        ))
    logger.info(f"Vazão média {report['throughput']['mean']:.4f} pedidos/slot")
    return ExperimentResult(0, out, digest, report)


def _sweep_job(job: Tuple[str, RunConfig, str, Optional[str]]) -> Tuple[str, int, Dict[str, Any]]:
    name, config, output_dir, base_dir = job
    result = run_experiment(config, output_dir, base_dir=base_dir, command='sweep')
    return name, config.seed, result.report


def _sem(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def report_metrics(report: Dict[str, Any]) -> Dict[str, Optional[float]]:
    return {
        'throughput': report['throughput']['mean'],
        'latency_mean': report['latency']['mean'],
        'starvation': report['starvation'],
    }


def aggregate_reports(reports: Dict[str, List[Dict[str, Any]]]) -> List[Dict[str, Any]]:
    """Média e desvio padrão da média por (config, métrica)."""
    rows = []
    for name in sorted(reports):
        per_seed = [report_metrics(r) for r in reports[name]]
        for metric in AGGREGATE_METRICS:
            values = [m[metric] for m in per_seed if m[metric] is not None]
            rows.append({
                'config': name,
                'metric': metric,
                'seeds': len(values),
                'mean': float(np.mean(values)) if values else None,
                'sem': _sem(values) if values else None,
            })
    return rows


def run_sweep(configs: Sequence[Tuple[str, RunConfig, Optional[str]]], seeds: Sequence[int],
              output_dir: str, jobs: int = 1, registry: Optional[RunRegistry] = None) -> Path:
    """Executa cada (config, semente) em paralelo e grava aggregate.csv."""
    out = Path(output_dir)
    names = [name for name, _, _ in configs]
    if len(set(names)) != len(names):
        raise ConfigError('configs', "nomes de configuração repetidos no sweep")
    work = [
        (name, config.with_overrides(seed=seed), str(out / name / f"seed-{seed}"), base_dir)
        for name, config, base_dir in configs for seed in seeds
    ]
    logger.info(f"Sweep: {len(configs)} configs x {len(seeds)} sementes ({jobs} jobs)")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_job, work))
    else:
        results = [_sweep_job(job) for job in work]

    reports: Dict[str, List[Dict[str, Any]]] = {}
    for name, seed, report in sorted(results, key=lambda r: (r[0], r[1])):
        reports.setdefault(name, []).append(report)
        if registry is not None:
            config = next(c for n, c, _ in configs if n == name).with_overrides(seed=seed)
            registry.add_run(RunRecord(
                command='sweep', config_hash=config_hash(config.to_document()), seed=seed,
                output_dir=str(out / name / f"seed-{seed}"), slots=config.slots,
                throughput=report['throughput']['mean'],
            ))

    path = out / 'aggregate.csv'
    out.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=AGGREGATE_COLUMNS)
        writer.writeheader()
        for row in aggregate_reports(reports):
            writer.writerow({k: '' if v is None else v for k, v in row.items()})
    logger.info(f"Agregado do sweep em {path}")
    return path
