"""
Interface de linha de comando principal do quarc-sim.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..calibration.grid import derive_2d_thresholds, sweep_static_grid
from ..calibration.topology import TopologyCalibrationSettings, derive_topology_thresholds
from ..clustering.thresholds import ThresholdTable, builtin_2d_table
from ..config.run_config import build_graph, default_document, load_config
from ..config.settings import LOG_LEVELS, ConfigManager
from ..database.models import RunRecord, RunRegistry
from ..exceptions import CalibrationInconclusiveError, QuarcError
from .experiment import config_hash, parse_seeds, run_experiment, run_sweep, write_json

# Configuração de logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


class QuarcCLI:
    """Interface de linha de comando do quarc-sim."""

    def __init__(self, config_file: Optional[str] = None, registry_path: Optional[str] = None):
        self.config = ConfigManager(config_file)
        self.registry = RunRegistry(registry_path or self.config.get_registry_path())

    def create_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog='quarc-sim',
            description='''
quarc-sim - simulador de roteamento de emaranhamento com clusters adaptativos.

Roteia pedidos S-D sobre clusters de nós, decide sucesso por percolação de links
e fusões, e reconfigura os clusters a cada época pelas taxas de passagem.
            ''',
            epilog='''
Exemplos de uso:
    quarc-sim run --config configs/shift-16x16.json --seed 7
    quarc-sim calibrate-grid --side 16 --q 0.9 --slots 2000
    quarc-sim calibrate-topology --config configs/waxman-100.json
    quarc-sim sweep --configs a.json b.json --seeds 1..10 --jobs 4
    quarc-sim defaults > minha-config.json
    quarc-sim history
            ''',
            formatter_class=argparse.RawDescriptionHelpFormatter
        )
        parser.add_argument(
            '--log-level',
            choices=LOG_LEVELS,
            help='Nível de log (padrão: preferência do usuário)'
        )

        subparsers = parser.add_subparsers(dest='command', help='Comandos disponíveis')

        # Comando run
        run_parser = subparsers.add_parser('run', help='Executa uma simulação a partir de um documento JSON')
        run_parser.add_argument('--config', required=True, help='Documento de experimento (JSON)')
        run_parser.add_argument('--seed', type=int, help='Semente mestre (sobrescreve o documento)')
        run_parser.add_argument('--slots', type=int, help='Número de slots')
        run_parser.add_argument('--epoch', type=int, help='Duração da época em slots')
        run_parser.add_argument('--out', help='Diretório de saída')
        run_parser.add_argument('--trace', choices=('none', 'routing', 'full'), help='Nível do trace')
        run_parser.add_argument(
            '--baseline',
            action='store_true',
            help='Roda também com fila de 1 pedido e reporta o viés de alocação'
        )

        # Comando calibrate-grid
        grid_parser = subparsers.add_parser('calibrate-grid', help='Varredura estática em grade e limiares 2-D')
        grid_parser.add_argument('--side', type=int, default=16, help='Lado da grade (padrão: 16)')
        grid_parser.add_argument('--q', type=float, default=0.9, help='Probabilidade de fusão (padrão: 0.9)')
        grid_parser.add_argument('--p-values', type=float, nargs='+', help='Valores de p da varredura')
        grid_parser.add_argument('--configs', type=int, nargs='+', help='Lados dos blocos (potências de 2)')
        grid_parser.add_argument('--slots', type=int, default=2000, help='Slots por ponto (padrão: 2000)')
        grid_parser.add_argument('--seeds', nargs='+', default=['0'], help="Sementes, ex.: 1..10")
        grid_parser.add_argument('--qubits', type=int, default=4, help='Qubits por nó (padrão: 4)')
        grid_parser.add_argument('--jobs', type=int, help='Processos em paralelo')
        grid_parser.add_argument('--out', help='Diretório de saída')

        # Comando calibrate-topology
        topo_parser = subparsers.add_parser('calibrate-topology', help='Limiares específicos de uma topologia')
        topo_parser.add_argument('--config', required=True, help='Documento com a topologia alvo')
        topo_parser.add_argument('--grid-thresholds', help='Limiares 2-D base (padrão: embutidos)')
        topo_parser.add_argument('--q', type=float, help='Probabilidade de fusão (padrão: média da topologia)')
        topo_parser.add_argument('--slots', type=int, default=5000, help='Slots por comparação (padrão: 5000)')
        topo_parser.add_argument('--epoch', type=int, default=500, help='Duração da época (padrão: 500)')
        topo_parser.add_argument('--seed', type=int, help='Semente mestre')
        topo_parser.add_argument('--out', help='Diretório de saída')

        # Comando sweep
        sweep_parser = subparsers.add_parser('sweep', help='Várias configs x várias sementes, com agregado')
        sweep_parser.add_argument('--configs', nargs='+', required=True, help='Documentos de experimento')
        sweep_parser.add_argument('--seeds', nargs='+', required=True, help="Sementes, ex.: 1..10")
        sweep_parser.add_argument('--jobs', type=int, help='Processos em paralelo')
        sweep_parser.add_argument('--out', help='Diretório de saída')

        # Comando defaults
        defaults_parser = subparsers.add_parser('defaults', help='Emite o documento padrão completo')
        defaults_parser.add_argument('--write', help='Grava em arquivo em vez de imprimir')

        # Comando config
        config_parser = subparsers.add_parser('config', help='Preferências do usuário')
        config_parser.add_argument('--show', action='store_true', help='Mostra as preferências')
        config_parser.add_argument('--set', nargs=2, metavar=('CHAVE', 'VALOR'), help='Define uma preferência')
        config_parser.add_argument('--reset', action='store_true', help='Volta aos padrões')

        # Comando history
        history_parser = subparsers.add_parser('history', help='Lista execuções registradas')
        history_parser.add_argument('--limit', type=int, default=20, help='Quantidade (padrão: 20)')
        history_parser.add_argument('--hash', help='Filtra por hash de configuração')

        subparsers.add_parser('interactive', help='Menu interativo')

        return parser

    def _output_dir(self, flag: Optional[str], document_value: Optional[str] = None) -> str:
        return self.config.resolve_output_dir(flag, document_value)

    def _jobs(self, flag: Optional[int]) -> int:
        return flag if flag and flag > 0 else self.config.get_jobs()

    def handle_run(self, args) -> int:
        config = load_config(args.config).with_overrides(
            seed=args.seed, slots=args.slots, epoch_length=args.epoch, trace=args.trace,
        )
        out = self._output_dir(args.out, config.output_dir)
        print(f"Executando {args.config} (semente {config.seed}, {config.slots} slots)...")
        result = run_experiment(
            config, out, self.registry, base_dir=str(Path(args.config).resolve().parent),
            baseline=args.baseline,
        )
        throughput = result.report['throughput']
        print(f"Vazão média: {throughput['mean']:.4f} pedidos/slot ({throughput['total']} satisfeitos)")
        print(f"Artefatos em: {result.output_dir}")
        return result.status

    def handle_calibrate_grid(self, args) -> int:
        out = Path(self._output_dir(args.out))
        configs = args.configs or [b for b in (1, 2, 4, 8, 16, 32, 64) if b <= args.side and args.side % b == 0]
        p_values = args.p_values or [round(0.3 + 0.05 * i, 2) for i in range(15)]
        seeds = parse_seeds(args.seeds)

        print(f"Varredura em grade {args.side}x{args.side}: blocos {configs}, {len(p_values)} valores de p")
        sweep = sweep_static_grid(
            args.side, args.q, p_values, configs, args.slots, seeds=seeds,
            jobs=self._jobs(args.jobs), qubits=args.qubits,
        )
        sweep.to_csv(str(out / 'sweep.csv'))
        document = {'side': args.side, 'q': args.q, 'configs': configs, 'p_values': p_values, 'seeds': seeds}
        digest = config_hash(document)

        try:
            table = derive_2d_thresholds(sweep)
        except CalibrationInconclusiveError as e:
            self.registry.add_run(RunRecord(
                command='calibrate-grid', config_hash=digest, seed=seeds[0], output_dir=str(out),
                slots=args.slots, status='inconclusive', message=str(e),
            ))
            raise

        table.save(str(out / 'thresholds.json'))
        self.registry.add_run(RunRecord(
            command='calibrate-grid', config_hash=digest, seed=seeds[0], output_dir=str(out), slots=args.slots,
        ))
        print(f"Limiares salvos em {out / 'thresholds.json'}")
        return EXIT_OK

    def handle_calibrate_topology(self, args) -> int:
        config = load_config(args.config).with_overrides(seed=args.seed)
        graph = build_graph(config, str(Path(args.config).resolve().parent))
        grid_table = ThresholdTable.load(args.grid_thresholds) if args.grid_thresholds else builtin_2d_table()
        q = args.q if args.q is not None else sum(n.fusion_prob for n in graph.nodes.values()) / len(graph)
        out = Path(self._output_dir(args.out, config.output_dir))

        print(f"Calibrando limiares para {len(graph)} nós (q={q:.3f})...")
        settings = TopologyCalibrationSettings(slots=args.slots, epoch_length=args.epoch)
        table = derive_topology_thresholds(graph, grid_table, q, config.seed, settings)
        table.save(str(out / 'thresholds.json'))
        self.registry.add_run(RunRecord(
            command='calibrate-topology', config_hash=config_hash(config.to_document()),
            seed=config.seed, output_dir=str(out), slots=args.slots,
        ))
        print(f"p* = {table.source['p_star']:.4f}, G_t = {table.source['G_t']:.4f}")
        print(f"Limiares salvos em {out / 'thresholds.json'}")
        return EXIT_OK

    def handle_sweep(self, args) -> int:
        configs = []
        for path in args.configs:
            configs.append((Path(path).stem, load_config(path), str(Path(path).resolve().parent)))
        seeds = parse_seeds(args.seeds)
        out = self._output_dir(args.out)
        aggregate = run_sweep(configs, seeds, out, self._jobs(args.jobs), self.registry)
        print(f"Agregado salvo em {aggregate}")
        return EXIT_OK

    def handle_defaults(self, args) -> int:
        document = default_document()
        if args.write:
            write_json(Path(args.write), document)
            print(f"Documento padrão salvo em {args.write}")
        else:
            print(json.dumps(document, indent=2))
        return EXIT_OK

    def handle_config(self, args) -> int:
        if args.reset:
            self.config.reset_to_defaults()
            print("Preferências resetadas")
        if args.set:
            key, raw = args.set
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            self.config.set_setting(key, value)
            print(f"{key} = {value}")
        if args.show or not (args.set or args.reset):
            print("Preferências atuais:")
            print("=" * 30)
            for key, value in self.config.get_all_settings().items():
                print(f"{key}: {value if value is not None else 'Não definido'}")
            print(f"\nArquivo: {self.config.get_config_file_path()}")
        return EXIT_OK

    def handle_history(self, args) -> int:
        runs = self.registry.get_runs(args.limit, args.hash)
        if not runs:
            print("Nenhuma execução registrada")
            return EXIT_OK

        print("Execuções recentes:")
        print("=" * 50)
        for run in runs:
            throughput = f"{run.throughput:.4f}" if run.throughput is not None else '-'
            print(f"#{run.id} [{run.status}] {run.command} semente={run.seed} vazão={throughput}")
            print(f"   Hash: {run.config_hash[:12]}  Saída: {run.output_dir}")
            if run.message:
                print(f"   Mensagem: {run.message}")
            print(f"   Em: {run.created_at}")
        return EXIT_OK

    def handle_interactive(self, args) -> int:
        from .interactive import InteractiveInterface

        return InteractiveInterface(self, self.registry, self.config).run()

    def run(self, args: Optional[List[str]] = None) -> int:
        """Executa o CLI."""
        parser = self.create_parser()
        parsed_args = parser.parse_args(args)

        level = parsed_args.log_level or self.config.get_log_level()
        logging.getLogger().setLevel(level.upper())

        if not parsed_args.command:
            parser.print_help()
            return EXIT_OK

        handlers = {
            'run': self.handle_run,
            'calibrate-grid': self.handle_calibrate_grid,
            'calibrate-topology': self.handle_calibrate_topology,
            'sweep': self.handle_sweep,
            'defaults': self.handle_defaults,
            'config': self.handle_config,
            'history': self.handle_history,
            'interactive': self.handle_interactive,
        }

        handler = handlers.get(parsed_args.command)
        if handler is None:
            print(f"Comando não implementado: {parsed_args.command}")
            return EXIT_ERROR

        try:
            return handler(parsed_args)
        except CalibrationInconclusiveError as e:
            logger.error(f"Calibração inconclusiva: {e}")
            print(f"Calibração inconclusiva: {e}")
            return EXIT_INCONCLUSIVE
        except QuarcError as e:
            logger.error(str(e))
            print(f"Erro: {e}")
            return EXIT_ERROR
        except OSError as e:
            path = getattr(e, 'filename', None)
            logger.error(f"Falha de E/S em {path}: {e}")
            print(f"Erro de E/S{f' em {path}' if path else ''}: {e.strerror or e}")
            return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    """Ponto de entrada principal."""
    cli = QuarcCLI()
    return cli.run(argv)


if __name__ == '__main__':
    sys.exit(main())
