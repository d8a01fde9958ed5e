"""
Interface interativa com InquirerPy.
"""

from pathlib import Path
from typing import TYPE_CHECKING, List

from InquirerPy import inquirer
from InquirerPy.base.control import Choice
from InquirerPy.separator import Separator

from ..config.settings import LOG_LEVELS, ConfigManager
from ..database.models import RunRegistry

if TYPE_CHECKING:
    from .main import QuarcCLI


class InteractiveInterface:
    """Menu interativo que monta comandos e os delega ao CLI."""

    def __init__(self, cli: "QuarcCLI", registry: RunRegistry, config: ConfigManager):
        self.cli = cli
        self.registry = registry
        self.config = config

    def run(self) -> int:
        print("Bem-vindo ao quarc-sim interativo!")
        print("Use as setas para navegar e Enter para selecionar\n")

        while True:
            try:
                choice = self._show_main_menu()

                if choice == 'exit':
                    print("Até logo!")
                    return 0
                elif choice == 'run':
                    self._run_experiment()
                elif choice == 'calibrate':
                    self._calibrate_grid()
                elif choice == 'history':
                    self.cli.run(['history'])
                    input("\nPressione Enter para continuar...")
                elif choice == 'defaults':
                    self._write_defaults()
                elif choice == 'config':
                    self._manage_config()

            except KeyboardInterrupt:
                print("\nAté logo!")
                return 0

    def _show_main_menu(self) -> str:
        choices = [
            Choice("run",       "[Run]       Executar simulação"),
            Choice("calibrate", "[Calibrar]  Limiares 2-D em grade"),
            Choice("history",   "[Histórico] Execuções registradas"),
            Choice("defaults",  "[Padrões]   Gerar documento padrão"),
            Choice("config",    "[Config]    Preferências"),
            Separator(),
            Choice("exit",      "[Sair]      Sair")
        ]

        return inquirer.select(
            message="O que você gostaria de fazer?",
            choices=choices,
            default="run"
        ).execute()

    def _json_files(self) -> List[str]:
        return sorted(str(p) for p in Path('configs').glob('*.json')) if Path('configs').is_dir() else []

    def _run_experiment(self):
        found = self._json_files()
        if found:
            path = inquirer.select(
                message="Documento de experimento:",
                choices=found + [Choice(None, "Outro caminho...")],
            ).execute()
        else:
            path = None
        if path is None:
            path = inquirer.filepath(
                message="Caminho do documento JSON:",
                validate=lambda p: Path(p).is_file(),
                invalid_message="Arquivo não encontrado",
            ).execute()

        seed = inquirer.number(message="Semente:", default=0, min_allowed=0).execute()
        trace = inquirer.select(message="Trace:", choices=['none', 'routing', 'full'], default='none').execute()
        baseline = inquirer.confirm(message="Rodar também a linha de base (fila de 1)?", default=False).execute()

        argv = ['run', '--config', path, '--seed', str(int(seed)), '--trace', trace]
        if baseline:
            argv.append('--baseline')
        status = self.cli.run(argv)
        print("\nConcluído" if status == 0 else f"\nFalhou (status {status})")
        input("Pressione Enter para continuar...")

    def _calibrate_grid(self):
        side = inquirer.select(message="Lado da grade:", choices=['8', '16'], default='16').execute()
        q = inquirer.number(message="q:", float_allowed=True, default=0.9, min_allowed=0.0, max_allowed=1.0).execute()
        slots = inquirer.number(message="Slots por ponto:", default=2000, min_allowed=1).execute()
        seeds = inquirer.text(message="Sementes (ex.: 1..10):", default='0').execute()

        status = self.cli.run([
            'calibrate-grid', '--side', side, '--q', str(q), '--slots', str(int(slots)), '--seeds', seeds,
        ])
        if status == 2:
            print("\nNenhum cruzamento confiável; aumente slots ou sementes")
        input("Pressione Enter para continuar...")

    def _write_defaults(self):
        target = inquirer.text(message="Salvar em:", default='configs/default.json').execute()
        self.cli.run(['defaults', '--write', target])
        input("Pressione Enter para continuar...")

    def _manage_config(self):
        while True:
            action = inquirer.select(
                message="Preferências:",
                choices=[
                    Choice("show",   "[Ver]      Mostrar preferências"),
                    Choice("out",    "[Saída]    Diretório de saída padrão"),
                    Choice("jobs",   "[Jobs]     Processos em paralelo"),
                    Choice("log",    "[Log]      Nível de log"),
                    Separator(),
                    Choice("back",   "[Voltar]   Voltar")
                ]
            ).execute()

            if action == 'back':
                return
            if action == 'show':
                for key, value in self.config.get_all_settings().items():
                    print(f"{key}: {value if value is not None else 'Não definido'}")
            elif action == 'out':
                value = inquirer.text(
                    message="Diretório:", default=self.config.get_setting('output_dir') or 'runs'
                ).execute()
                self.config.set_setting('output_dir', value)
            elif action == 'jobs':
                value = inquirer.number(message="Jobs:", default=self.config.get_jobs(), min_allowed=1).execute()
                self.config.set_setting('jobs', int(value))
            elif action == 'log':
                value = inquirer.select(
                    message="Nível:", choices=list(LOG_LEVELS), default=self.config.get_log_level()
                ).execute()
                self.config.set_setting('log_level', value)
