"""
Preferências do usuário do quarc-sim.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)

LOG_LEVELS = ('debug', 'info', 'warning', 'error')


class ConfigManager:
    """Preferências persistentes (diretório de saída, jobs, nível de log, registro)."""

    def __init__(self, config_file: Optional[str] = None):
        if config_file is None:
            config_dir = Path.home() / ".config" / "quarc-sim"
            config_dir.mkdir(parents=True, exist_ok=True)
            config_file = str(config_dir / "config.json")

        self.config_file = config_file
        self._config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self):
        """Carrega preferências do arquivo (cria com padrões se não existir)."""
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    self._config = {**self._get_default_config(), **json.load(f)}
                logger.debug(f"Preferências carregadas de {self.config_file}")
            else:
                self._config = self._get_default_config()
                self._save_config()
                logger.info(f"Arquivo de preferências criado: {self.config_file}")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Erro ao carregar preferências: {e}")
            self._config = self._get_default_config()

    def _save_config(self):
        try:
            os.makedirs(os.path.dirname(os.path.abspath(self.config_file)), exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self._config, f, indent=2, ensure_ascii=False)
            logger.debug(f"Preferências salvas em {self.config_file}")
        except OSError as e:
            logger.error(f"Erro ao salvar preferências: {e}")

    def _get_default_config(self) -> Dict[str, Any]:
        return {
            'output_dir': None,
            'jobs': 1,
            'log_level': 'info',
            'registry_path': None,
        }

    def get_setting(self, key: str, default: Any = None) -> Any:
        """Obtém uma preferência (chaves pontuadas são aceitas)."""
        value = self._config
        try:
            for k in key.split('.'):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set_setting(self, key: str, value: Any):
        keys = key.split('.')
        config = self._config
        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value
        self._save_config()
        logger.debug(f"Preferência definida: {key} = {value}")

    def get_all_settings(self) -> Dict[str, Any]:
        return self._config.copy()

    def reset_to_defaults(self):
        self._config = self._get_default_config()
        self._save_config()
        logger.info("Preferências resetadas para os padrões")

    def get_jobs(self) -> int:
        jobs = self.get_setting('jobs', 1)
        return jobs if isinstance(jobs, int) and jobs >= 1 else 1

    def get_log_level(self) -> str:
        level = self.get_setting('log_level', 'info')
        return level if level in LOG_LEVELS else 'info'

    def get_registry_path(self) -> Optional[str]:
        return self.get_setting('registry_path')

    def resolve_output_dir(self, flag: Optional[str] = None, document_value: Optional[str] = None) -> str:
        """--out > output_dir do documento > QUARC_SIM_OUT > preferência > ./runs."""
        for candidate in (flag, document_value, os.environ.get('QUARC_SIM_OUT'),
                          self.get_setting('output_dir')):
            if candidate:
                return candidate
        return 'runs'

    def get_config_file_path(self) -> str:
        return self.config_file
