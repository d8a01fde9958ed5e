"""
Exceções do QuARC Sim.
"""

from typing import Optional


class QuarcError(Exception):
    """Erro base de todo o pacote."""


class InvalidTopologyError(QuarcError):
    """Topologia inválida (ex.: grade com lado menor que 2)."""


class TopologyCalibrationError(QuarcError):
    """Não foi possível gerar a topologia com os parâmetros pedidos."""


class DomainError(QuarcError, ValueError):
    """Argumento fora do domínio da operação."""


class ConsistencyError(QuarcError):
    """Estado interno inconsistente (referências quebradas, nó sem cluster...)."""


class InfeasibleSplitError(QuarcError):
    """Pedido de partição em mais partes do que nós disponíveis."""


class ThresholdTableError(QuarcError):
    """Tabela de limiares inválida."""


class CalibrationInconclusiveError(QuarcError):
    """A calibração não encontrou evidência suficiente (cruzamento ou p*)."""


class ConfigError(QuarcError):
    """Erro de configuração; `key` aponta a chave problemática."""

    def __init__(self, key: Optional[str], message: str):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}" if key else message)
