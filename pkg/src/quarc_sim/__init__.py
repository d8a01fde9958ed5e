"""
QuARC Sim - Simulador de roteamento de emaranhamento com clusterização adaptativa.

Simula, em slots de tempo discretos, o protocolo QuARC: rotas sobre clusters,
atribuição de qubits a canais, percolação por fusões e reconfiguração de
clusters ao fim de cada época, com calibração de limiares e relatórios de métricas.
"""

__version__ = "0.1.0"
__author__ = "Mateus Lacerda"
__description__ = "Simulador de roteamento quântico com clusterização adaptativa"
