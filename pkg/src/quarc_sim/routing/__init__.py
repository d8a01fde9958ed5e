"""
Módulo routing - Seleção de caminhos sobre clusters e atribuição de qubits.
"""
