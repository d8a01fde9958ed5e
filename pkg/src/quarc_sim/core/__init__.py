"""
Módulo core - Laço de simulação por slots, métricas e sub-streams aleatórios.
"""
