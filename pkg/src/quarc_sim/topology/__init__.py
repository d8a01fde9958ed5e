"""
Módulo topology - Modelo de rede, geradores de topologia e agendas de parâmetros.
"""
