"""
Módulo cli - Interface de linha de comando e interativa.
"""
