"""
Módulo database - Registro de execuções em SQLite.
"""
