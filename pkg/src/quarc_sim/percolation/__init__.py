"""
Módulo percolation - Amostragem de links, fusões e decisão de sucesso por percolação.
"""
