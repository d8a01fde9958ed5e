"""
Módulo config - Configuração de experimentos e preferências do usuário.
"""
