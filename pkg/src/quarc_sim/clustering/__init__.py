"""
Módulo clustering - Partição em clusters, Girvan-Newman, Kemeny e limiares.
"""
