"""
Módulo calibration - Derivação de limiares de split/merge.
"""
