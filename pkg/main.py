#!/usr/bin/env python3
"""
quarc-sim - Simulador de roteamento de emaranhamento com clusters adaptativos.

Ponto de entrada principal do aplicativo.
"""

import sys
from src.quarc_sim.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
