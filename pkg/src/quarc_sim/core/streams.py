"""
Sub-fluxos aleatórios determinísticos derivados de uma semente mestre.
"""

from typing import Dict

import numpy as np

# Cada finalidade tem um identificador fixo na chave do SeedSequence
PURPOSES: Dict[str, int] = {
    'requests': 1,
    'percolation': 3,
}


class RandomStreams:
    """Gera `numpy.random.Generator` independentes por (finalidade, slot, pedido).

    A sequência de números de um pedido não depende da ordem de avaliação dos
    demais, então slots podem ser avaliados em qualquer ordem ou em paralelo.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"Semente deve ser não negativa (recebida {seed})")
        self.seed = int(seed)

    def generator(self, purpose: str, slot: int = 0, request: int = 0) -> np.random.Generator:
        key = [self.seed, PURPOSES[purpose], int(slot), int(request)]
        return np.random.default_rng(np.random.SeedSequence(key))

    def for_request(self, slot: int, request_id: int) -> np.random.Generator:
        return self.generator('percolation', slot, request_id)

    def for_arrivals(self, slot: int) -> np.random.Generator:
        return self.generator('requests', slot)
