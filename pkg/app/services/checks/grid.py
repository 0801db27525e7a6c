"""
Built-in instance grid of the verify suite.
"""

from typing import Iterator, Tuple

from app.services.state_space import EnsembleParams

GRID_Q = (0.3, 0.5, 0.8)
GRID_L = (2, 3, 4)
GRID_H = (1, 2, 3)
GRID_DELTA = (1.25, 2.0, 5.0)
XXZ_CHAINS = ((1, 2), (1, 3), (2, 2), (3, 2))  # (2S, H)


def sectors(min_L: int = 1, half: bool = False, L_values=GRID_L, H_values=GRID_H) -> Iterator[EnsembleParams]:
    """ Every nondegenerate (q, L, H, N) of the grid; `half` keeps N <= LH/2."""
    for q in GRID_Q:
        for L in L_values:
            if L < min_L:
                continue
            for H in H_values:
                top = (L * H + 1) // 2 if half else L * H - 1
                for N in range(1, min(top, L * H - 1) + 1):
                    yield EnsembleParams.create(q=q, L=L, H=H, N=N)


def label(params: EnsembleParams) -> str:
    return f"q={params.q},L={params.L},H={params.H},N={params.N}"


def xxz_label(twiceS: int, H: int, Delta: float, sector_2n: int) -> str:
    return f"2S={twiceS},H={H},Delta={Delta},2n={sector_2n}"


def chains() -> Iterator[Tuple[int, int, float]]:
    for twiceS, H in XXZ_CHAINS:
        for Delta in GRID_DELTA:
            yield twiceS, H, Delta
