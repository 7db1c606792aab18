from __future__ import annotations

import numpy as np
import pytest

from ultrawalk import hamiltonian

ACCEPTANCE_LINES: list[str] = []


def kron_oracle(p: int, eps0: float, eps) -> np.ndarray:
    """Literal unrolled Kronecker recursion, independent of the library builder."""
    H = eps0 * np.eye(p) + eps[0] * (np.ones((p, p)) - np.eye(p))
    for m in range(1, len(eps)):
        size = p**m
        nxt = np.zeros((p * size, p * size))
        for a in range(p):
            for b in range(p):
                block = H if a == b else eps[m] * np.ones((size, size))
                nxt[a * size:(a + 1) * size, b * size:(b + 1) * size] = block
        H = nxt
    return H


@pytest.fixture(autouse=True)
def _restore_dense_cap():
    cap = hamiltonian.get_dense_cap()
    yield
    hamiltonian.set_dense_cap(cap)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
