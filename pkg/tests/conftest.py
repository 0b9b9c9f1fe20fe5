import numpy as np
import pytest

from pfreal.pf_model import TABLE_I, build_system, four_bus
from pfreal.tracker import HomotopyConfig, solve_all

# Real solutions printed for the Table I network, columns vd2, vq2, vd3, vq3, vd4, vq4.
# Rows 3 and 8 are printed identically; the sign pattern (1, 0, -1, 0, 1, 0) is absent.
TABLE_II = np.array(
    [
        [1, 0, 1, 0, -1, 0],
        [-1, 0, 1, 0, -1, 0],
        [1, 0, 1, 0, 1, 0],
        [1, 0, -1, 0, -1, 0],
        [-1, 0, 1, 0, 1, 0],
        [-1, 0, -1, 0, -1, 0],
        [-1, 0, -1, 0, 1, 0],
        [1, 0, 1, 0, 1, 0],
        [0.30976, -0.95082, -0.82212, -0.56932, -0.97906, 0.20359],
        [-0.88313, 0.46912, 0.97310, 0.23039, 0.99834, -0.05754],
        [0.57067, -0.82118, -0.61912, 0.78530, 0.41658, -0.90910],
        [0.89239, -0.45127, 0.84624, -0.53281, -0.94751, 0.31973],
        [-0.88313, -0.46912, 0.97310, -0.23039, 0.99834, 0.05754],
        [0.57067, 0.82118, -0.61912, -0.78530, 0.41658, 0.90910],
        [0.30975, 0.95082, -0.82212, 0.56932, -0.97906, -0.20359],
        [0.89239, 0.45127, 0.84624, 0.53281, -0.94751, -0.31973],
    ]
)
TABLE_II_DUPLICATE = (2, 7)  # 0-based rows printed identically
TABLE_II_MISSING = np.array([1, 0, -1, 0, 1, 0])

SEXTIC = (1.0, 13.4913, 136.2685, -144.4123, 18.9004, -0.5871, 0.0017)
QUARTIC = (1.0, -1.438, 0.611, -0.070, 0.002)

B12_ZERO = (0.0,) + TABLE_I[1:]


@pytest.fixture(scope="session")
def table1():
    return four_bus()


@pytest.fixture(scope="session")
def table1_solutions(table1):
    return solve_all(build_system(table1), HomotopyConfig())


@pytest.fixture(scope="session")
def b12_zero_solutions():
    return solve_all(build_system(four_bus(b=B12_ZERO)), HomotopyConfig())


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
