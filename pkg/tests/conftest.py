import numpy as np
import pytest

from lqboot.model import CostPair, Dimensions, LqModel, NoiseModel

A0 = np.array([[1.07, 0.00, -0.37],
               [0.48, -0.89, 0.85],
               [0.00, 0.04, -0.93]])
B0 = np.array([[-0.48, 0.44, -0.30],
               [-0.52, 0.59, 0.26],
               [0.30, 0.00, -0.74]])
QX = np.array([[0.65, -0.08, -0.14],
               [-0.08, 0.57, 0.26],
               [-0.14, 0.26, 1.00]])
QU = np.array([[0.200, 0.05, 0.085],
               [0.050, 0.14, 0.040],
               [0.085, 0.04, 0.280]])
# Reference solution for this system, quoted to two decimals.
K_REF = np.array([[0.94, 0.06, -0.32],
                      [0.06, 0.88, 0.02],
                      [-0.32, 0.02, 1.37]])
L_REF = np.array([[0.64, -0.13, 0.44],
                      [-0.71, 0.63, -0.11],
                      [0.22, 0.08, -0.91]])
RHO_REF = 0.26


@pytest.fixture(scope="session")
def ref_model():
    return LqModel.from_matrices(A0, B0, QX, QU)


@pytest.fixture(scope="session")
def ref_costs():
    return CostPair(QX, QU)


@pytest.fixture(scope="session")
def ref_theta():
    return np.hstack([A0, B0])


def scalar_model(a, b, qx=1.0, qu=1.0, c=1.0):
    return LqModel(Dimensions(1, 1), np.array([[a, b]]), CostPair([[qx]], [[qu]]),
                   NoiseModel.gaussian([[c]]))


# Filled by the acceptance tests; printed at the end of the session.
ACCEPTANCE_REPORT = {}


def record_criterion(number, passed, detail):
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:>2}: {status}  {detail}"
    ACCEPTANCE_REPORT[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_REPORT):
            terminalreporter.write_line(ACCEPTANCE_REPORT[key])
