"""Closed-form edge states of the p=2 and p=3 chains.

The p=2 chain with an odd number of qubits (2N-1) carries a zero mode living
only on the a-qubits (odd sites) with amplitude lambda**x in cell x, where
lambda = -J1/J2.  The p=3 chain with 3N-1 qubits and g0=0 carries two modes
on the (a, b) pairs, (1, +-1)/sqrt(2) * lambda**x with lambda = -+J2/J3 and
energy +-J1.  Both are exact eigenvectors of the finite open chain because
the truncated last cell removes the only equation the ansatz cannot satisfy.

Sign convention: a state with |lambda| <= 1 has a real positive amplitude on
the a-qubit of its first cell; a state with |lambda| > 1 on the a-qubit of
its last cell.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ContractError
from .model import ChainSpec, WaveVector

__all__ = [
    "Side",
    "WaveVector",
    "analytic_edge_p2",
    "analytic_edge_p3",
    "edge_energies",
    "edge_side",
    "geometric_norm_sq",
    "lambda_p2",
    "lambda_p3",
    "landmark",
]

BRANCHES = ("plus", "minus")
LANDMARKS_P2 = ("L", "R", "W")
LANDMARKS_P3 = ("L+", "L-", "R+", "R-", "W+", "W-")


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    DELOCALIZED = "delocalized"


def _branch_sign(branch: str) -> int:
    if branch not in BRANCHES:
        raise ContractError(f"branch must be 'plus' or 'minus', got {branch!r}")
    return 1 if branch == "plus" else -1


def lambda_p2(g0: float, g1: float, theta: float) -> float:
    """Decay factor -J1/J2 of the p=2 zero mode.

    Returns ``math.inf`` when J2 = 0 exactly: the last qubit is then
    decoupled and the mode is |R> (see :func:`analytic_edge_p2`).
    """
    j1 = g0 - g1 * math.cos(theta)
    j2 = g0 + g1 * math.cos(theta)
    if j2 == 0:
        return math.inf
    return -j1 / j2


def lambda_p3(g1: float, theta: float, branch: str) -> float:
    """Decay factor -+J2/J3 of the p=3 (g0=0) edge branch; inf when J3 = 0."""
    sign = _branch_sign(branch)
    j2 = g1 * math.cos(4 * math.pi / 3 + theta)
    j3 = g1 * math.cos(theta)
    if j3 == 0:
        return math.inf
    return -sign * j2 / j3


def edge_side(lambda_factor: float, tol: float = 1e-12) -> Side:
    mag = abs(lambda_factor)
    if abs(mag - 1.0) <= tol:
        return Side.DELOCALIZED
    return Side.LEFT if mag < 1.0 else Side.RIGHT


def geometric_norm_sq(lam: float, n: int) -> float:
    """sum_{k=0}^{n-1} lam**(2k) in closed form, stable near |lam| = 1."""
    if lam == 0:
        return 1.0
    q = 2.0 * math.log(abs(lam))
    if q == 0:
        return float(n)
    return math.expm1(n * q) / math.expm1(q)


def _profile(lam: float, n: int) -> np.ndarray:
    """Normalized cell weights proportional to lam**x, x = 1..n."""
    if math.isinf(lam):
        w = np.zeros(n)
        w[-1] = 1.0
        return w
    if abs(lam) <= 1.0:
        # anchor at the first cell: lam**(x-1)
        w = lam ** np.arange(n, dtype=float)
        return w / math.sqrt(geometric_norm_sq(lam, n))
    mu = 1.0 / lam
    w = mu ** np.arange(n - 1, -1, -1, dtype=float)
    return w / math.sqrt(geometric_norm_sq(mu, n))


def analytic_edge_p2(spec: ChainSpec, theta: float) -> WaveVector:
    """Normalized zero mode of an odd p=2 chain, supported on the a-qubits."""
    spec.check_p2_transfer()
    n = (spec.qubits + 1) // 2
    lam = lambda_p2(spec.g0, spec.g1, theta)
    amps = np.zeros(spec.qubits, complex)
    amps[0::2] = _profile(lam, n)
    return WaveVector(amps)


def analytic_edge_p3(spec: ChainSpec, theta: float, branch: str) -> tuple[WaveVector, float]:
    """Normalized p=3 edge state on the (a, b) qubits and its energy +-J1."""
    spec.check_p3_transfer()
    sign = _branch_sign(branch)
    n = (spec.qubits + 1) // 3
    lam = lambda_p3(spec.g1, theta, branch)
    cell = _profile(lam, n) / math.sqrt(2.0)
    amps = np.zeros(spec.qubits, complex)
    amps[0::3] = cell
    amps[1::3] = sign * cell
    energy = sign * spec.g1 * math.cos(2 * math.pi / 3 + theta)
    return WaveVector(amps), energy


def edge_energies(spec: ChainSpec, theta: float) -> tuple[float, ...]:
    """Analytic in-gap energies: (0,) for p=2, (J1, -J1) for p=3 with g0=0."""
    if spec.p == 2:
        return (0.0,)
    if spec.p == 3:
        if spec.g0 != 0:
            raise ContractError("analytic p=3 edge energies are only known for g0=0")
        j1 = spec.g1 * math.cos(2 * math.pi / 3 + theta)
        return (j1, -j1)
    raise ContractError(f"no analytic edge energies for p={spec.p}")


def landmark(spec: ChainSpec, name: str) -> WaveVector:
    """The decoupled-endpoint and W-point states as explicit vectors.

    p=2: ``L``, ``R``, ``W``.  p=3: ``L+``, ``L-``, ``R+``, ``R-``, ``W+``, ``W-``.
    The Bell pair (|eg> +- |ge>)/sqrt(2) sits on qubits (1, 2) for L+- and on
    (M-1, M) for R+-.  W- has no alternating sign because its decay factor at
    theta = pi/3 is +1 rather than -1.
    """
    m = spec.qubits
    amps = np.zeros(m, complex)
    if spec.p == 2:
        if name not in LANDMARKS_P2:
            raise ContractError(f"landmark {name!r} is not defined for p=2")
        if name == "L":
            amps[0] = 1.0
        elif name == "R":
            amps[-1] = 1.0
        else:
            spec.check_p2_transfer()
            n = (m + 1) // 2
            amps[0::2] = (-1.0) ** np.arange(1, n + 1) / math.sqrt(n)
        return WaveVector(amps)
    if spec.p == 3:
        if name not in LANDMARKS_P3:
            raise ContractError(f"landmark {name!r} is not defined for p=3")
        if m % 3 != 2:
            raise ContractError(f"p=3 landmarks need M = 3N-1 qubits, got {m}")
        sign = 1.0 if name[1] == "+" else -1.0
        r2 = math.sqrt(2.0)
        if name[0] == "L":
            amps[0], amps[1] = 1 / r2, sign / r2
        elif name[0] == "R":
            amps[-2], amps[-1] = 1 / r2, sign / r2
        else:
            n = (m + 1) // 3
            # W+ has lambda = -1, W- has lambda = +1 at theta = pi/3
            cell = (-sign) ** np.arange(1, n + 1) / math.sqrt(2 * n)
            amps[0::3] = cell
            amps[1::3] = sign * cell
        return WaveVector(amps)
    raise ContractError(f"landmarks are defined for p=2 and p=3 only, got p={spec.p}")
