"""Quenched-disorder ensembles, fidelity-vs-W curves and the gap collapse.

Every sample's seed is a hash of (master_seed, w_index, sample_index), and
the per-sample fidelities are folded in index order with ``math.fsum``.  The
result is therefore bitwise identical for any worker count or scheduling.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__, kernels
from .dynamics import DEFAULT_DT, propagate_batch
from .errors import ContractError, IntegrationError
from .hamiltonian import bulk_edge_gap
from .model import ChainSpec, RampSchedule, WaveVector, derive_seed, sample_disorder
from .protocols import fidelity, protocol_endpoints

log = logging.getLogger(__name__)

SEED_RULE = "numpy SeedSequence(master_seed, spawn_key=(w_index, sample_index)).generate_state(1, uint64)[0]"


def default_w_grid(protocol: str) -> list[float]:
    """21 points on [0, 1] g1 for p=2 and [0, 0.5] g1 for p=3."""
    hi = 1.0 if protocol == "p2" else 0.5
    return [float(w) for w in np.linspace(0.0, hi, 21)]


@dataclass(frozen=True)
class EnsembleSpec:
    protocol: str
    chain: ChainSpec
    omega: float
    w_grid: tuple[float, ...]
    samples: int = 100
    master_seed: int = 0
    branch: str = "plus"
    dt: float = DEFAULT_DT

    def __post_init__(self):
        object.__setattr__(self, "w_grid", tuple(float(w) for w in self.w_grid))
        if self.protocol not in ("p2", "p3"):
            raise ContractError(f"protocol must be 'p2' or 'p3', got {self.protocol!r}")
        if self.samples < 1:
            raise ContractError("samples must be >= 1")
        if not self.w_grid or any(w < 0 for w in self.w_grid):
            raise ContractError("W grid must be non-empty with W >= 0")
        if self.omega <= 0 or self.dt <= 0:
            raise ContractError("omega and dt must be positive")
        if self.master_seed < 0:
            raise ContractError("master seed must be non-negative")
        protocol_endpoints(self.chain, self.protocol, self.branch)
        if self.protocol == "p2" and self.chain.g0 != self.chain.g1:
            raise ContractError("p=2 transfer assumes g0 = g1")

    def config(self) -> dict:
        return {
            "protocol": self.protocol,
            "p": self.chain.p,
            "qubits": self.chain.qubits,
            "g0": self.chain.g0,
            "g1": self.chain.g1,
            "omega": self.omega,
            "branch": self.branch if self.protocol == "p3" else None,
            "w_grid": list(self.w_grid),
            "samples": self.samples,
            "master_seed": self.master_seed,
            "dt": self.dt,
        }


@dataclass
class EnsemblePoint:
    w: float
    mean_fidelity: float
    std_dev: float
    samples: int
    min_fidelity: float
    max_norm_drift: float
    sample_fidelities: list[float] | None = None
    seeds: list[int] | None = None


@dataclass
class EnsembleResult:
    points: list[EnsemblePoint]
    gap: float
    provenance: dict = field(default_factory=dict)

    def means(self) -> np.ndarray:
        return np.array([pt.mean_fidelity for pt in self.points])


def _run_chunk(spec: EnsembleSpec, w_index: int, sample_indices: Sequence[int], norm_tolerance: float):
    """Fidelities and norm drifts for one block of samples at one W.

    Samples whose drift exceeds ``norm_tolerance`` get a NaN fidelity; the
    caller turns them into an error.
    """
    chain = spec.chain
    w = spec.w_grid[w_index]
    psi0, target, (lo, hi) = protocol_endpoints(chain, spec.protocol, spec.branch)
    schedule = RampSchedule.sweep(lo, hi, spec.omega)
    seeds = [derive_seed(spec.master_seed, w_index, s) for s in sample_indices]
    offsets = np.array([sample_disorder(w, chain.bonds, seed).offsets for seed in seeds])
    psi = np.tile(np.asarray(psi0.amplitudes, dtype=complex), (len(seeds), 1))
    drift = propagate_batch(chain, schedule, offsets, psi, spec.dt)
    fids = [
        fidelity(target, WaveVector(row)) if d <= norm_tolerance else math.nan
        for row, d in zip(psi, drift)
    ]
    return w_index, list(sample_indices), seeds, fids, [float(d) for d in drift]


def _tasks(spec: EnsembleSpec, workers: int):
    per = max(1, math.ceil(spec.samples / max(1, workers)))
    for wi in range(len(spec.w_grid)):
        for start in range(0, spec.samples, per):
            yield wi, list(range(start, min(spec.samples, start + per)))


def run_ensemble(
    spec: EnsembleSpec,
    workers: int = 1,
    keep_samples: bool = False,
    norm_tolerance: float = 1e-6,
    gap: float | None = None,
) -> EnsembleResult:
    """Disorder-averaged fidelity at every W of the grid.

    ``workers > 1`` distributes (W, sample-block) tasks over a process pool.
    A sample whose norm drift exceeds ``norm_tolerance`` aborts the run with
    an :class:`IntegrationError` naming its seed.
    """
    n_w = len(spec.w_grid)
    fids = np.full((n_w, spec.samples), np.nan)
    drifts = np.zeros((n_w, spec.samples))
    seeds = np.zeros((n_w, spec.samples), dtype=np.uint64)

    def collect(res):
        wi, idx, sd, f, d = res
        fids[wi, idx] = f
        drifts[wi, idx] = d
        seeds[wi, idx] = sd

    tasks = list(_tasks(spec, workers))
    if workers <= 1:
        for wi, idx in tasks:
            collect(_run_chunk(spec, wi, idx, norm_tolerance))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, spec, wi, idx, norm_tolerance) for wi, idx in tasks]
            for fut in futures:
                collect(fut.result())

    points = []
    for wi, w in enumerate(spec.w_grid):
        bad = np.nonzero(drifts[wi] > norm_tolerance)[0]
        if bad.size:
            s = int(bad[0])
            raise IntegrationError(
                f"W={w}: sample {s} (seed {int(seeds[wi, s])}) drifted by {drifts[wi, s]:.3e}; reduce dt"
            )
        row = [float(x) for x in fids[wi]]
        mean = math.fsum(row) / len(row)
        std = math.sqrt(math.fsum((x - mean) ** 2 for x in row) / len(row))
        points.append(
            EnsemblePoint(
                w=w,
                mean_fidelity=mean,
                std_dev=std,
                samples=len(row),
                min_fidelity=min(row),
                max_norm_drift=float(np.max(drifts[wi])),
                sample_fidelities=row if keep_samples else None,
                seeds=[int(x) for x in seeds[wi]] if keep_samples else None,
            )
        )
        log.debug("W=%g mean F=%.6f std=%.2e", w, mean, std)

    if gap is None:
        gap = bulk_edge_gap(spec.chain)
    provenance = {
        "tool": "sshtransfer",
        "version": __version__,
        "backend": kernels.BACKEND,
        "config": spec.config(),
        "seed_rule": SEED_RULE,
        "disorder_rule": "offsets = W * Generator(PCG64(seed)).uniform(-0.5, 0.5, M-1)",
        "gap": gap,
        "units": "energies in g1, times in 1/g1",
    }
    return EnsembleResult(points, gap, provenance)


def collapse_axis(result: EnsembleResult) -> list[tuple[float, float]]:
    """(log10(W / gap), mean fidelity) for every point with W > 0."""
    if not result.gap > 0:
        raise ContractError(f"gap must be positive, got {result.gap!r}")
    return [(math.log10(pt.w / result.gap), pt.mean_fidelity) for pt in result.points if pt.w > 0]


def gap_scan(
    p: int,
    sizes: Sequence[int],
    theta_range: tuple[float, float] | None = None,
    grid_points: int = 201,
    g0: float | None = None,
) -> list[tuple[int, float]]:
    """Bulk-edge gap per chain size; g0 defaults to 1 for p=2 and 0 for p=3."""
    if g0 is None:
        g0 = 1.0 if p == 2 else 0.0
    out = []
    for m in sizes:
        chain = ChainSpec(p, m, g0, 1.0)
        if p == 2:
            chain.check_p2_transfer()
        elif p == 3:
            chain.check_p3_transfer()
        out.append((m, bulk_edge_gap(chain, theta_range, grid_points)))
    return out


def default_workers() -> int:
    return os.cpu_count() or 1
