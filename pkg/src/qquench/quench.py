"""Single-bin phase quenches, post-selection probabilities and noisy scans.

The protocol: multiply exactly one bin amplitude by exp(i*theta), project the
quenched state onto the fixed post-selector, and record the relative change
of the projection probability (the response factor p = 1 - Pr/P0). A scan
does this for every bin and every requested depth under a calibrated
Gaussian noise model.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .errors import DegenerateBaselineError, DimensionMismatchError, IndexOutOfRangeError
from .states import BasisGrid, PostSelector, WavefunctionState, inner_product

# Noiseless baseline below this is treated as an orthogonal post-selection.
BASELINE_FLOOR = 1e-6


@dataclass(frozen=True)
class QuenchConfig:
    """Where and how deep to quench: bin index and phase depth in radians."""

    bin: int
    depth: float

    def __post_init__(self):
        if self.bin < 0:
            raise IndexOutOfRangeError(f"bin index must be nonnegative, got {self.bin}")
        if not math.isfinite(self.depth):
            raise ValueError(f"quench depth must be finite, got {self.depth}")


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian measurement noise: relative baseline fluctuation, seed, trials.

    ``relative_sigma`` is the normalized background fluctuation (std of the
    baseline over the baseline itself); the experimental floor is around
    0.002. Each probability estimate averages ``trials`` independent noisy
    reads. ``relative_sigma = 0`` disables noise entirely.
    """

    relative_sigma: float = 0.002
    seed: int = rng.DEFAULT_SEED
    trials: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.relative_sigma) and self.relative_sigma >= 0):
            raise ValueError(f"relative_sigma must be >= 0, got {self.relative_sigma}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")

    @property
    def noiseless(self) -> bool:
        return self.relative_sigma == 0.0


@dataclass(frozen=True)
class ResponseRecord:
    """Measured quantities for one bin: baseline plus per-depth entries.

    ``entries`` holds ``(theta, measured_pr, response_p)`` tuples in the
    scan's depth order.
    """

    bin: int
    baseline_p0: float
    entries: tuple


@dataclass(frozen=True, eq=False)
class ResponseMap:
    """One record per bin, all sharing the same depth list and baseline."""

    grid: BasisGrid
    depths: tuple
    records: tuple

    def __post_init__(self):
        if len(self.records) != self.grid.size:
            raise ValueError(
                f"need one record per bin: {len(self.records)} records, {self.grid.size} bins"
            )
        for n, rec in enumerate(self.records):
            if rec.bin != n:
                raise ValueError(f"record {n} carries bin index {rec.bin}")
            if tuple(e[0] for e in rec.entries) != tuple(self.depths):
                raise ValueError(f"record {n} depths differ from the map's depth list")

    @property
    def baseline_p0(self) -> float:
        return self.records[0].baseline_p0

    def response_matrix(self) -> np.ndarray:
        """Response factors p as an (n_bins, n_depths) array."""
        return np.array([[e[2] for e in rec.entries] for rec in self.records])

    def measured_matrix(self) -> np.ndarray:
        """Measured probabilities Pr as an (n_bins, n_depths) array."""
        return np.array([[e[1] for e in rec.entries] for rec in self.records])


def apply_quench(state: WavefunctionState, q: QuenchConfig) -> WavefunctionState:
    """Multiply the amplitude at ``q.bin`` by exp(i*q.depth); unitary, norm kept."""
    if not 0 <= q.bin < state.grid.size:
        raise IndexOutOfRangeError(f"bin {q.bin} outside [0, {state.grid.size})")
    amps = np.array(state.amplitudes, copy=True)
    amps[q.bin] *= cmath.exp(1j * q.depth)
    return WavefunctionState(state.grid, amps)


def projection_probability(state: WavefunctionState, selector: PostSelector) -> float:
    """Probability of projecting ``state`` onto the post-selection state."""
    return abs(inner_product(selector, state)) ** 2


def response_factor(measured_pr: float, baseline_p0: float) -> float:
    """Relative probability change caused by the quench: 1 - Pr/P0."""
    if baseline_p0 <= BASELINE_FLOOR:
        raise DegenerateBaselineError(
            f"baseline P0={baseline_p0:.3e} at or below floor {BASELINE_FLOOR:.0e}"
        )
    return 1.0 - measured_pr / baseline_p0


def measure_with_noise(true_pr, noise: NoiseModel, key=None, baseline_p0=None) -> float:
    """Average of ``noise.trials`` noisy reads of a true probability.

    Each read adds a Normal(0, relative_sigma * baseline_p0) error and clamps
    at zero (probabilities cannot go negative). ``key`` is the stream key
    identifying this measurement slot (default: the seed's baseline stream);
    the draw at trial t depends only on (key, t), never on call order.
    ``baseline_p0`` anchors the absolute noise scale and defaults to
    ``true_pr`` itself.
    """
    if true_pr < 0:
        raise ValueError(f"true probability must be >= 0, got {true_pr}")
    if noise.noiseless:
        return float(true_pr)
    if key is None:
        key = rng.stream_key(noise.seed, rng.BASELINE_BIN, 0.0)
    scale = noise.relative_sigma * (true_pr if baseline_p0 is None else baseline_p0)
    return _kernels.noisy_mean_scalar(true_pr, scale, noise.trials, key)


def scan(
    state: WavefunctionState,
    selector: PostSelector,
    depths,
    noise: NoiseModel,
) -> ResponseMap:
    """Measure the response factor for every bin at every depth.

    The baseline P0 is measured once per scan (it does not depend on the
    quench position), then each (bin, depth) probability is measured and
    converted to p = 1 - Pr/P0. Noise draws are counter-indexed by
    (seed, bin, depth, trial), so the scan is reproducible and bins could be
    evaluated in any order or in parallel.
    """
    if state.grid != selector.grid:
        raise DimensionMismatchError(f"grids differ: {state.grid} vs {selector.grid}")
    depths = tuple(float(t) for t in depths)
    if not depths:
        raise ValueError("need at least one quench depth")
    for theta in depths:
        if not math.isfinite(theta):
            raise ValueError(f"quench depth must be finite, got {theta}")
        if theta == 0.0:
            raise ValueError("depth 0 is the baseline; scan depths must be nonzero")

    thetas = np.asarray(depths, dtype=np.float64)
    p0_true, pr_true = _kernels.true_probabilities(
        state.amplitudes, selector.overlaps, thetas
    )
    if p0_true <= BASELINE_FLOOR:
        raise DegenerateBaselineError(
            f"post-selector {selector.label!r} is (nearly) orthogonal to the state: "
            f"P0={p0_true:.3e} at or below floor {BASELINE_FLOOR:.0e}"
        )

    if noise.noiseless:
        p0_meas = p0_true
        pr_meas = pr_true
    else:
        sigma_abs = noise.relative_sigma * p0_true
        baseline_key = rng.stream_key(noise.seed, rng.BASELINE_BIN, 0.0)
        p0_meas = _kernels.noisy_mean_scalar(p0_true, sigma_abs, noise.trials, baseline_key)
        keys = rng.key_matrix(noise.seed, state.grid.size, depths)
        pr_meas = _kernels.noisy_mean_matrix(pr_true, sigma_abs, noise.trials, keys)

    if p0_meas <= BASELINE_FLOOR:
        raise DegenerateBaselineError(
            f"measured baseline P0={p0_meas:.3e} at or below floor {BASELINE_FLOOR:.0e} "
            f"(selector {selector.label!r})"
        )

    records = []
    for n in range(state.grid.size):
        entries = tuple(
            (depths[d], float(pr_meas[n, d]), 1.0 - float(pr_meas[n, d]) / p0_meas)
            for d in range(len(depths))
        )
        records.append(ResponseRecord(bin=n, baseline_p0=float(p0_meas), entries=entries))
    return ResponseMap(grid=state.grid, depths=depths, records=tuple(records))
