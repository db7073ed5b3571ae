"""Embedded-chain simulation, empirical occupation laws, and extraction of
rare upward excursions with their phase occupancy.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .params import (DOWN, UP, InvalidParameters, Model, ModelParams,
                     check_state)
from .kernels import full_kernel

_BLOCK = 1 << 16


@dataclass(frozen=True)
class Trajectory:
    params: ModelParams
    model: Model
    seed: int
    x: np.ndarray
    status: np.ndarray
    y: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return len(self.x) - 1

    def state(self, i: int) -> tuple:
        if self.y is None:
            return (int(self.x[i]), int(self.status[i]))
        return (int(self.x[i]), int(self.y[i]), int(self.status[i]))

    def to_csv(self) -> str:
        from . import __version__
        out = io.StringIO()
        out.write(f"# version={__version__}\n")
        out.write("# rng=numpy.random.Generator(PCG64)\n")
        for key, value in self.params.to_dict(self.model).items():
            out.write(f"# {key}={value}\n")
        out.write(f"# seed={self.seed}\n")
        if self.y is None:
            out.write("step,x,status\n")
            for i in range(len(self.x)):
                out.write(f"{i},{self.x[i]},{self.status[i]}\n")
        else:
            out.write("step,x,y,status\n")
            for i in range(len(self.x)):
                out.write(f"{i},{self.x[i]},{self.y[i]},{self.status[i]}\n")
        return out.getvalue()


@dataclass(frozen=True)
class Excursion:
    start_step: int
    end_step: int   # first step at or above the target level
    peak: int
    down_fraction: float
    slope_estimate: float  # levels per embedded step


@dataclass(frozen=True)
class EmpiricalDistribution:
    entries: dict
    steps_used: int
    notes: tuple[str, ...] = field(default_factory=tuple)

    def prob(self, state: tuple) -> float:
        return self.entries.get(state, 0.0)

    def total_variation(self, other) -> float:
        keys = set(self.entries) | set(getattr(other, "entries", {}))
        return 0.5 * sum(abs(self.prob(k) - other.prob(k)) for k in keys)


def _move_table(params: ModelParams, model: Model):
    """Rows keyed by (min(x,1), [min(y,1),] sigma); moves as state deltas."""
    table = {}
    if model is Model.MODEL1:
        for x0 in (0, 1):
            for sigma in (UP, DOWN):
                row = full_kernel(params, model, (x0, sigma))
                moves = [(t[0] - x0, t[1], p) for t, p in row.targets]
                cum = np.cumsum([m[2] for m in moves])
                cum[-1] = 1.0
                table[(x0, sigma)] = (tuple(cum), tuple(m[:2] for m in moves))
        return table
    for x0 in (0, 1):
        for y0 in (0, 1):
            for sigma in (UP, DOWN):
                row = full_kernel(params, model, (x0, y0, sigma))
                moves = [(t[0] - x0, t[1] - y0, t[2], p) for t, p in row.targets]
                cum = np.cumsum([m[3] for m in moves])
                cum[-1] = 1.0
                table[(x0, y0, sigma)] = (tuple(cum), tuple(m[:3] for m in moves))
    return table


def simulate(params: ModelParams, model: Model, steps: int, seed: int = 0,
             start: tuple | None = None) -> Trajectory:
    """Sample a path of the embedded chain, recording every state."""
    if steps < 1:
        raise InvalidParameters("steps must be positive")
    if start is None:
        start = (0, UP) if model is Model.MODEL1 else (0, 0, UP)
    check_state(start, model)
    table = _move_table(params, model)
    rng = np.random.default_rng(seed)
    xs = np.empty(steps + 1, dtype=np.int32)
    ss = np.empty(steps + 1, dtype=np.int8)
    if model is Model.MODEL1:
        x, s = start
        xs[0], ss[0] = x, s
        i = 1
        while i <= steps:
            block = rng.random(min(_BLOCK, steps + 1 - i))
            for u in block:
                cum, moves = table[(1 if x else 0, s)]
                j = 0
                while u >= cum[j]:
                    j += 1
                dx, s = moves[j]
                x += dx
                xs[i], ss[i] = x, s
                i += 1
        return Trajectory(params=params, model=model, seed=seed, x=xs, status=ss)
    ys = np.empty(steps + 1, dtype=np.int32)
    x, y, s = start
    xs[0], ys[0], ss[0] = x, y, s
    i = 1
    while i <= steps:
        block = rng.random(min(_BLOCK, steps + 1 - i))
        for u in block:
            cum, moves = table[(1 if x else 0, 1 if y else 0, s)]
            j = 0
            while u >= cum[j]:
                j += 1
            dx, dy, s = moves[j]
            x += dx
            y += dy
            xs[i], ys[i], ss[i] = x, y, s
            i += 1
    return Trajectory(params=params, model=model, seed=seed, x=xs, status=ss, y=ys)


def empirical_distribution(trajectory: Trajectory, burn_in: int = 0) -> EmpiricalDistribution:
    """State-occupation frequencies after a burn-in, with a drift diagnostic."""
    if not 0 <= burn_in < trajectory.steps:
        raise InvalidParameters("burn_in must fall inside the trajectory")
    x = trajectory.x[burn_in:]
    s = trajectory.status[burn_in:]
    notes = []
    half = len(x) // 2
    m1, m2 = float(np.mean(x[:half])), float(np.mean(x[half:]))
    if m2 > 2.0 * m1 + 5.0:
        notes.append("first-queue mean keeps growing; the path looks transient")
    if trajectory.y is None:
        code = x.astype(np.int64) * 2 + s
        values, counts = np.unique(code, return_counts=True)
        entries = {(int(v // 2), int(v % 2)): c / len(x)
                   for v, c in zip(values, counts)}
    else:
        y = trajectory.y[burn_in:]
        span = int(y.max()) + 1
        code = (x.astype(np.int64) * span + y) * 2 + s
        entries = {}
        values, counts = np.unique(code, return_counts=True)
        for v, c in zip(values, counts):
            entries[(int(v // (2 * span)), int((v // 2) % span), int(v % 2))] = c / len(x)
    return EmpiricalDistribution(entries=entries, steps_used=len(x), notes=tuple(notes))


def ld_excursions(trajectory: Trajectory, level_k: int,
                  base_level: int = 2) -> list[Excursion]:
    """Excursions from the last low-level visit up to the first passage of level_k.

    Each excursion runs from the final visit at or below base_level preceding
    a first passage of level_k to the step where level_k is first reached.
    """
    if level_k <= base_level:
        raise InvalidParameters("level_k must exceed base_level")
    x = trajectory.x
    status = trajectory.status
    excursions = []
    i = 0
    n = len(x)
    while i < n:
        hits = np.nonzero(x[i:] >= level_k)[0]
        if len(hits) == 0:
            break
        end = i + int(hits[0])
        low = np.nonzero(x[i:end] <= base_level)[0]
        start = i + int(low[-1]) if len(low) else i
        seg = status[start:end + 1]
        down_fraction = float(np.mean(seg == DOWN))
        slope = (int(x[end]) - int(x[start])) / (end - start)
        peak = int(x[end])
        excursions.append(Excursion(start_step=start, end_step=end, peak=peak,
                                    down_fraction=down_fraction,
                                    slope_estimate=slope))
        back = np.nonzero(x[end:] <= base_level)[0]
        if len(back) == 0:
            break
        i = end + int(back[0]) + 1
    return excursions


def regime_prediction(params: ModelParams) -> str:
    """Predicted phase occupancy of rare upward excursions.

    The twisted path climbs mostly Up when mu*p < lambda + beta and mostly
    Down otherwise; the split point is rejected.
    """
    split = params.mu * params.p - (params.lam + params.beta)
    if split == 0.0:
        raise InvalidParameters("degenerate regime boundary: mu*p = lambda+beta")
    return "UpDominated" if split < 0.0 else "DownDominated"


def excursion_verdict(excursions: list[Excursion]) -> str:
    """Majority vote over the excursions' phase occupancy."""
    if not excursions:
        raise ValueError("no excursions reached the target level")
    down = sum(1 for e in excursions if e.down_fraction > 0.5)
    return "DownDominated" if 2 * down > len(excursions) else "UpDominated"
