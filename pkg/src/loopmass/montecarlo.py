"""Stochastic verification of the closed forms.

Two independent samplers:

* a truncated Brownian loop soup.  Rooted loops are drawn from the measure
  density (2 pi t^2)^{-1} droot dt restricted to roots in a box and
  durations in [t_min, t_max]; each loop is a discrete Brownian bridge.
  Loops that stay in the upper half-plane are scored with a grid flood-fill
  disconnection detector, and the scaled hit rate estimates the loop mass
  of the requested event.

* a discretized chordal SLE tracer.  The Loewner flow is advanced with
  per-step vertical slit maps (midpoint driving), which simultaneously
  yields the trace (by backward composition) and an exact left/right
  classification of marked points relative to the discrete curve (by
  forward composition, the crossing test in conformal coordinates).

Determinism contract: the sample index space is partitioned into fixed-size
chunks, chunk k draws from Philox seeded by SeedSequence((seed, k)), and
reductions combine per-chunk integer counts in chunk order.  Results are
therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DomainError, IndeterminatePointError
from .geometry import UpperHalfPoint
from .loopmeasure import PassageSide, Side

__all__ = [
    "LoopSample",
    "SoupConfig",
    "SoupDiagnostics",
    "Estimate",
    "SleConfig",
    "SleDiagnostics",
    "sample_bridge",
    "disconnects",
    "estimate_disconnect_mass",
    "soup_disconnect_detailed",
    "sle_trace",
    "estimate_left_passage",
    "estimate_pass_combo",
    "pass_combo_detailed",
    "half_plane_capacity",
]

_SOUP_CHUNK = 16384
_SLE_CHUNK = 16384
_MAX_GRID_CELLS = 64_000_000


@dataclass(frozen=True)
class LoopSample:
    """A rooted discrete loop: closed polyline of vertices, first = last = root."""

    root: tuple[float, float]
    duration: float
    path: np.ndarray  # shape (k, 2), k >= 3

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise DomainError("loop duration must be positive")
        if self.path.ndim != 2 or self.path.shape[1] != 2 or self.path.shape[0] < 3:
            raise DomainError("loop path must be an (k, 2) array with k >= 3")
        if tuple(self.path[0]) != self.root or tuple(self.path[-1]) != self.root:
            raise DomainError("loop path must start and end at the root")


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate: value, standard error, sample count and the
    total truncated measure the hit rate was scaled by."""

    mean: float
    std_error: float
    n: int
    mass_scale: float

    def __post_init__(self) -> None:
        if self.std_error < 0.0 or self.n < 1:
            raise DomainError("Estimate requires std_error >= 0 and n >= 1")


@dataclass(frozen=True)
class SoupConfig:
    """Truncation and discretization knobs of the loop-soup sampler.

    Roots are drawn uniformly from [-box_halfwidth, box_halfwidth] x
    (0, box_height]; durations from the density proportional to t^-2 on
    [t_min, t_max]; each loop is a bridge with steps_per_loop increments;
    grid_resolution is the flood-fill cell size.
    """

    box_halfwidth: float
    box_height: float
    t_min: float
    t_max: float
    steps_per_loop: int = 256
    n_samples: int = 1_000_000
    seed: int = 0
    grid_resolution: float = 0.05

    def __post_init__(self) -> None:
        if not (0.0 < self.t_min < self.t_max):
            raise DomainError("need 0 < t_min < t_max")
        if self.box_halfwidth <= 0.0 or self.box_height <= 0.0:
            raise DomainError("box dimensions must be positive")
        if self.steps_per_loop < 16:
            raise DomainError("steps_per_loop must be at least 16")
        if self.grid_resolution <= 0.0:
            raise DomainError("grid_resolution must be positive")
        if self.n_samples < 1:
            raise DomainError("n_samples must be positive")

    @property
    def mass_scale(self) -> float:
        """Total truncated measure M = 2LH (1/2pi) (1/t_min - 1/t_max)."""
        return (
            2.0 * self.box_halfwidth * self.box_height
            * (1.0 / self.t_min - 1.0 / self.t_max) / (2.0 * math.pi)
        )


@dataclass(frozen=True)
class SoupDiagnostics:
    """Sampler internals plus the printed bias budget.

    truncation_low_bound is the analytic maximal-displacement bound on the
    mass of disconnecting loops with t < t_min.  truncation_tail_estimate
    extrapolates the observed hit-duration histogram past t_max
    geometrically (with a 3-hit Poisson floor when the top bins are empty)
    and adds the same treatment for hit roots near the box edge.
    discretization_estimate rescoring the hit loops at half the path
    resolution and double the grid cell gives a first-order sensitivity.
    indeterminate_mass accounts for query points falling in blocked cells
    (scored as not disconnected).
    """

    n_survive: int
    n_candidates: int
    n_hits: int
    n_indeterminate: int
    truncation_low_bound: float
    truncation_tail_estimate: float
    discretization_estimate: float
    indeterminate_mass: float

    @property
    def budget_total(self) -> float:
        return (
            self.truncation_low_bound
            + self.truncation_tail_estimate
            + self.discretization_estimate
            + self.indeterminate_mass
        )


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, chunk_index)))
    )


def sample_bridge(root: tuple[float, float], duration: float, steps: int,
                  rng: np.random.Generator) -> LoopSample:
    """Discrete Brownian bridge from root back to root over the given
    duration: independent 2-D Gaussian increments conditioned to close by
    the standard drift correction; the endpoint equals the start exactly."""
    if duration <= 0.0 or steps < 2:
        raise DomainError("sample_bridge requires duration > 0 and steps >= 2")
    incr = rng.standard_normal((steps, 2)) * math.sqrt(duration / steps)
    walk = np.cumsum(incr, axis=0)
    frac = (np.arange(1, steps + 1, dtype=float) / steps)[:, None]
    bridge = walk - frac * walk[-1]
    bridge[-1] = 0.0
    path = np.empty((steps + 1, 2))
    path[0] = root
    path[1:] = np.asarray(root) + bridge
    path[-1] = root
    return LoopSample(tuple(root), duration, path)


def _mark_segments(blocked: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> None:
    """Supercover rasterization (Amanatides-Woo grid traversal): mark every
    cell each polyline segment passes through.  Coordinates are in grid
    units and guaranteed non-negative and in-bounds."""
    for i in range(len(gx) - 1):
        x0 = gx[i]
        y0 = gy[i]
        x1 = gx[i + 1]
        y1 = gy[i + 1]
        ix = int(x0)
        iy = int(y0)
        jx = int(x1)
        jy = int(y1)
        blocked[iy, ix] = True
        remaining = abs(jx - ix) + abs(jy - iy)
        if remaining == 0:
            continue
        dx = x1 - x0
        dy = y1 - y0
        sx = 1 if dx > 0.0 else -1
        sy = 1 if dy > 0.0 else -1
        if dx != 0.0:
            tdx = abs(1.0 / dx)
            tmx = ((ix + (1 if sx > 0 else 0)) - x0) / dx
        else:
            tdx = math.inf
            tmx = math.inf
        if dy != 0.0:
            tdy = abs(1.0 / dy)
            tmy = ((iy + (1 if sy > 0 else 0)) - y0) / dy
        else:
            tdy = math.inf
            tmy = math.inf
        for _ in range(remaining):
            if tmx < tmy:
                ix += sx
                tmx += tdx
            else:
                iy += sy
                tmy += tdy
            blocked[iy, ix] = True


def _enclosure_flags(path: np.ndarray, points: Sequence[tuple[float, float]],
                     h: float, refine: int = 0) -> tuple[list[bool], int]:
    """Flood-fill enclosure test for several query points against one loop.

    The grid covers the loop's bounding box extended down to the real axis
    (with a margin); cells crossed by the polyline are blocked; a point is
    enclosed iff the component of its cell touches neither the bottom row
    (the axis) nor any outer edge of the grid (the unbounded complement).

    A query point falling in a blocked cell (the polyline passes within
    about h of it) cannot be decided at this resolution; with refine > 0
    such points are retried on grids of cell size h/2, h/4, ... until the
    cell clears.  Points still blocked at the last level are reported as
    not enclosed and counted as indeterminate.
    """
    xmin = float(path[:, 0].min())
    xmax = float(path[:, 0].max())
    ymax = float(path[:, 1].max())
    x0 = xmin - 2.0 * h
    nx = int(math.ceil((xmax + 2.0 * h - x0) / h)) + 1
    ny = int(math.ceil((ymax + 2.0 * h) / h)) + 1
    if nx * ny > _MAX_GRID_CELLS:
        raise DomainError(
            f"disconnection grid would need {nx * ny} cells; "
            "increase grid_resolution or reduce t_max"
        )
    blocked = np.zeros((ny, nx), dtype=bool)
    _mark_segments(blocked, (path[:, 0] - x0) / h, path[:, 1] / h)
    labels, _ = ndimage.label(~blocked)
    outside = set(labels[0, :]) | set(labels[-1, :]) | set(labels[:, 0]) | set(labels[:, -1])
    outside.discard(0)

    flags: list[bool] = []
    n_indeterminate = 0
    pending: list[int] = []
    for j, (px, py) in enumerate(points):
        gx = (px - x0) / h
        gy = py / h
        if not (0.0 <= gx < nx and 0.0 <= gy < ny):
            flags.append(False)
            continue
        lab = labels[int(gy), int(gx)]
        if lab == 0:
            can_refine = (
                refine > 0 and 4 * nx * ny <= _MAX_GRID_CELLS
            )
            if can_refine:
                pending.append(j)
            else:
                n_indeterminate += 1
            flags.append(False)
            continue
        flags.append(lab not in outside)
    if pending:
        sub_flags, sub_ind = _enclosure_flags(
            path, [points[j] for j in pending], 0.5 * h, refine - 1
        )
        for j, f in zip(pending, sub_flags):
            flags[j] = f
        n_indeterminate += sub_ind
    return flags, n_indeterminate


def disconnects(loop: LoopSample, p: tuple[float, float], h: float) -> bool:
    """True iff the grid flood fill cannot reach the real axis from p
    without crossing the loop's polyline, i.e. p sits in the filled hull.

    Raises IndeterminatePointError when p falls in a blocked cell (p closer
    than about h to the polyline)."""
    flags, n_ind = _enclosure_flags(loop.path, [p], h)
    if n_ind:
        raise IndeterminatePointError(
            f"point {p} lies within a blocked cell at resolution h={h}"
        )
    return flags[0]


_EVENTS = ("both", "z_only", "w_only", "neither")


def _score_event(event: str, dz: bool, dw: bool) -> bool:
    if event == "both":
        return dz and dw
    if event == "z_only":
        return dz and not dw
    if event == "w_only":
        return dw and not dz
    return not dz and not dw


@dataclass
class _SoupChunkStats:
    n: int = 0
    hits: int = 0
    survive: int = 0
    candidates: int = 0
    indeterminate: int = 0
    hits_half_path: int = 0
    hits_double_h: int = 0
    hit_ts: list = field(default_factory=list)
    hit_root_edge: int = 0


def _soup_chunk(z: tuple[float, float], w: tuple[float, float], cfg: SoupConfig,
                event: str, chunk_index: int, chunk_n: int) -> _SoupChunkStats:
    rng = _chunk_rng(cfg.seed, chunk_index)
    L, H = cfg.box_halfwidth, cfg.box_height
    steps = cfg.steps_per_loop
    h = cfg.grid_resolution

    roots_x = rng.uniform(-L, L, chunk_n)
    roots_y = rng.uniform(0.0, H, chunk_n)
    u = rng.random(chunk_n)
    ts = 1.0 / (1.0 / cfg.t_min - u * (1.0 / cfg.t_min - 1.0 / cfg.t_max))
    incr = rng.standard_normal((chunk_n, steps, 2))
    incr *= np.sqrt(ts / steps)[:, None, None]
    walk = np.cumsum(incr, axis=1)
    del incr
    frac = (np.arange(1, steps + 1, dtype=float) / steps)[None, :, None]
    walk -= frac * walk[:, -1:, :]
    bx = walk[:, :, 0]
    by = walk[:, :, 1]

    min_y = np.minimum(by.min(axis=1), 0.0) + roots_y
    alive = min_y > 0.0
    bbox_x_lo = np.minimum(bx.min(axis=1), 0.0) + roots_x
    bbox_x_hi = np.maximum(bx.max(axis=1), 0.0) + roots_x
    bbox_y_lo = min_y
    bbox_y_hi = np.maximum(by.max(axis=1), 0.0) + roots_y

    def contains(px: float, py: float) -> np.ndarray:
        return (
            (bbox_x_lo < px) & (px < bbox_x_hi)
            & (bbox_y_lo < py) & (py < bbox_y_hi)
        )

    in_z = contains(*z)
    in_w = contains(*w)
    if event == "both":
        needs_fill = alive & in_z & in_w
        trivially_hit = np.zeros(chunk_n, dtype=bool)
    elif event == "neither":
        needs_fill = alive & (in_z | in_w)
        trivially_hit = alive & ~in_z & ~in_w
    elif event == "z_only":
        needs_fill = alive & in_z
        trivially_hit = np.zeros(chunk_n, dtype=bool)
    else:  # w_only
        needs_fill = alive & in_w
        trivially_hit = np.zeros(chunk_n, dtype=bool)

    stats = _SoupChunkStats(n=chunk_n)
    stats.survive = int(alive.sum())
    stats.candidates = int(needs_fill.sum())
    stats.hits = int(trivially_hit.sum())
    if event == "neither":
        stats.hits_half_path = stats.hits
        stats.hits_double_h = stats.hits

    points = [z, w]
    edge_margin = 0.05 * min(L, H)
    for idx in np.nonzero(needs_fill)[0]:
        path = np.empty((steps + 1, 2))
        path[0, 0] = roots_x[idx]
        path[0, 1] = roots_y[idx]
        path[1:, 0] = roots_x[idx] + bx[idx]
        path[1:, 1] = roots_y[idx] + by[idx]
        path[-1] = path[0]
        flags, n_ind = _enclosure_flags(path, points, h, refine=4)
        stats.indeterminate += n_ind
        if _score_event(event, flags[0], flags[1]):
            stats.hits += 1
            stats.hit_ts.append(float(ts[idx]))
            if (
                L - abs(roots_x[idx]) < edge_margin
                or H - roots_y[idx] < edge_margin
            ):
                stats.hit_root_edge += 1
            # sensitivity rescoring: halved path resolution, doubled cell
            half = path[::2]
            if not np.array_equal(half[-1], path[0]):
                half = np.vstack([half, path[:1]])
            flags_half, _ = _enclosure_flags(half, points, h, refine=4)
            if _score_event(event, flags_half[0], flags_half[1]):
                stats.hits_half_path += 1
            flags_2h, _ = _enclosure_flags(path, points, 2.0 * h, refine=5)
            if _score_event(event, flags_2h[0], flags_2h[1]):
                stats.hits_double_h += 1
    return stats


def _soup_chunk_worker(args) -> _SoupChunkStats:
    return _soup_chunk(*args)


def _run_chunked(tasks: list, worker, workers: int) -> list:
    if workers <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=1))


def soup_disconnect_detailed(z: UpperHalfPoint, w: UpperHalfPoint,
                             cfg: SoupConfig, event: str = "both",
                             workers: int = 1) -> tuple[Estimate, SoupDiagnostics]:
    """Loop-soup estimate of the requested disconnection event's mass, plus
    the bias budget.  See estimate_disconnect_mass for the contract."""
    if event not in _EVENTS:
        raise DomainError(f"unknown event {event!r}; expected one of {_EVENTS}")
    L, H = cfg.box_halfwidth, cfg.box_height
    for p in (z, w):
        if abs(p.x) >= L or p.y >= H:
            raise DomainError(
                f"point ({p.x}, {p.y}) outside the sampling box "
                f"[-{L}, {L}] x (0, {H}]"
            )
    n = cfg.n_samples
    n_chunks = (n + _SOUP_CHUNK - 1) // _SOUP_CHUNK
    tasks = []
    remaining = n
    for k in range(n_chunks):
        size = min(_SOUP_CHUNK, remaining)
        remaining -= size
        tasks.append(((z.x, z.y), (w.x, w.y), cfg, event, k, size))
    results = _run_chunked(tasks, _soup_chunk_worker, workers)

    hits = sum(r.hits for r in results)
    survive = sum(r.survive for r in results)
    candidates = sum(r.candidates for r in results)
    indeterminate = sum(r.indeterminate for r in results)
    hits_half = sum(r.hits_half_path for r in results)
    hits_2h = sum(r.hits_double_h for r in results)
    hit_edge = sum(r.hit_root_edge for r in results)
    hit_ts: list[float] = []
    for r in results:
        hit_ts.extend(r.hit_ts)

    M = cfg.mass_scale
    p_hat = hits / n
    std_err = M * math.sqrt(p_hat * (1.0 - p_hat) / n)
    estimate = Estimate(mean=M * p_hat, std_error=std_err, n=n, mass_scale=M)

    d = 0.5 * math.hypot(z.x - w.x, z.y - w.y)
    trunc_low = (
        (4.0 * L * H / math.pi) * math.exp(-d * d / cfg.t_min) / (d * d)
        if event == "both" else 0.0
    )

    per_hit = M / n
    if event == "both":
        c_top = sum(1 for t in hit_ts if t > 0.5 * cfg.t_max)
        c_prev = sum(1 for t in hit_ts if 0.25 * cfg.t_max < t <= 0.5 * cfg.t_max)
        if c_top == 0 and c_prev == 0:
            tail_t = 3.0 * per_hit
        else:
            ratio = min(0.8, (c_top + 0.5) / (c_prev + 1.0))
            tail_t = (c_top + 1.0) * per_hit * ratio / (1.0 - ratio)
        tail_edge = max(hit_edge, 3) * per_hit
        tail = tail_t + tail_edge
    else:
        tail = 0.0

    disc = (abs(hits - hits_half) + abs(hits - hits_2h)) * per_hit
    ind_mass = indeterminate * per_hit

    diagnostics = SoupDiagnostics(
        n_survive=survive,
        n_candidates=candidates,
        n_hits=hits,
        n_indeterminate=indeterminate,
        truncation_low_bound=trunc_low,
        truncation_tail_estimate=tail,
        discretization_estimate=disc,
        indeterminate_mass=ind_mass,
    )
    return estimate, diagnostics


def estimate_disconnect_mass(z: UpperHalfPoint, w: UpperHalfPoint,
                             cfg: SoupConfig, event: str = "both",
                             workers: int = 1) -> Estimate:
    """Monte Carlo estimate of the truncated loop-soup mass of the event
    that a loop's hull contains both points ("both"), exactly one of them
    ("z_only"/"w_only"), or neither ("neither").

    The estimator is the hit rate scaled by the total truncated measure
    M = 2LH (1/2pi)(1/t_min - 1/t_max); it is unbiased for the truncated
    measure, with truncation and discretization accounted by the budget of
    soup_disconnect_detailed.  Identical seed and config give bit-identical
    results for any worker count."""
    est, _ = soup_disconnect_detailed(z, w, cfg, event=event, workers=workers)
    return est


def _fixed_root_survival_chunk(root: tuple[float, float], cfg: SoupConfig,
                               chunk_index: int, chunk_n: int) -> tuple[int, int]:
    rng = _chunk_rng(cfg.seed, chunk_index)
    steps = cfg.steps_per_loop
    u = rng.random(chunk_n)
    ts = 1.0 / (1.0 / cfg.t_min - u * (1.0 / cfg.t_min - 1.0 / cfg.t_max))
    incr = rng.standard_normal((chunk_n, steps, 2))
    incr *= np.sqrt(ts / steps)[:, None, None]
    walk = np.cumsum(incr, axis=1)
    frac = (np.arange(1, steps + 1, dtype=float) / steps)[None, :, None]
    walk -= frac * walk[:, -1:, :]
    alive = walk[:, :, 1].min(axis=1) + root[1] > 0.0
    return chunk_n, int(alive.sum())


def estimate_survival_mass(root: UpperHalfPoint, cfg: SoupConfig,
                           workers: int = 1) -> Estimate:
    """Scaffolding estimator: mass of bridges rooted at a fixed point that
    stay in the upper half-plane, truncated to [t_min, t_max].  The scale is
    M' = (1/2pi)(1/t_min - 1/t_max); used to validate the sampling weights
    independently of the disconnection detector."""
    n = cfg.n_samples
    n_chunks = (n + _SOUP_CHUNK - 1) // _SOUP_CHUNK
    tasks = []
    remaining = n
    for k in range(n_chunks):
        size = min(_SOUP_CHUNK, remaining)
        remaining -= size
        tasks.append(((root.x, root.y), cfg, k, size))
    results = _run_chunked(tasks, _survival_worker, workers)
    total = sum(cn for cn, _ in results)
    hits = sum(ch for _, ch in results)
    scale = (1.0 / cfg.t_min - 1.0 / cfg.t_max) / (2.0 * math.pi)
    p_hat = hits / total
    return Estimate(
        mean=scale * p_hat,
        std_error=scale * math.sqrt(p_hat * (1.0 - p_hat) / total),
        n=total,
        mass_scale=scale,
    )


def _survival_worker(args):
    return _fixed_root_survival_chunk(*args)


# ---------------------------------------------------------------------------
# SLE tracing and passage classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SleConfig:
    """Driving discretization of the chordal SLE flow.

    The capacity axis is covered by uniform steps dt_fine up to t_fine (the
    near-field phase, while the curve is near the marked points) and then
    geometrically growing steps up to t_total (the far-field phase that
    settles the left/right classification).  decided_margin is the angular
    half-width around pi/2 inside which a point is reported undecided.
    """

    n_traces: int = 100_000
    dt_fine: float = 1e-3
    t_fine: float = 12.0
    t_total: float = 1e5
    coarse_growth: float = 1.03
    seed: int = 0
    decided_margin: float = 0.2

    def __post_init__(self) -> None:
        if self.n_traces < 1:
            raise DomainError("n_traces must be positive")
        if not (0.0 < self.dt_fine <= self.t_fine <= self.t_total):
            raise DomainError("need 0 < dt_fine <= t_fine <= t_total")
        if self.coarse_growth <= 1.0:
            raise DomainError("coarse_growth must exceed 1")
        if not (0.0 <= self.decided_margin < 0.5 * math.pi):
            raise DomainError("decided_margin must lie in [0, pi/2)")


def _sle_schedule(cfg: SleConfig) -> np.ndarray:
    n_fine = max(1, int(round(cfg.t_fine / cfg.dt_fine)))
    dts = [cfg.dt_fine] * n_fine
    t = n_fine * cfg.dt_fine
    dt = cfg.dt_fine
    while t < cfg.t_total:
        dt *= cfg.coarse_growth
        dts.append(dt)
        t += dt
    return np.asarray(dts)


def sle_trace(kappa: float, T: float, n_steps: int,
              rng: np.random.Generator) -> np.ndarray:
    """Discrete chordal SLE(kappa) trace from 0 up to capacity time T.

    Per-step vertical slit maps with midpoint driving are composed
    backwards (zipper), returning the complex trace points (length
    n_steps + 1, starting at 0)."""
    if not (0.0 < kappa <= 4.0):
        raise DomainError(f"sle_trace requires kappa in (0, 4], got {kappa}")
    if n_steps < 100:
        raise DomainError("sle_trace requires n_steps >= 100")
    dt = T / n_steps
    dw = rng.standard_normal(n_steps) * math.sqrt(kappa * dt)
    w = np.concatenate([[0.0], np.cumsum(dw)])
    xi = w[:-1] + 0.5 * dw  # midpoint driving per step

    tips = np.empty(n_steps, dtype=complex)
    tips[:] = xi + 2j * math.sqrt(dt)
    # backward composition: tip k receives maps j = k-1, ..., 0 in that order
    for j in range(n_steps - 2, -1, -1):
        v = tips[j + 1:] - xi[j]
        r = np.sqrt(v * v - 4.0 * dt)
        r = np.where(v.real < 0.0, -r, r)
        tips[j + 1:] = xi[j] + r
    trace = np.empty(n_steps + 1, dtype=complex)
    trace[0] = 0.0
    trace[1:] = tips
    bad = np.nonzero(trace.imag < -1e-9)[0]
    if bad.size:
        raise DomainError("sle_trace lost the half-plane invariant "
                          f"at step {bad[0]}")
    return trace


def half_plane_capacity(trace: np.ndarray) -> float:
    """Half-plane capacity of a polyline hull, recovered by unzipping:
    each vertex is absorbed by a vertical slit map, contributing its
    (image height)^2/4 of capacity; hcap is twice the total."""
    u = np.asarray(trace, dtype=complex).copy()
    total = 0.0
    for k in range(len(u)):
        height = u[k].imag
        if height <= 0.0:
            continue
        base = u[k].real
        total += 0.25 * height * height
        if k + 1 < len(u):
            v = u[k + 1:] - base
            r = np.sqrt(v * v + height * height)
            r = np.where(v.real < 0.0, -r, r)
            u[k + 1:] = base + r
    return 2.0 * total


@dataclass
class _SleChunkStats:
    n: int = 0
    counts: dict = field(default_factory=dict)   # (side_z, side_w) -> int
    undecided: int = 0
    angle_budget_sum: float = 0.0
    decided_z: int = 0
    left_z: int = 0
    undecided_z: int = 0


def _classify_angles(theta: np.ndarray, margin: float) -> np.ndarray:
    """-1 undecided, 0 left (curve left of point), 1 right."""
    out = np.full(theta.shape, -1, dtype=np.int8)
    out[theta < 0.5 * math.pi - margin] = 0
    out[theta > 0.5 * math.pi + margin] = 1
    return out


def _sle_flow_chunk(points: Sequence[complex], kappa: float, cfg: SleConfig,
                    chunk_index: int, chunk_n: int) -> _SleChunkStats:
    """Advance the Loewner flow of the marked points for one chunk of
    driving paths; classify each trace by the terminal angles."""
    rng = _chunk_rng(cfg.seed, chunk_index)
    dts = _sle_schedule(cfg)
    m = len(points)
    Z = np.empty((m, chunk_n), dtype=complex)
    for i, p in enumerate(points):
        Z[i, :] = p
    frozen = np.full((m, chunk_n), -1, dtype=np.int8)  # -1 active, else side
    W = np.zeros(chunk_n)
    sqk = math.sqrt(kappa)
    for dt in dts:
        dw = rng.standard_normal(chunk_n) * (sqk * math.sqrt(dt))
        xi = W + 0.5 * dw
        four_dt = 4.0 * dt
        for i in range(m):
            v = Z[i] - xi
            r = np.sqrt(v * v + four_dt)
            r = np.where(v.real < 0.0, -r, r)
            Znew = xi + r
            # points collapsing onto the slit are frozen by the side they
            # approached from (right of the driving means the curve passed
            # on their left)
            collapsed = (Znew.imag <= 1e-12) & (frozen[i] == -1)
            if collapsed.any():
                frozen[i][collapsed & (v.real > 0.0)] = 0
                frozen[i][collapsed & (v.real < 0.0)] = 1
                Znew = np.where(collapsed, Z[i], Znew)
            Z[i] = np.where(frozen[i] == -1, Znew, Z[i])
        W = W + dw

    stats = _SleChunkStats(n=chunk_n)
    sides = np.empty((m, chunk_n), dtype=np.int8)
    budget = np.zeros(chunk_n)
    for i in range(m):
        theta = np.angle(Z[i] - W)
        cls = _classify_angles(theta, cfg.decided_margin)
        cls = np.where(frozen[i] != -1, frozen[i], cls)
        sides[i] = cls
        budget += np.minimum(np.abs(theta), np.abs(math.pi - theta)) / math.pi

    if m == 1:
        decided = sides[0] != -1
        stats.decided_z = int(decided.sum())
        stats.left_z = int((sides[0] == 0).sum())
        stats.undecided_z = int((~decided).sum())
        stats.angle_budget_sum = float(budget[decided].sum())
        return stats

    decided = (sides[0] != -1) & (sides[1] != -1)
    stats.undecided = int((~decided).sum())
    stats.decided_z = int((sides[0] != -1).sum())
    stats.left_z = int((sides[0] == 0).sum())
    stats.undecided_z = int((sides[0] == -1).sum())
    stats.angle_budget_sum = float(budget[decided].sum())
    names = (Side.LEFT, Side.RIGHT)
    for sz in (0, 1):
        for sw in (0, 1):
            key = (names[sz].value, names[sw].value)
            stats.counts[key] = int(((sides[0] == sz) & (sides[1] == sw) & decided).sum())
    return stats


def _sle_worker(args):
    return _sle_flow_chunk(*args)


@dataclass(frozen=True)
class SleDiagnostics:
    n_decided: int
    n_undecided: int
    flip_budget: float  # mean residual-angle bound on late side flips


def _sle_tasks(points: Sequence[complex], kappa: float, cfg: SleConfig) -> list:
    n = cfg.n_traces
    n_chunks = (n + _SLE_CHUNK - 1) // _SLE_CHUNK
    tasks = []
    remaining = n
    for k in range(n_chunks):
        size = min(_SLE_CHUNK, remaining)
        remaining -= size
        tasks.append((tuple(points), kappa, cfg, k, size))
    return tasks


def estimate_left_passage(z: UpperHalfPoint, kappa: float, cfg: SleConfig,
                          workers: int = 1) -> tuple[Estimate, SleDiagnostics]:
    """Frequency with which the discrete SLE trace passes to the left of z,
    classified by the terminal angle of the point's Loewner flow (the
    crossing test in conformal coordinates, exact for the discrete
    driving).  Undecided traces are excluded and counted."""
    if not (0.0 < kappa <= 4.0):
        raise DomainError(f"kappa must lie in (0, 4], got {kappa}")
    results = _run_chunked(_sle_tasks([z.as_complex()], kappa, cfg),
                           _sle_worker, workers)
    decided = sum(r.decided_z for r in results)
    left = sum(r.left_z for r in results)
    undecided = sum(r.undecided_z for r in results)
    budget_sum = sum(r.angle_budget_sum for r in results)
    if decided == 0:
        raise DomainError("no decided traces; increase t_total or n_traces")
    p_hat = left / decided
    est = Estimate(
        mean=p_hat,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / decided),
        n=decided,
        mass_scale=1.0,
    )
    return est, SleDiagnostics(decided, undecided, budget_sum / decided)


def pass_combo_detailed(z: UpperHalfPoint, w: UpperHalfPoint, kappa: float,
                        cfg: SleConfig, workers: int = 1
                        ) -> tuple[dict[PassageSide, Estimate], SleDiagnostics]:
    """Joint side-of-z / side-of-w classification frequencies.

    Returns one Estimate per side pair over the traces decided for both
    points (the four frequencies sum to 1 exactly), plus diagnostics with
    the undecided count and the mean residual-angle flip budget."""
    if not (0.0 < kappa <= 4.0):
        raise DomainError(f"kappa must lie in (0, 4], got {kappa}")
    results = _run_chunked(
        _sle_tasks([z.as_complex(), w.as_complex()], kappa, cfg),
        _sle_worker, workers,
    )
    undecided = sum(r.undecided for r in results)
    budget_sum = sum(r.angle_budget_sum for r in results)
    totals: dict[tuple[str, str], int] = {}
    for r in results:
        for key, cnt in r.counts.items():
            totals[key] = totals.get(key, 0) + cnt
    decided = sum(totals.values())
    if decided == 0:
        raise DomainError("no decided traces; increase t_total or n_traces")
    out: dict[PassageSide, Estimate] = {}
    for (sz, sw), cnt in sorted(totals.items()):
        p_hat = cnt / decided
        out[PassageSide(Side(sz), Side(sw))] = Estimate(
            mean=p_hat,
            std_error=math.sqrt(p_hat * (1.0 - p_hat) / decided),
            n=decided,
            mass_scale=1.0,
        )
    return out, SleDiagnostics(decided, undecided, budget_sum / decided)


def estimate_pass_combo(z: UpperHalfPoint, w: UpperHalfPoint, kappa: float,
                        cfg: SleConfig, workers: int = 1
                        ) -> dict[PassageSide, Estimate]:
    combos, _ = pass_combo_detailed(z, w, kappa, cfg, workers=workers)
    return combos
