"""Heat-bath dynamics for the bounded Gaussian field.

A single-site update resamples one spin from the unit-variance normal
centered at the kernel-weighted mean of its neighbors, conditioned to
[a, b], through the shared-uniform inverse CDF.  Because the local mean
is non-decreasing in the field and the inverse CDF is non-decreasing in
the mean, two chains driven by the same (site, uniform) stream preserve
pointwise order exactly: that one fact powers the sandwich run from the
extremal all-a / all-b states and monotone coupling-from-the-past.

Continuous time is realized as uniform random scan, the embedded jump
chain of independent rate-one clocks; an event-driven variant with
exponential waiting times is provided for box geometries and produces
the identical trajectory when fed the same update stream.

A chain is a single-writer object: updates are sequentially dependent,
so there is no intra-chain parallelism.  Distinct chains or replicas may
run fully in parallel with independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundarySite, GeometryMismatch, NoCoalescence, OrderViolation
from .kernel import LatticeGeometry, NeighborTable, SpinInterval, wrapped_offsets
from .streams import UpdateStream, derive_key, site_uniform_pairs, uniforms
from .truncnorm import _sample_many, _sample_one


def _order_tolerance(interval: SpinInterval) -> float:
    # Mathematically the shared-uniform update is monotone in the local mean,
    # but once two means agree to the last bit the two inverse-CDF evaluations
    # can round in opposite directions by an ulp.  Inversions up to this bound
    # are rounding noise and are repaired by swapping; anything larger is a
    # genuine coupling bug and raises OrderViolation.
    scale = max(1.0, abs(interval.a), abs(interval.b))
    return 16.0 * np.finfo(float).eps * scale


def _boundary_array(table: NeighborTable, boundary, interval: SpinInterval) -> np.ndarray:
    """Resolve a boundary request (scalar, mapping, or array) to shell order."""
    shell = table.shell
    if not shell:
        return np.empty(0)
    if boundary is None:
        raise ValueError("box geometry requires boundary values")
    if np.isscalar(boundary):
        gamma = np.full(len(shell), float(boundary))
    elif isinstance(boundary, dict):
        gamma = np.array([float(boundary[s]) for s in shell])
    else:
        gamma = np.asarray(boundary, dtype=float)
        if gamma.shape != (len(shell),):
            raise ValueError(f"expected {len(shell)} boundary values, got {gamma.shape}")
    if not interval.contains(gamma):
        raise ValueError("boundary values must lie in the spin interval")
    return gamma


class FieldConfiguration:
    """A spin assignment on a finite geometry, one value in [a, b] per site.

    Interior values occupy the first ``n_interior`` slots of ``values``;
    for a box the frozen boundary values follow and are never mutated by
    the dynamics.
    """

    def __init__(self, table: NeighborTable, interval: SpinInterval,
                 values: np.ndarray, boundary=None):
        if abs(table.kernel.norm - 1.0) > 1e-12:
            raise ValueError("dynamics requires a normalized kernel (norm 1)")
        self.table = table
        self.interval = interval
        self.n_interior = table.n_sites
        gamma = _boundary_array(table, boundary, interval)
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_interior,):
            raise ValueError(f"expected {self.n_interior} interior values, got {values.shape}")
        if not interval.contains(values):
            raise ValueError("field values must lie in the spin interval")
        self.values = np.concatenate([values, gamma])

    @classmethod
    def constant(cls, table, interval, level: float, boundary=None):
        return cls(table, interval, np.full(table.n_sites, float(level)), boundary)

    @classmethod
    def all_lower(cls, table, interval, boundary=None):
        """The extremal all-a configuration."""
        return cls.constant(table, interval, interval.a, boundary)

    @classmethod
    def all_upper(cls, table, interval, boundary=None):
        """The extremal all-b configuration."""
        return cls.constant(table, interval, interval.b, boundary)

    @property
    def interior(self) -> np.ndarray:
        return self.values[:self.n_interior]

    def copy(self) -> "FieldConfiguration":
        clone = object.__new__(FieldConfiguration)
        clone.table = self.table
        clone.interval = self.interval
        clone.n_interior = self.n_interior
        clone.values = self.values.copy()
        return clone

    def _site_index(self, x) -> int:
        if isinstance(x, (int, np.integer)):
            i = int(x)
        else:
            i = self.table.index_of.get(tuple(x))
            if i is None:
                raise KeyError(f"site {x} not in geometry")
        if not 0 <= i < self.n_interior:
            raise BoundarySite(f"site {x} is a frozen boundary site")
        return i


def local_mean(field: FieldConfiguration, x) -> float:
    """The kernel-weighted mean of the neighbors of x; a convex combination,
    so it always lies inside the spin interval."""
    i = field._site_index(x)
    m = float(field.values[field.table.idx[i]] @ field.table.weights)
    iv = field.interval
    return min(max(m, iv.a), iv.b)


def site_update(field: FieldConfiguration, x, u: float) -> FieldConfiguration:
    """Heat-bath update of one site from a uniform in (0, 1), in place."""
    i = field._site_index(x)
    m = local_mean(field, i)
    field.values[i] = _sample_one(m, field.interval.a, field.interval.b, u)
    return field


def sweep(field: FieldConfiguration, stream: UpdateStream, n_updates: int) -> FieldConfiguration:
    """Apply n_updates consecutive stream-driven single-site updates, in place."""
    if stream.n_sites != field.n_interior:
        raise GeometryMismatch("stream volume does not match the field")
    sites, us = stream.take(n_updates)
    idx = field.table.idx
    w = field.table.weights
    values = field.values
    a, b = field.interval.a, field.interval.b
    for i, u in zip(sites, us):
        m = values[idx[i]] @ w
        values[i] = _sample_one(min(max(m, a), b), a, b, u)
    return field


def run_event_driven(field: FieldConfiguration, stream: UpdateStream, t_end: float):
    """Rate-one exponential clocks on a box: the continuous-time picture.

    Waiting times come from a separate stream keyed off the update stream,
    so the embedded jump chain consumes exactly the same (site, uniform)
    pairs as :func:`sweep` and reproduces its trajectory bit for bit.
    Returns the number of events executed before t_end.
    """
    if field.table.geometry.kind != "box":
        raise GeometryMismatch("event-driven mode is provided for box geometries")
    clock_key = derive_key(stream.key, "clock")
    total_rate = float(field.n_interior)
    t, events = 0.0, 0
    while True:
        gap = -np.log(float(uniforms(clock_key, np.uint64(events)))) / total_rate
        if t + gap > t_end:
            return events
        t += gap
        sweep(field, stream, 1)
        events += 1


@dataclass(eq=False)
class SandwichTrace:
    """Per-sweep record of the gap between coupled extremal chains."""

    sup_gap: np.ndarray          # length n_sweeps + 1, entry 0 is the initial b - a
    mean_gap: np.ndarray
    snapshots: dict              # sweep index -> per-site gap array
    seed: int
    interval: SpinInterval
    final_lower: np.ndarray
    final_upper: np.ndarray

    @property
    def n_sweeps(self) -> int:
        return len(self.sup_gap) - 1


def run_sandwich(geometry: LatticeGeometry, kernel, interval: SpinInterval,
                 n_sweeps: int, seed: int, snapshot_every: int = 0,
                 boundary=None, _fault_update=None) -> SandwichTrace:
    """Coupled run from the all-a and all-b extremes through one shared stream.

    Order is asserted after every update; the per-sweep sup-gap decaying
    toward zero is the finite-volume face of uniqueness of the equilibrium
    state.  ``_fault_update`` is a fault-injection hook (the update index
    at which the lower value is forced above the upper) used to test that
    violations are fatal.
    """
    table = wrapped_offsets(kernel, geometry)
    n = table.n_sites
    lower = FieldConfiguration.all_lower(table, interval, boundary)
    upper = FieldConfiguration.all_upper(table, interval, boundary)
    stream = UpdateStream(derive_key(seed, "sandwich"), n)

    sup = np.empty(n_sweeps + 1)
    mean = np.empty(n_sweeps + 1)
    snapshots = {}

    def record(s):
        gap = upper.interior - lower.interior
        sup[s] = float(gap.max())
        mean[s] = float(gap.mean())
        if snapshot_every and s % snapshot_every == 0:
            snapshots[s] = gap.copy()

    record(0)
    idx, w = table.idx, table.weights
    a, b = interval.a, interval.b
    tol = _order_tolerance(interval)
    lo_vals, up_vals = lower.values, upper.values
    update_counter = 0
    for s in range(1, n_sweeps + 1):
        sites, us = stream.take(n)
        for i, u in zip(sites, us):
            row = idx[i]
            m_lo = min(max(lo_vals[row] @ w, a), b)
            m_up = min(max(up_vals[row] @ w, a), b)
            new_lo = _sample_one(m_lo, a, b, u)
            new_up = new_lo if m_up == m_lo else _sample_one(m_up, a, b, u)
            if update_counter == _fault_update:
                new_lo = new_up + (b - a) * 1e-3
            if new_lo > new_up:
                if new_lo - new_up > tol:
                    raise OrderViolation(
                        f"coupled order broken at sweep {s}, site index {i}: "
                        f"{new_lo} > {new_up}")
                new_lo, new_up = new_up, new_lo   # sub-ulp rounding wobble
            lo_vals[i] = new_lo
            up_vals[i] = new_up
            update_counter += 1
        record(s)
    return SandwichTrace(sup, mean, snapshots, seed, interval,
                         lower.interior.copy(), upper.interior.copy())


@dataclass(eq=False)
class RunTrace:
    """Field snapshots from a single equilibrated chain, one row per sweep."""

    fields: np.ndarray           # (n_sweeps, n_sites)
    table: NeighborTable
    interval: SpinInterval
    seed: int
    burn_in: int


def stationary_run(geometry: LatticeGeometry, kernel, interval: SpinInterval,
                   seed: int, burn_in: int, n_sweeps: int,
                   start: str = "midpoint", boundary=None) -> RunTrace:
    """Burn in, then record the field after each of n_sweeps measurement sweeps.

    ``start`` picks the initial state: "midpoint", "lower", or "upper";
    starting from "upper" with no burn-in gives the deliberately
    non-equilibrated chain used as a negative control.
    """
    table = wrapped_offsets(kernel, geometry)
    n = table.n_sites
    levels = {"midpoint": interval.midpoint, "lower": interval.a, "upper": interval.b}
    if start not in levels:
        raise ValueError(f"start must be one of {sorted(levels)}")
    chain = FieldConfiguration.constant(table, interval, levels[start], boundary)
    stream = UpdateStream(derive_key(seed, "stationary"), n)
    if burn_in:
        sweep(chain, stream, burn_in * n)
    out = np.empty((n_sweeps, n))
    for s in range(n_sweeps):
        sweep(chain, stream, n)
        out[s] = chain.interior
    return RunTrace(out, table, interval, seed, burn_in)


# ---------------------------------------------------------------------------
# Coupling from the past
# ---------------------------------------------------------------------------

def cftp_samples(geometry: LatticeGeometry, kernel, interval: SpinInterval,
                 boundary, n_samples: int, seed: int,
                 eps_coal: float = 1e-9, t_cap: int = 1 << 20) -> np.ndarray:
    """Exact samples from the finite-box conditional law, one row per replica.

    Monotone coupling from the past: both extremal chains are run from
    time -T with a fixed per-slot randomness assignment (re-derived from
    the counter-based stream, so deepening the past never stores history),
    and T doubles until the chains agree at time zero within eps_coal in
    sup norm.  Replicas are independent and advance together, vectorized.
    """
    if geometry.kind != "box":
        raise GeometryMismatch("coupling from the past targets a box with frozen boundary")
    table = wrapped_offsets(kernel, geometry)
    n = table.n_sites
    gamma = _boundary_array(table, boundary, interval)
    a, b = interval.a, interval.b
    w = table.weights

    streams = [UpdateStream(derive_key(seed, "cftp", r), n) for r in range(n_samples)]
    site_keys = np.array([s.site_key for s in streams], dtype=np.uint64)
    u_keys = np.array([s.uniform_key for s in streams], dtype=np.uint64)

    out = np.empty((n_samples, n))
    active = np.arange(n_samples)
    horizon = max(2, n)
    while active.size:
        if horizon > t_cap:
            raise NoCoalescence(
                f"{active.size} replicas not coalesced at horizon {horizon // 2} "
                f"(cap {t_cap}, eps {eps_coal})")
        ra = active.size
        rows = np.arange(ra)
        low = np.concatenate([np.full((ra, n), a), np.tile(gamma, (ra, 1))], axis=1)
        upp = np.concatenate([np.full((ra, n), b), np.tile(gamma, (ra, 1))], axis=1)
        sk, uk = site_keys[active], u_keys[active]
        tol = _order_tolerance(interval)
        for t in range(horizon, 0, -1):           # slot t is time -t
            sites, us = site_uniform_pairs(sk, uk, t, n)
            nb = table.idx[sites]                 # (ra, K)
            m_lo = np.clip((low[rows[:, None], nb] * w).sum(axis=1), a, b)
            m_up = np.clip((upp[rows[:, None], nb] * w).sum(axis=1), a, b)
            new_lo = _sample_many(m_lo, a, b, us)
            new_up = np.where(m_up == m_lo, new_lo, _sample_many(m_up, a, b, us))
            if np.any(new_lo - new_up > tol):
                raise OrderViolation("coupled order broken inside coupling from the past")
            low[rows, sites] = np.minimum(new_lo, new_up)   # sub-ulp wobble repair
            upp[rows, sites] = np.maximum(new_lo, new_up)
        gap = (upp[:, :n] - low[:, :n]).max(axis=1)
        done = gap <= eps_coal
        if np.any(done):
            out[active[done]] = 0.5 * (low[done, :n] + upp[done, :n])
            active = active[~done]
        horizon *= 2
    return out


def cftp(geometry: LatticeGeometry, kernel, interval: SpinInterval,
         boundary, seed: int, eps_coal: float = 1e-9, t_cap: int = 1 << 20) -> np.ndarray:
    """One exact sample from the finite-box conditional law (see cftp_samples)."""
    return cftp_samples(geometry, kernel, interval, boundary, 1, seed,
                        eps_coal=eps_coal, t_cap=t_cap)[0]
