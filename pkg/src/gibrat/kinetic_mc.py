"""Event-exact Monte Carlo for the linear kinetic model.

Firms never interact with each other, only with the background, so each
one evolves independently: over a time step ``dtau`` it undergoes
``K ~ Poisson(lambda dtau)`` interactions, each multiplying its size by
``1 + eta``.  For a discrete effect the product only depends on how many
times each atom was drawn, which is multinomial given ``K``, so one step
costs a Poisson and a multinomial draw per particle and carries no time
discretization error.

Random streams are tied to fixed blocks of particles and to the number of
evolution steps already taken, so results do not depend on how many
worker threads process the blocks.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError
from .grids import CharacteristicFunctionGrid, GridDensity

__all__ = [
    "ParticleEnsemble",
    "Dirac",
    "LognormalInitial",
    "init_ensemble",
    "evolve_exact",
    "empirical_moment",
    "empirical_cf",
    "histogram",
    "initial_from_config",
    "save_ensemble",
    "load_ensemble",
]

BLOCK = 1 << 16


@dataclass(frozen=True)
class Dirac:
    """Point mass at ``x0``."""

    x0: float = 1.0


@dataclass(frozen=True)
class LognormalInitial:
    """Lognormal source ``(1/m) L_t0(x/m)`` (log-size normal, mean ``log m - t0``, var ``2 t0``)."""

    t0: float
    m: float = 1.0


def initial_from_config(record):
    """Build an initial-datum spec from ``{"kind": "dirac"|"lognormal", ...}``."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ConfigError("initial datum needs a 'kind'")
    kind = record["kind"]
    fields = {k: v for k, v in record.items() if k != "kind"}
    try:
        if kind == "dirac":
            return Dirac(**fields)
        if kind == "lognormal":
            return LognormalInitial(**fields)
    except TypeError as exc:
        raise ConfigError(f"bad fields for initial datum {kind!r}: {exc}") from None
    raise ConfigError(f"unsupported initial datum kind {kind!r}")


@dataclass(frozen=True)
class ParticleEnsemble:
    """Sizes of ``N`` firms at simulated time ``time``.

    ``steps`` counts the evolution calls applied so far; together with
    ``seed`` it selects the random streams of the next step.
    """

    sizes: np.ndarray
    time: float
    seed: int
    frequency: float = 1.0
    steps: int = 0

    def __post_init__(self):
        sizes = np.array(self.sizes, dtype=float)
        if sizes.ndim != 1 or sizes.size == 0:
            raise DomainError("an ensemble needs a non-empty 1-d array of sizes")
        if np.any(sizes < 0):
            raise DomainError("sizes must be nonnegative")
        if not self.frequency > 0:
            raise DomainError("interaction frequency must be positive")
        sizes.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self):
        return self.sizes.size

    def sidecar(self):
        return {"time": self.time, "seed": self.seed, "frequency": self.frequency,
                "n": self.n, "steps": self.steps}


def _streams(seed, tag, n):
    """One generator per block of ``BLOCK`` particles, keyed on (seed, tag, block)."""
    nblocks = -(-n // BLOCK)
    return [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(tag, b))))
        for b in range(nblocks)
    ]


def _map_blocks(fn, n, workers):
    slices = [slice(b * BLOCK, min(n, (b + 1) * BLOCK)) for b in range(-(-n // BLOCK))]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(len(slices)), slices))
    return [fn(b, sl) for b, sl in enumerate(slices)]


def init_ensemble(n, initial, seed, frequency=1.0, workers=None):
    """Draw ``n`` i.i.d. initial sizes.

    ``initial`` is a :class:`Dirac`, a :class:`LognormalInitial`, a
    :class:`~gibrat.grids.GridDensity` (inverse-CDF sampling in ``log x``,
    atom at zero honoured) or an equivalent config mapping.
    """
    n = int(n)
    if n < 1:
        raise DomainError("ensemble size must be at least 1")
    if isinstance(initial, dict):
        initial = initial_from_config(initial)
    seed = int(seed)
    if isinstance(initial, Dirac):
        if initial.x0 < 0:
            raise DomainError("Dirac location must be nonnegative")
        sizes = np.full(n, float(initial.x0))
    elif isinstance(initial, LognormalInitial):
        if initial.t0 <= 0 or initial.m <= 0:
            raise DomainError("lognormal initial datum needs t0 > 0 and m > 0")
        gens = _streams(seed, 0, n)
        mu = math.log(initial.m) - initial.t0
        sd = math.sqrt(2 * initial.t0)
        parts = _map_blocks(
            lambda b, sl: np.exp(gens[b].normal(mu, sd, sl.stop - sl.start)), n, workers
        )
        sizes = np.concatenate(parts)
    elif isinstance(initial, GridDensity):
        sizes = _sample_grid_density(initial, n, seed, workers)
    else:
        raise ConfigError(f"unsupported initial datum {initial!r}")
    return ParticleEnsemble(sizes, 0.0, seed, float(frequency), 0)


def _sample_grid_density(g, n, seed, workers):
    cdf = g.cdf()
    total = cdf[-1]
    if not total > 0:
        raise DomainError("grid density has no mass")
    cdf = cdf / total
    atom = g.atom_at_zero / total
    y = g.y
    gens = _streams(seed, 0, n)

    def block(b, sl):
        u = gens[b].random(sl.stop - sl.start)
        out = np.exp(np.interp(u, cdf, y))
        out[u < atom] = 0.0
        return out

    return np.concatenate(_map_blocks(block, n, workers))


def evolve_exact(e, d, dtau, workers=None):
    """Advance every particle by ``dtau`` with exact compound-Poisson updates.

    Parameters
    ----------
    e : ParticleEnsemble
    d : EffectDistribution
    dtau : float
        Nonnegative duration.
    workers : int, optional
        Threads to use; results are identical for any value.

    Returns
    -------
    ParticleEnsemble
        New ensemble with time advanced by ``dtau``.
    """
    if dtau < 0:
        raise DomainError("duration must be nonnegative")
    if dtau == 0:
        return e
    rate = e.frequency * dtau
    log_f = np.log1p(d.points)
    gens = _streams(e.seed, e.steps + 1, e.n)
    sizes = e.sizes

    def block(b, sl):
        rng = gens[b]
        k = rng.poisson(rate, sl.stop - sl.start)
        if d.n_atoms == 1:
            counts = k[:, None]
        else:
            counts = rng.multinomial(k, d.weights)
        return sizes[sl] * np.exp(counts @ log_f)

    new = np.concatenate(_map_blocks(block, e.n, workers))
    return replace(e, sizes=new, time=e.time + dtau, steps=e.steps + 1)


def empirical_moment(e, n):
    """Sample mean of ``x^n`` and its plug-in standard error.

    Heavy-tailed for ``n >= 4`` at large times; the standard error is then
    itself unreliable.
    """
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    if n == 0:
        return 1.0, 0.0
    v = e.sizes**n
    mean = math.fsum(v) / e.n
    if e.n < 2:
        return mean, math.inf
    var = math.fsum((v - mean) ** 2) / (e.n - 1)
    return mean, math.sqrt(var / e.n)


def empirical_cf(e, xi):
    """``(1/N) sum_j exp(-i xi x_j)`` on the frequencies ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty(xi.shape, dtype=complex)
    x = e.sizes
    for i, w in enumerate(xi):
        if w == 0.0:
            out[i] = 1.0 + 0j
        else:
            ph = w * x
            out[i] = complex(np.mean(np.cos(ph)), -np.mean(np.sin(ph)))
    return CharacteristicFunctionGrid(
        xi, out, {"provenance": "empirical", "n": e.n, "time": e.time}
    )


def histogram(e, bins):
    """Mass-normalized histogram on positive increasing ``bins``.

    Zero sizes go to ``atom_at_zero``; sizes outside the edges are counted
    in ``meta["underflow"]``/``meta["overflow"]``.  The returned grid points
    are the geometric bin centres.
    """
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise DomainError("need at least two bin edges")
    if edges[0] <= 0 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be positive and strictly increasing")
    x = e.sizes
    zero = x == 0
    pos = x[~zero]
    counts, _ = np.histogram(pos, edges)
    under = int(np.sum(pos < edges[0]))
    over = int(np.sum(pos > edges[-1]))
    n = e.n
    centres = np.sqrt(edges[1:] * edges[:-1])
    dens = counts / (n * np.diff(edges))
    meta = {
        "edges": edges.tolist(),
        "counts": counts.tolist(),
        "underflow": under / n,
        "overflow": over / n,
        "n": n,
        "time": e.time,
    }
    return GridDensity(centres, dens, float(zero.sum()) / n, meta)


def save_ensemble(e, path_stem):
    """Write ``<stem>.csv`` (one size per line) and ``<stem>.json`` sidecar."""
    with open(f"{path_stem}.csv", "w") as fh:
        fh.write("size\n")
        fh.writelines(f"{v!r}\n" for v in e.sizes.tolist())
    with open(f"{path_stem}.json", "w") as fh:
        json.dump(e.sidecar(), fh, indent=2, sort_keys=True)


def load_ensemble(path_stem):
    with open(f"{path_stem}.json") as fh:
        side = json.load(fh)
    sizes = np.loadtxt(f"{path_stem}.csv", skiprows=1, ndmin=1)
    return ParticleEnsemble(sizes, side["time"], side["seed"], side["frequency"], side.get("steps", 0))
