"""
Kac Walk - Monte Carlo simulation of the Kac jump process.

Each pair (i, j) carries an exponential clock with rate

    lambda_{i,j} = N binom(N, 2)^{-1} (v_i^2 + v_j^2)^gamma

and when it rings the pair is rotated by an angle theta drawn uniformly from
(-pi, pi]. The walk is simulated in the Gillespie form: one exponential time
with the total rate, then a pair chosen proportionally to its rate.

Key Features:
- Single-step update on a VelocityState
- KacWalk: batched replicas with cached pair rates updated incrementally
- Spectral gap estimates from the decay of stationary autocorrelations
- Monte Carlo evaluation of Dirichlet quotients
- Trajectory rows for CSV export
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateProfileError, DomainError, NumericalError
from .sphere import SphereSpec, SpherePoint, sample_uniform
from .variational import TrialProfile, f0_profile, pair_residuals, profile_norm_sq

RECOMPUTE_EVERY = 1000
RENORMALIZE_EVERY = 10_000
BATCH_REPLICAS = 500
DEFAULT_GRID_POINTS = 80
DEFAULT_FIT_WINDOW = (0.1, 0.8)
JACKKNIFE_GROUPS = 20
MC_BATCH = 100_000
MIN_DIRICHLET_SAMPLES = 100_000

ObservableChoice = Union[TrialProfile, str]


# ===== SECTION 1: States and Rates =====

@dataclass
class VelocityState:
    """Velocities of one N-particle system together with its clock."""
    velocities: np.ndarray
    time: float = 0.0
    collisions: int = 0

    def __post_init__(self) -> None:
        self.velocities = np.asarray(self.velocities, dtype=float)

    @property
    def energy(self) -> float:
        return float(np.mean(self.velocities ** 2))


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")


def pair_indices(N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Rows and columns of the binom(N, 2) pairs i < j."""
    return np.triu_indices(N, 1)


def rate_prefactor(N: int) -> float:
    """N / binom(N, 2)."""
    return 2.0 / (N - 1)


def collision_rates(velocities: np.ndarray, gamma: float) -> np.ndarray:
    """
    Rates lambda_{i,j} for every pair, in pair_indices order.

    velocities may carry leading batch dimensions; pairs run along the last axis.
    """
    v = np.asarray(velocities, dtype=float)
    N = v.shape[-1]
    I, J = pair_indices(N)
    sq = v ** 2
    return rate_prefactor(N) * (sq[..., I] + sq[..., J]) ** gamma


def _rotate(vi, vj, theta):
    c, s = np.cos(theta), np.sin(theta)
    return vi * c + vj * s, -vi * s + vj * c


def step(state: VelocityState, gamma: float, rng: np.random.Generator) -> VelocityState:
    """
    Advance one collision.

    Args:
        state: Current velocities and clock
        gamma: Rate exponent in [0, 1]
        rng: numpy Generator

    Returns:
        New VelocityState; the input is left untouched

    Raises:
        DomainError: if every pair has rate zero
    """
    _check_gamma(gamma)
    v = state.velocities.copy()
    N = len(v)
    if N < 2:
        raise DomainError("need at least two particles")
    rates = collision_rates(v, gamma)
    total = float(np.sum(rates))
    if not total > 0:
        raise DomainError("total collision rate is zero")

    dt = rng.exponential(1.0 / total)
    cumulative = np.cumsum(rates)
    k = min(int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right')), len(rates) - 1)
    theta = rng.uniform(-math.pi, math.pi)
    I, J = pair_indices(N)
    i, j = int(I[k]), int(J[k])
    v[i], v[j] = _rotate(v[i], v[j], theta)
    return VelocityState(v, state.time + dt, state.collisions + 1)


# ===== SECTION 2: Batched Simulator =====

class KacWalk:
    """
    Simulates many independent replicas of the Kac walk in lockstep.

    Every call to advance() performs one collision in each replica, so the
    replica clocks drift apart. Pair rates are cached and only the 2(N-1)
    pairs touching the colliding particles are refreshed; the cache is
    rebuilt every RECOMPUTE_EVERY collisions and the velocities are projected
    back onto the sphere every RENORMALIZE_EVERY collisions.
    """

    def __init__(self, spec: SphereSpec, gamma: float, velocities: np.ndarray,
                 rng: np.random.Generator):
        _check_gamma(gamma)
        v = np.array(velocities, dtype=float, ndmin=2)
        if v.shape[1] != spec.n_particles:
            raise DomainError(f"expected {spec.n_particles} velocities per replica")
        self.spec = spec
        self.gamma = gamma
        self.velocities = v
        self.rng = rng
        self.times = np.zeros(v.shape[0])
        self.collisions = 0

        N = spec.n_particles
        self._I, self._J = pair_indices(N)
        self._prefactor = rate_prefactor(N)
        # _touching[p] lists the pairs containing particle p
        pair_id = np.zeros((N, N), dtype=int)
        pair_id[self._I, self._J] = np.arange(len(self._I))
        pair_id[self._J, self._I] = np.arange(len(self._I))
        self._touching = np.array([np.delete(pair_id[p], p) for p in range(N)])
        self._recompute()

    @property
    def replicas(self) -> int:
        return self.velocities.shape[0]

    def _recompute(self) -> None:
        sq = self.velocities ** 2
        self.rates = self._prefactor * (sq[:, self._I] + sq[:, self._J]) ** self.gamma
        self.totals = self.rates.sum(axis=1)

    def _update_rates(self, rows: np.ndarray, i: np.ndarray, j: np.ndarray, k: np.ndarray) -> None:
        cols = np.concatenate([self._touching[i], self._touching[j]], axis=1)
        pair_energy = (self.velocities[rows[:, None], self._I[cols]] ** 2
                       + self.velocities[rows[:, None], self._J[cols]] ** 2)
        new = self._prefactor * pair_energy ** self.gamma
        delta = new - self.rates[rows[:, None], cols]
        # pair (i, j) sits in both halves
        half = self._touching.shape[1]
        delta[:, half:][cols[:, half:] == k[:, None]] = 0.0
        self.rates[rows[:, None], cols] = new
        self.totals += delta.sum(axis=1)

    def renormalize(self) -> None:
        """Project every replica radially back onto its sphere."""
        for r in range(self.replicas):
            self.velocities[r] = SpherePoint.on_sphere(self.spec, self.velocities[r]).velocities

    def advance(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        One collision per replica.

        Returns:
            (dt, i, j, theta) arrays, one entry per replica
        """
        if np.any(self.totals <= 0):
            raise DomainError("total collision rate is zero")
        count = self.replicas
        rows = np.arange(count)
        dt = self.rng.exponential(size=count) / self.totals
        cumulative = np.cumsum(self.rates, axis=1)
        u = self.rng.random(count) * cumulative[:, -1]
        k = np.minimum((cumulative <= u[:, None]).sum(axis=1), len(self._I) - 1)
        theta = self.rng.uniform(-math.pi, math.pi, count)
        i, j = self._I[k], self._J[k]

        vi, vj = _rotate(self.velocities[rows, i], self.velocities[rows, j], theta)
        self.velocities[rows, i] = vi
        self.velocities[rows, j] = vj
        self.times += dt
        self.collisions += 1

        if self.collisions % RENORMALIZE_EVERY == 0:
            self.renormalize()
            self._recompute()
        elif self.collisions % RECOMPUTE_EVERY == 0:
            self._recompute()
        elif self.gamma != 0.0:
            self._update_rates(rows, i, j, k)
        return dt, i, j, theta


# ===== SECTION 3: Observables =====

@dataclass(frozen=True)
class ObservableFn:
    """f(V) = sum_j phi(V_j / sqrt(E)) for a trial profile phi."""
    profile: TrialProfile
    energy_per_particle: float = 1.0
    name: str = 'custom'

    def __call__(self, velocities: np.ndarray) -> np.ndarray:
        t = np.asarray(velocities, dtype=float) ** 2 / self.energy_per_particle
        return np.sum(self.profile.as_polynomial()(t), axis=-1)


def resolve_observable(spec: SphereSpec, observable: ObservableChoice) -> ObservableFn:
    """Turn 'f0' or an orthogonalized profile into an ObservableFn."""
    if isinstance(observable, str):
        if observable != 'f0':
            raise DomainError(f"unknown observable '{observable}'")
        return ObservableFn(f0_profile(spec.n_particles), spec.energy_per_particle, 'f0')
    if observable.N != spec.n_particles:
        raise DomainError("profile and sphere disagree on N")
    if not observable.orthogonalized:
        raise DomainError("observable profile must be orthogonalized")
    if observable.is_zero:
        raise DegenerateProfileError("the zero observable has no decay rate")
    return ObservableFn(observable, spec.energy_per_particle)


# ===== SECTION 4: Gap Estimation =====

@dataclass
class GapEstimate:
    """Decay rate of one observable's stationary autocorrelation."""
    rate: float
    stderr: float
    fit_window: Tuple[float, float]
    observable: str
    window_points: int = 0
    residual_rms: float = 0.0
    replicas: int = 0
    times: List[float] = field(default_factory=list)
    autocorrelation: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'rate': self.rate,
            'stderr': self.stderr,
            'fit_window': list(self.fit_window),
            'observable': self.observable,
            'window_points': self.window_points,
            'residual_rms': self.residual_rms,
            'replicas': self.replicas,
            'times': list(self.times),
            'autocorrelation': list(self.autocorrelation),
        }


def _simulate_batch(spec: SphereSpec, gamma: float, observable: ObservableFn, grid: np.ndarray,
                    count: int, seed: Sequence[int]) -> np.ndarray:
    """Observable values of count equilibrium replicas sampled on grid, shape (count, len(grid))."""
    start = sample_uniform(spec, list(seed) + [0], count)
    walk = KacWalk(spec, gamma, start, np.random.default_rng(list(seed) + [1]))
    values = np.empty((count, len(grid)))
    next_index = np.zeros(count, dtype=int)
    current = observable(walk.velocities)

    while np.any(next_index < len(grid)):
        walk.advance()
        # the state before the jump holds on [old_time, new_time)
        while True:
            pending = next_index < len(grid)
            due = np.zeros(count, dtype=bool)
            due[pending] = grid[next_index[pending]] < walk.times[pending]
            if not due.any():
                break
            rows = np.nonzero(due)[0]
            values[rows, next_index[rows]] = current[rows]
            next_index[rows] += 1
        current = observable(walk.velocities)
    return values


def _window(ratio: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Contiguous indices where lo <= C/C0 <= hi, cut at the first drop below lo."""
    start = int(np.argmax(ratio <= hi)) if np.any(ratio <= hi) else len(ratio)
    stop = start
    while stop < len(ratio) and ratio[stop] >= lo:
        stop += 1
    return np.arange(start, stop)


def _fit_rate(times: np.ndarray, corr: np.ndarray, sigma: np.ndarray,
              index: np.ndarray) -> Tuple[float, float]:
    """Weighted least squares of log C(t) on the window; returns (rate, weighted residual rms)."""
    c = corr[index]
    if np.any(c <= 0):
        raise NumericalError("autocorrelation is not positive on the fit window")
    weights = c / np.maximum(sigma[index], np.finfo(float).tiny)
    slope, intercept = np.polyfit(times[index], np.log(c), 1, w=weights)
    residual = (np.log(c) - (slope * times[index] + intercept)) * weights
    return -float(slope), float(np.sqrt(np.mean(residual ** 2)))


def estimate_gap_autocorr(spec: SphereSpec, gamma: float, observable: ObservableChoice = 'f0',
                          horizon: float = 4.0, replicas: int = 1000, rng_seed: int = 0,
                          grid_points: int = DEFAULT_GRID_POINTS,
                          window: Tuple[float, float] = DEFAULT_FIT_WINDOW,
                          workers: int = 1) -> GapEstimate:
    """
    Estimate the decay rate of <f(V(0)) f(V(t))> for an equilibrium walk.

    Replicas start from uniform samples on the sphere. C(t) is averaged over
    replicas on a uniform grid of [0, horizon], and log C(t) is fitted by
    weighted least squares where C(t)/C(0) lies in the window. The rate is an
    eigenvalue the observable overlaps with, not a bound on the gap.

    Args:
        spec: Sphere (N, E)
        gamma: Rate exponent in [0, 1]
        observable: 'f0' or an orthogonalized TrialProfile
        horizon: Final time of the grid
        replicas: Number of independent replicas (>= 100)
        rng_seed: Seed; batch b uses [rng_seed, b, ...]
        grid_points: Number of grid intervals
        window: (lo, hi) bounds on C(t)/C(0) for the fit
        workers: Threads running replica batches

    Returns:
        GapEstimate with jackknife standard error

    Raises:
        DomainError: on invalid arguments
        NumericalError: if the fit window holds fewer than 3 grid points
    """
    _check_gamma(gamma)
    if replicas < 100:
        raise DomainError("replicas must be >= 100")
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if grid_points < 4:
        raise DomainError("grid_points must be >= 4")
    lo, hi = window
    if not 0 < lo < hi < 1:
        raise DomainError("fit window must satisfy 0 < lo < hi < 1")
    obs = resolve_observable(spec, observable)
    grid = np.linspace(0.0, horizon, grid_points + 1)

    sizes = [min(BATCH_REPLICAS, replicas - s) for s in range(0, replicas, BATCH_REPLICAS)]
    jobs = [(size, (rng_seed, b)) for b, size in enumerate(sizes)]
    def run(job):
        return _simulate_batch(spec, gamma, obs, grid, job[0], job[1])

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, jobs))
    else:
        blocks = [run(job) for job in jobs]
    values = np.concatenate(blocks, axis=0)

    products = values[:, [0]] * values
    corr = products.mean(axis=0)
    sigma = products.std(axis=0, ddof=1) / math.sqrt(replicas)
    if not corr[0] > 0:
        raise NumericalError("observable has zero variance")
    index = _window(corr / corr[0], lo, hi)
    if len(index) < 3:
        raise NumericalError(
            f"fit window holds {len(index)} grid points; increase horizon, grid_points or replicas")
    rate, residual_rms = _fit_rate(grid, corr, sigma, index)

    groups = min(JACKKNIFE_GROUPS, replicas)
    bounds = np.linspace(0, replicas, groups + 1).astype(int)
    total = products.sum(axis=0)
    leave_out = []
    for g in range(groups):
        part = products[bounds[g]:bounds[g + 1]]
        rest = replicas - len(part)
        corr_g = (total - part.sum(axis=0)) / rest
        leave_out.append(_fit_rate(grid, corr_g, sigma, index)[0])
    leave_out = np.array(leave_out)
    stderr = math.sqrt((groups - 1) / groups * float(np.sum((leave_out - leave_out.mean()) ** 2)))

    if not rate > 0:
        raise NumericalError(f"fitted rate {rate:.6g} is not positive")
    if not stderr > 0:
        raise NumericalError("jackknife standard error vanished")
    return GapEstimate(
        rate=rate,
        stderr=stderr,
        fit_window=(float(grid[index[0]]), float(grid[index[-1]])),
        observable=obs.name,
        window_points=len(index),
        residual_rms=residual_rms,
        replicas=replicas,
        times=grid.tolist(),
        autocorrelation=corr.tolist(),
    )


# ===== SECTION 5: Dirichlet Quotients =====

def dirichlet_mc(spec: SphereSpec, gamma: float, profile: TrialProfile, samples: int = MIN_DIRICHLET_SAMPLES,
                 rng_seed: int = 0) -> Tuple[float, float]:
    """
    Monte Carlo estimate of E_N(f, f) / ||f||^2 for f = sum_k phi(v_k / sqrt(E)).

    Each sample averages the pair-reduced integrand
        N (w1^2 + w2^2)^gamma (f - [f]^{(1,2)})^2
    over the disjoint pairs (0, 1), (2, 3), ...; the rotation average inside
    [f] is done exactly. ||f||^2 is exact.

    Returns:
        (quotient, stderr)

    Raises:
        DegenerateProfileError: for the zero profile
    """
    _check_gamma(gamma)
    if samples < MIN_DIRICHLET_SAMPLES:
        raise DomainError(f"samples must be >= {MIN_DIRICHLET_SAMPLES}")
    if profile.is_zero:
        raise DegenerateProfileError("quotient of the zero profile is undefined")
    obs = resolve_observable(spec, profile)
    norm = profile_norm_sq(profile)
    if norm <= 0:
        raise DegenerateProfileError("profile induces the zero function on the sphere")

    N, E = spec.n_particles, spec.energy_per_particle
    coefs = profile.coefficients[None, :]
    pairs = N // 2
    total, total_sq, done, batch = 0.0, 0.0, 0, 0
    while done < samples:
        count = min(MC_BATCH, samples - done)
        points = sample_uniform(spec, [rng_seed, batch], count)
        integrand = np.zeros(count)
        for p in range(pairs):
            w1, w2 = points[:, 2 * p], points[:, 2 * p + 1]
            h = pair_residuals(coefs, w1 / math.sqrt(E), w2 / math.sqrt(E))[0]
            integrand += (w1 ** 2 + w2 ** 2) ** gamma * h ** 2
        integrand *= N / pairs
        total += float(np.sum(integrand))
        total_sq += float(np.sum(integrand ** 2))
        done += count
        batch += 1
    mean = total / samples
    variance = max(total_sq / samples - mean ** 2, 0.0)
    return mean / norm, math.sqrt(variance / samples) / norm


# ===== SECTION 6: Trajectories =====

def record_trajectory(spec: SphereSpec, gamma: float, observable: ObservableChoice = 'f0',
                      collisions: int = 1000, rng_seed: int = 0) -> List[Tuple]:
    """
    Simulate one equilibrium replica and log every collision.

    Returns:
        Rows (time, collision_index, i, j, theta, observable_value); row 0 is
        the starting state with i = j = -1 and theta = 0
    """
    if collisions < 1:
        raise DomainError("collisions must be >= 1")
    obs = resolve_observable(spec, observable)
    start = sample_uniform(spec, [rng_seed, 0, 0], 1)
    walk = KacWalk(spec, gamma, start, np.random.default_rng([rng_seed, 0, 1]))
    rows = [(0.0, 0, -1, -1, 0.0, float(obs(walk.velocities)[0]))]
    for n in range(1, collisions + 1):
        _, i, j, theta = walk.advance()
        rows.append((float(walk.times[0]), n, int(i[0]), int(j[0]), float(theta[0]),
                     float(obs(walk.velocities)[0])))
    return rows
