"""
Sphere - Geometry and measure theory of the energy sphere.

The state space of the Kac walk is S_{N,E} = {v in R^N : (1/N) sum v_j^2 = E},
a sphere of radius R = sqrt(N E) carrying the uniform probability measure.

Key Features:
- Uniform sampling by normalizing Gaussian vectors
- Marginal densities nu_{N,m} of m coordinates and their Gaussian comparisons
- Gauss-Jacobi quadrature (Golub-Welsch) against nu_{N,1} and nu_{N,2}
- Closed-form monomial moments
- Exact action of the averaging operator K and of pair projections on
  even polynomials
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import eigh_tridiagonal
from scipy.special import betainc, gammaln

from .errors import DomainError

MAX_MOMENT_ORDER = 60
MAX_K_DEGREE = 16

PolynomialLike = Union[Polynomial, Sequence[float]]


# ===== SECTION 1: Domain Types =====

@dataclass(frozen=True)
class SphereSpec:
    """N particles with energy E per particle."""
    n_particles: int
    energy_per_particle: float = 1.0

    def __post_init__(self) -> None:
        if self.n_particles < 2:
            raise DomainError(f"N must be >= 2, got {self.n_particles}")
        if not self.energy_per_particle > 0:
            raise DomainError(f"E must be positive, got {self.energy_per_particle}")

    @property
    def radius_sq(self) -> float:
        return self.n_particles * self.energy_per_particle

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)


@dataclass(frozen=True)
class MarginalDensity:
    """Law nu_{N,m} of m coordinates of a uniform point on the sphere."""
    sphere: SphereSpec
    m: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.m <= self.sphere.n_particles - 1:
            raise DomainError(f"marginal dimension m={self.m} must lie in [1, N-1]")

    @property
    def exponent(self) -> float:
        """Power of (1 - |w|^2/R^2) in the density."""
        return (self.sphere.n_particles - self.m - 2) / 2

    @property
    def normalization(self) -> float:
        """Gamma(N/2) / (Gamma((N-m)/2) (pi R^2)^{m/2}); K_N when m=1 and E=1."""
        N, m = self.sphere.n_particles, self.m
        return math.exp(gammaln(N / 2) - gammaln((N - m) / 2) - (m / 2) * math.log(math.pi * self.sphere.radius_sq))

    def pdf(self, points: np.ndarray) -> np.ndarray:
        """
        Density at many points.

        Args:
            points: shape (k, m), or (k,) when m=1

        Returns:
            Array of k density values; 0 on and outside the ball of radius R
        """
        pts = np.asarray(points, dtype=float)
        if self.m == 1 and pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.m:
            raise DomainError(f"expected points with {self.m} coordinates")
        u = 1.0 - np.sum(pts ** 2, axis=1) / self.sphere.radius_sq
        inside = u > 0
        out = np.zeros(pts.shape[0])
        out[inside] = self.normalization * u[inside] ** self.exponent
        return out


@dataclass
class SpherePoint:
    """A velocity vector known to lie on its energy sphere."""
    velocities: np.ndarray

    @classmethod
    def on_sphere(cls, spec: SphereSpec, vector: Sequence[float]) -> 'SpherePoint':
        """Radially project a nonzero vector onto the sphere of spec."""
        v = np.asarray(vector, dtype=float)
        if v.shape != (spec.n_particles,):
            raise DomainError(f"expected {spec.n_particles} velocities")
        norm = float(np.linalg.norm(v))
        if norm == 0:
            raise DomainError("cannot project the zero vector onto the sphere")
        return cls(v * (spec.radius / norm))

    @property
    def energy(self) -> float:
        return float(np.mean(self.velocities ** 2))

    def check(self, spec: SphereSpec, rtol: float = 1e-12) -> bool:
        return abs(self.energy - spec.energy_per_particle) <= rtol * spec.energy_per_particle


# ===== SECTION 2: Sampling =====

def sample_uniform(spec: SphereSpec, rng_seed: Union[int, Sequence[int]], count: int) -> np.ndarray:
    """
    Draw i.i.d. uniform points on the sphere.

    Args:
        spec: Sphere to sample
        rng_seed: Seed (or seed sequence entropy) for numpy's default generator
        count: Number of points

    Returns:
        Array of shape (count, N); each row is one point
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    g = rng.standard_normal((count, spec.n_particles))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g * (spec.radius / norms)


# ===== SECTION 3: Marginals =====

def marginal_density_eval(den: MarginalDensity, w: Sequence[float]) -> float:
    """Density of nu_{N,m} at a single point w of length m."""
    point = np.atleast_1d(np.asarray(w, dtype=float))
    if point.shape != (den.m,):
        raise DomainError(f"expected a point with {den.m} coordinates")
    return float(den.pdf(point[None, :])[0])


def marginal_cdf(den: MarginalDensity, v: np.ndarray) -> np.ndarray:
    """CDF of nu_{N,1}; v^2/R^2 is Beta(1/2, (N-1)/2)."""
    if den.m != 1:
        raise DomainError("CDF is available for m=1 only")
    v = np.asarray(v, dtype=float)
    x = np.clip(v ** 2 / den.sphere.radius_sq, 0.0, 1.0)
    half = 0.5 * betainc(0.5, (den.sphere.n_particles - 1) / 2, x)
    return 0.5 + np.sign(v) * half


def maxwellian(v: np.ndarray) -> np.ndarray:
    """Unit Maxwellian M(v) = exp(-v^2/2)/sqrt(2 pi)."""
    v = np.asarray(v, dtype=float)
    return np.exp(-v ** 2 / 2) / math.sqrt(2 * math.pi)


def _rho(N: int, v: np.ndarray) -> np.ndarray:
    return MarginalDensity(SphereSpec(N), 1).pdf(np.asarray(v, dtype=float).ravel())


def gaussian_domination_check(N: int, grid: Sequence[float]) -> float:
    """
    Largest ratio rho_N(v)/M(v) over a grid.

    Points outside the support contribute 0. For N >= 10 the ratio stays
    below e^2.
    """
    if N < 5:
        raise DomainError("Gaussian domination is only stated for N >= 5")
    v = np.asarray(grid, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    rho = _rho(N, v)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        ratio = np.where(rho > 0, rho / maxwellian(v), 0.0)
    return float(np.max(ratio))


def gaussian_envelope(N: int, v: np.ndarray) -> np.ndarray:
    """Upper envelope K_N sqrt(2 pi) exp(3 v^2 / 2N) M(v) of rho_N."""
    v = np.asarray(v, dtype=float)
    k_n = MarginalDensity(SphereSpec(N), 1).normalization
    return k_n * math.sqrt(2 * math.pi) * np.exp(3 * v ** 2 / (2 * N)) * maxwellian(v)


def gaussian_lower_ratio(N: int, v: np.ndarray) -> np.ndarray:
    """Lower estimate K_N sqrt(2 pi) exp(-v^4 / 2N) of rho_N/M on |v| <= N^{1/4}."""
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) > N ** 0.25):
        raise DomainError("lower ratio estimate holds for |v| <= N^{1/4}")
    k_n = MarginalDensity(SphereSpec(N), 1).normalization
    return k_n * math.sqrt(2 * math.pi) * np.exp(-v ** 4 / (2 * N))


def local_gaussian_deviation(N: int, grid: Sequence[float], relative: bool = False) -> float:
    """sup over grid of |rho_N - M| (or |rho_N/M - 1| when relative)."""
    v = np.asarray(grid, dtype=float).ravel()
    rho = _rho(N, v)
    m = maxwellian(v)
    if relative:
        return float(np.max(np.abs(rho / m - 1.0)))
    return float(np.max(np.abs(rho - m)))


# ===== SECTION 4: Energy Weights =====

def weight_average(points: np.ndarray, gamma: float) -> np.ndarray:
    """
    W(v) = (1/N) sum_k ((N - v_k^2)/(N-1))^gamma for points on the E=1 sphere.

    Args:
        points: shape (count, N)

    Returns:
        One value per point
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    N = pts.shape[1]
    base = np.clip((N - pts ** 2) / (N - 1), 0.0, None)
    return np.mean(base ** gamma, axis=1)


def weight_jensen_bound(N: int, gamma: float) -> float:
    """((N-1)/N)^{1-gamma}, the lower Jensen bound on W."""
    return ((N - 1) / N) ** (1 - gamma)


def squeeze_bounds(N: int, gamma: float) -> Tuple[float, float]:
    """Linear bounds bracketing ((N-1)/N)^{1-gamma} for gamma in [0, 1]."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("squeeze bounds require gamma in [0, 1]")
    if N < 2:
        raise DomainError("N must be >= 2")
    return 1 - (1 - gamma) / (N - 1), 1 - (1 - gamma) / N


# ===== SECTION 5: Moments and Quadrature =====

def moment_monomial(spec: SphereSpec, exponents: Sequence[int]) -> float:
    """
    Exact integral of prod v_i^{e_i} against the uniform measure.

    With e_i = 2 a_i and s = sum a_i:
        R^{2s} Gamma(N/2)/Gamma(N/2 + s) prod Gamma(a_i + 1/2)/Gamma(1/2)

    Args:
        spec: Sphere
        exponents: Powers e_i >= 0, at most N of them

    Returns:
        The moment (0 if any exponent is odd)
    """
    exps = [int(e) for e in exponents]
    if len(exps) > spec.n_particles:
        raise DomainError("more exponents than coordinates")
    if any(e < 0 for e in exps):
        raise DomainError("exponents must be non-negative")
    if any(e % 2 for e in exps):
        return 0.0
    halves = [e // 2 for e in exps if e]
    s = sum(halves)
    if s > MAX_MOMENT_ORDER:
        raise DomainError(f"total order {s} exceeds {MAX_MOMENT_ORDER}")
    N = spec.n_particles
    log_value = gammaln(N / 2) - gammaln(N / 2 + s)
    log_value += sum(gammaln(a + 0.5) - gammaln(0.5) for a in halves)
    return float(spec.radius_sq ** s * math.exp(log_value))


def sphere_moment_ratio(dim: int, k: int) -> float:
    """E[y^{2k}] for one coordinate of a uniform point on the unit sphere in R^dim."""
    if dim < 1 or k < 0:
        raise DomainError("dim must be >= 1 and k >= 0")
    value = 1.0
    for i in range(k):
        value *= (i + 0.5) / (dim / 2 + i)
    return value


def _jacobi_recurrence(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Monic recurrence coefficients for (1-x)^a (1+x)^b on [-1, 1]."""
    alpha = np.empty(n)
    beta = np.empty(max(n - 1, 0))
    ab = a + b
    alpha[0] = (b - a) / (ab + 2)
    for k in range(1, n):
        alpha[k] = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    for k in range(1, n):
        if k == 1:
            # (1 + a + b) cancels
            beta[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
        else:
            beta[k - 1] = (4 * k * (k + a) * (k + b) * (k + ab)
                           / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1)))
    return alpha, beta


def gauss_jacobi(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss rule on [0, 1] for the weight t^beta (1-t)^alpha.

    Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes, squared
    first eigenvector components the weights.

    Args:
        n: Number of nodes
        alpha: Exponent at t = 1 (> -1)
        beta: Exponent at t = 0 (> -1)

    Returns:
        (nodes, weights) with weights summing to 1
    """
    if n < 1:
        raise DomainError("need at least one node")
    if alpha <= -1 or beta <= -1:
        raise DomainError("Jacobi exponents must exceed -1")
    diag, off = _jacobi_recurrence(n, alpha, beta)
    if n == 1:
        return np.array([(diag[0] + 1) / 2]), np.array([1.0])
    x, vectors = eigh_tridiagonal(diag, np.sqrt(off))
    weights = vectors[0, :] ** 2
    return (x + 1) / 2, weights / weights.sum()


def quadrature_rule(den: MarginalDensity, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Deterministic integration rule for nu_{N,m}, m in {1, 2}.

    m=1: Gauss-Jacobi in v/R, exact for polynomials of degree <= 2 nodes - 1.
    m=2: Gauss-Jacobi in t = |w|^2/R^2 times a 2*nodes point angular
    trapezoid; exact for polynomials in (w1, w2) of degree <= 2 nodes - 1.

    Returns:
        (points, weights); points has shape (k,) for m=1, (k, 2) for m=2
    """
    if not 4 <= nodes <= 512:
        raise DomainError("nodes must lie in [4, 512]")
    R = den.sphere.radius
    N = den.sphere.n_particles
    if den.m == 1:
        t, w = gauss_jacobi(nodes, (N - 3) / 2, (N - 3) / 2)
        return R * (2 * t - 1), w
    if den.m == 2:
        t, w = gauss_jacobi(nodes, (N - 4) / 2, 0.0)
        angles = 2 * math.pi * np.arange(2 * nodes) / (2 * nodes)
        r = R * np.sqrt(t)
        points = np.stack([
            np.outer(r, np.cos(angles)).ravel(),
            np.outer(r, np.sin(angles)).ravel(),
        ], axis=1)
        weights = np.repeat(w / (2 * nodes), 2 * nodes)
        return points, weights
    raise DomainError(f"quadrature is available for m in {{1, 2}}, got {den.m}")


# ===== SECTION 6: Averaging Operators =====

def as_polynomial(poly: PolynomialLike) -> Polynomial:
    """Polynomial from a Polynomial or an ascending coefficient sequence."""
    if isinstance(poly, Polynomial):
        return poly
    return Polynomial(np.asarray(poly, dtype=float))


def _even_coefficients(poly: PolynomialLike, max_degree: int) -> np.ndarray:
    """Coefficients c_k of v^{2k}; odd parts are dropped."""
    coef = np.asarray(as_polynomial(poly).coef, dtype=float)
    coef = np.trim_zeros(coef, 'b') if np.any(coef) else np.zeros(1)
    if coef.size - 1 > max_degree:
        raise DomainError(f"degree {coef.size - 1} exceeds {max_degree}")
    return coef[::2]


def k_apply_polynomial(spec: SphereSpec, poly: PolynomialLike) -> Polynomial:
    """
    Apply K, the average of phi(v_2) given v_1 = v, to an even polynomial.

    K v^{2k} = c_k (R^2 - v^2)^k with c_k = E[y^{2k}] on the unit sphere in
    R^{N-1}. Odd monomials lie in the kernel.

    Args:
        spec: Sphere
        poly: Polynomial in v (ascending coefficients), degree <= 16

    Returns:
        K poly as a polynomial in v
    """
    c = _even_coefficients(poly, MAX_K_DEGREE)
    base = Polynomial([spec.radius_sq, 0.0, -1.0])
    result = Polynomial([0.0])
    for k, ck in enumerate(c):
        if ck:
            result = result + ck * sphere_moment_ratio(spec.n_particles - 1, k) * base ** k
    return result


def project_pair_polynomial(spec: SphereSpec, k_exponent: int,
                            target_pair: Tuple[int, int] = (0, 1)) -> Polynomial:
    """
    Conditional expectation of v_k^{k_exponent} given (v_j, v_l).

    Unlike k_apply_polynomial, the result is a polynomial in
    s = v_j^2 + v_l^2, not in a single velocity: it is c (R^2 - s)^p with
    c = E[y^{2p}] on the unit sphere in R^{N-2}, p = k_exponent/2. Evaluate
    it at v_j**2 + v_l**2.

    Returns:
        Polynomial in s (ascending coefficients)
    """
    N = spec.n_particles
    if N < 3:
        raise DomainError("pair projection of a third coordinate needs N >= 3")
    j, l = target_pair
    if j == l or not (0 <= j < N and 0 <= l < N):
        raise DomainError(f"invalid target pair {target_pair}")
    if k_exponent < 0 or k_exponent % 2 or k_exponent > MAX_K_DEGREE:
        raise DomainError("k_exponent must be even and <= 16")
    p = k_exponent // 2
    return sphere_moment_ratio(N - 2, p) * Polynomial([spec.radius_sq, -1.0]) ** p
