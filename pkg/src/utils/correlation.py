"""
Correlation - Spectra of the m-particle correlation operators.

K_{(N,m)} maps a function of one block of m coordinates to its conditional
average over a disjoint block. On radial polynomials (in s = |w|^2) it acts
diagonally in the nu_{N,m}-orthogonal basis with eigenvalues

    kappa_{N,m}(k) = (-1)^k (m/2)_k / ((N-m)/2)_k

which quantify how close two disjoint blocks are to independent.
"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import cholesky, solve_triangular

from .errors import BoundViolation, DomainError, NumericalError
from .sphere import (MarginalDensity, PolynomialLike, SphereSpec, as_polynomial, quadrature_rule,
                     sample_uniform)

DEFAULT_K_MAX = 20
MC_BATCH = 100_000


# ===== SECTION 1: Eigenvalues =====

def _check_block(N: int, m: int) -> None:
    if N < 3:
        raise DomainError("correlation operators need N >= 3")
    if m < 1 or 2 * m > N:
        raise DomainError(f"block size m={m} must satisfy 1 <= m <= N/2")


def kappa(N: int, m: int, k: int) -> float:
    """
    Eigenvalue kappa_{N,m}(k) of K_{(N,m)}.

    Args:
        N: Number of particles (>= 3)
        m: Block size, 1 <= m <= N/2
        k: Radial degree (>= 0)

    Returns:
        (-1)^k prod_{i<k} (m/2 + i) / ((N-m)/2 + i)
    """
    _check_block(N, m)
    if k < 0:
        raise DomainError("k must be >= 0")
    value = 1.0
    for i in range(k):
        value *= (m / 2 + i) / ((N - m) / 2 + i)
    return -value if k % 2 else value


@dataclass(frozen=True)
class CorrelationSpectrum:
    """kappa_{N,m}(k) for k = 0..k_max."""
    N: int
    m: int
    eigenvalues: Tuple[float, ...]

    @classmethod
    def build(cls, N: int, m: int, k_max: int = DEFAULT_K_MAX) -> 'CorrelationSpectrum':
        spectrum = cls(N, m, tuple(kappa(N, m, k) for k in range(k_max + 1)))
        spectrum.validate()
        return spectrum

    def validate(self) -> None:
        """
        Check kappa(0) = 1, alternating signs and decreasing magnitudes.

        Magnitudes are strictly decreasing when 2m < N and all equal to 1
        when 2m = N.
        """
        ev = self.eigenvalues
        if not ev or ev[0] != 1.0:
            raise BoundViolation("kappa(0) must equal 1")
        strict = 2 * self.m < self.N
        for k in range(len(ev) - 1):
            if ev[k + 1] != 0 and np.sign(ev[k + 1]) != (-1) ** (k + 1):
                raise BoundViolation(f"sign of kappa({k + 1}) does not alternate")
            a, b = abs(ev[k]), abs(ev[k + 1])
            if (strict and not a > b) or (not strict and b > a):
                raise BoundViolation(f"|kappa| is not decreasing at k={k}")

    def to_dict(self) -> dict:
        return {'N': self.N, 'm': self.m, 'eigenvalues': list(self.eigenvalues)}


# ===== SECTION 2: Radial Polynomials =====

def _radial_rule(N: int, m: int, degree: int, E: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes in s = |w|^2 and weights, exact for polynomials in s of degree <= 2*degree."""
    den = MarginalDensity(SphereSpec(N, E), m)
    points, weights = quadrature_rule(den, min(512, max(4, 2 * degree + 4)))
    s = points ** 2 if m == 1 else np.sum(points ** 2, axis=1)
    return s, weights


def radial_inner(N: int, m: int, f: Polynomial, g: Polynomial, E: float = 1.0) -> float:
    """<f, g> under nu_{N,m} for polynomials in s."""
    s, w = _radial_rule(N, m, max(f.degree(), g.degree()), E)
    return float(np.dot(w, f(s) * g(s)))


def radial_orthonormal_basis(N: int, m: int, degree: int, E: float = 1.0) -> List[Polynomial]:
    """
    Orthonormal polynomials p_0..p_degree in s under nu_{N,m}.

    Gram-Schmidt on {1, s, s^2, ...} done as a Cholesky factorization of the
    quadrature Gram matrix. p_k is an eigenfunction of K_{(N,m)} with
    eigenvalue kappa_{N,m}(k).
    """
    if degree < 0:
        raise DomainError("degree must be >= 0")
    s, w = _radial_rule(N, m, degree, E)
    powers = np.vander(s, degree + 1, increasing=True)
    gram = powers.T @ (w[:, None] * powers)
    try:
        lower = cholesky(gram, lower=True)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"radial Gram matrix of degree {degree} is not positive definite") from e
    coefficients = solve_triangular(lower, np.eye(degree + 1), lower=True)
    return [Polynomial(row[:k + 1]) for k, row in enumerate(coefficients)]


def k_apply_radial(N: int, m: int, poly: PolynomialLike, E: float = 1.0) -> Polynomial:
    """
    Apply K_{(N,m)} to a polynomial in s = |w|^2.

    s^k maps to E[Y^k] (R^2 - s)^k with Y ~ Beta(m/2, (N-2m)/2), so
    E[Y^k] = |kappa_{N,m}(k)|.
    """
    _check_block(N, m)
    coef = as_polynomial(poly).coef
    base = Polynomial([N * E, -1.0])
    result = Polynomial([0.0])
    for k, ck in enumerate(coef):
        if ck:
            result = result + ck * abs(kappa(N, m, k)) * base ** k
    return result


def _expand(poly: Polynomial, basis: List[Polynomial], N: int, m: int, E: float) -> np.ndarray:
    return np.array([radial_inner(N, m, poly, p, E) for p in basis])


# ===== SECTION 3: Near-Independence Bounds =====

@dataclass
class CorrelationCheck:
    """Outcome of comparing a block correlation with its bound."""
    lhs_mc: float
    stderr: float
    lhs_exact: float
    rhs: float
    holds: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            'lhs_mc': self.lhs_mc,
            'stderr': self.stderr,
            'lhs_exact': self.lhs_exact,
            'rhs': self.rhs,
            'holds': self.holds,
        }


def correlation_bound_check(N: int, m: int, f: Polynomial, g: Polynomial, rng_seed: int,
                            samples: int = 1_000_000, E: float = 1.0) -> CorrelationCheck:
    """
    Compare |<f(pi_A) g(pi_B)>| with (m/(N-m)) ||f|| ||g||.

    f and g are radial polynomials (in s = |w|^2) of the first and second
    m-block. The correlation is estimated by Monte Carlo and computed exactly
    through the eigen-expansion sum_k kappa(k) a_k b_k.

    Args:
        N: Number of particles
        m: Block size (1 or 2)
        f: Mean-zero polynomial in s
        g: Mean-zero polynomial in s
        rng_seed: Sampler seed
        samples: Monte Carlo sample count

    Returns:
        CorrelationCheck

    Raises:
        DomainError: if f or g is not mean-zero
    """
    f, g = as_polynomial(f), as_polynomial(g)
    one = Polynomial([1.0])
    for name, p in (('f', f), ('g', g)):
        norm = math.sqrt(max(radial_inner(N, m, p, p, E), 0.0))
        if abs(radial_inner(N, m, p, one, E)) > 1e-8 * max(1.0, norm):
            raise DomainError(f"{name} must have mean zero under nu_{{N,m}}")

    f_norm = math.sqrt(radial_inner(N, m, f, f, E))
    g_norm = math.sqrt(radial_inner(N, m, g, g, E))
    rhs = m / (N - m) * f_norm * g_norm

    degree = max(f.degree(), g.degree(), 0)
    basis = radial_orthonormal_basis(N, m, degree, E)
    a = _expand(f, basis, N, m, E)
    b = _expand(g, basis, N, m, E)
    lhs_exact = abs(float(sum(kappa(N, m, k) * a[k] * b[k] for k in range(degree + 1))))

    spec = SphereSpec(N, E)
    total, total_sq, done = 0.0, 0.0, 0
    batch_index = 0
    while done < samples:
        count = min(MC_BATCH, samples - done)
        points = sample_uniform(spec, [rng_seed, batch_index], count)
        s_a = np.sum(points[:, :m] ** 2, axis=1)
        s_b = np.sum(points[:, m:2 * m] ** 2, axis=1)
        values = f(s_a) * g(s_b)
        total += float(np.sum(values))
        total_sq += float(np.sum(values ** 2))
        done += count
        batch_index += 1
    mean = total / samples
    variance = max(total_sq / samples - mean ** 2, 0.0)
    stderr = math.sqrt(variance / samples)

    holds = abs(mean) <= rhs + 3 * stderr and lhs_exact <= rhs * (1 + 1e-10) + 1e-14
    return CorrelationCheck(abs(mean), stderr, lhs_exact, rhs, holds)


def projection_sum_bound(N: int, order: int) -> float:
    """
    Closed-form bound on the largest nontrivial eigenvalue of the averaged
    projections onto functions of one particle (order 1) or of one pair
    (order 2).
    """
    if order == 1:
        if N < 2:
            raise DomainError("order 1 needs N >= 2")
        return 1 / N + 3 / (N * (N + 1))
    if order == 2:
        if N < 5:
            raise DomainError("order 2 needs N >= 5 (the expression has poles at N = 2 and N = 4)")
        return 2 / (N - 1) + 8 * N / ((N - 2) * (N - 4) ** 2)
    raise DomainError(f"order must be 1 or 2, got {order}")


def pair_norm_equivalence(N: int, phi: Polynomial) -> Tuple[float, float, float]:
    """
    Sandwich the norm of f = sum_j phi(v_j) on the E=1 sphere.

    ||f||^2 = N ||phi||^2 + N(N-1) <phi, K phi>, and for phi orthogonal to 1
    and v^2 it lies between N(1 - 15/((N+1)(N+3))) ||phi||^2 and
    N(1 + 3/(N+1)) ||phi||^2.

    Args:
        N: Number of particles (>= 3)
        phi: Polynomial in t = v^2

    Returns:
        (lower, value, upper)

    Raises:
        DomainError: if phi is not orthogonal to 1 and v^2
        BoundViolation: if the computed norm leaves the sandwich
    """
    phi = as_polynomial(phi)
    norm_sq = radial_inner(N, 1, phi, phi)
    if norm_sq == 0.0:
        return 0.0, 0.0, 0.0
    scale = max(1.0, math.sqrt(norm_sq))
    for p in (Polynomial([1.0]), Polynomial([0.0, 1.0])):
        if abs(radial_inner(N, 1, phi, p)) > 1e-8 * scale:
            raise DomainError("phi must be orthogonal to 1 and v^2")

    cross = radial_inner(N, 1, phi, k_apply_radial(N, 1, phi))
    value = N * norm_sq + N * (N - 1) * cross
    lower = N * (1 - 15 / ((N + 1) * (N + 3))) * norm_sq
    upper = N * (1 + 3 / (N + 1)) * norm_sq
    slack = 1e-9 * upper
    if not lower - slack <= value <= upper + slack:
        raise BoundViolation(f"norm {value:.6g} outside [{lower:.6g}, {upper:.6g}]")
    return lower, value, upper
