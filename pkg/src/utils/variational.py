"""
Variational - Upper bounds and exact values for the Kac gaps.

Key Features:
- Even single-particle trial profiles phi(v) = sum_j c_j v^{2j} defining
  f = sum_k phi(v_k)
- Exact Dirichlet form of such f via the pair reduction and polar quadrature
- Rayleigh-Ritz minimization over profile spaces (upper bounds on the
  restricted gap)
- Hermite-Galerkin estimate of the linearized gap
- Exact gamma = 0 spectrum on symmetric polynomials

Profiles are polynomials in t = v^2; all inner products are taken against
the one-particle marginal of the E = 1 sphere.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import hermite_e
from scipy.linalg import eigh
from scipy.special import comb, gammaln, roots_genlaguerre

from . import console
from .errors import DegenerateProfileError, DomainError, NumericalError
from .sphere import SphereSpec, gauss_jacobi, k_apply_polynomial, moment_monomial

ORTHOGONALITY_TOL = 1e-10
PRUNE_TOL = 1e-11


# ===== SECTION 1: Trial Profiles =====

@dataclass
class TrialProfile:
    """phi(v) = sum_j coefficients[j] v^{2j} for an N-particle system."""
    coefficients: np.ndarray
    N: int
    orthogonalized: bool = False

    def __post_init__(self) -> None:
        self.coefficients = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if self.N < 2:
            raise DomainError("N must be >= 2")

    @classmethod
    def monomial(cls, N: int, j: int) -> 'TrialProfile':
        """The profile v^{2j}."""
        coef = np.zeros(j + 1)
        coef[j] = 1.0
        return cls(coef, N)

    @property
    def degree(self) -> int:
        """Index d of the highest coefficient (degree 2d in v)."""
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def as_polynomial(self) -> Polynomial:
        """phi as a polynomial in t = v^2."""
        return Polynomial(self.coefficients)

    def evaluate(self, v):
        return self.as_polynomial()(np.asarray(v, dtype=float) ** 2)

    def to_dict(self) -> Dict:
        return {'N': self.N, 'coefficients': self.coefficients.tolist(), 'orthogonalized': self.orthogonalized}


@lru_cache(maxsize=128)
def _moments(N: int, kmax: int) -> np.ndarray:
    """mu_k = E[v^{2k}] under nu_{N,1}, k = 0..kmax."""
    spec = SphereSpec(N)
    return np.array([moment_monomial(spec, [2 * k]) for k in range(kmax + 1)])


def _moment_matrix(N: int, d: int) -> np.ndarray:
    mu = _moments(N, 2 * d)
    idx = np.arange(d + 1)
    return mu[idx[:, None] + idx[None, :]]


@lru_cache(maxsize=128)
def _k_matrix(N: int, d: int) -> np.ndarray:
    """Column j holds the t-coefficients of K t^j."""
    spec = SphereSpec(N)
    out = np.zeros((d + 1, d + 1))
    for j in range(d + 1):
        v_coef = np.zeros(2 * j + 1)
        v_coef[2 * j] = 1.0
        image = k_apply_polynomial(spec, Polynomial(v_coef)).coef[::2]
        out[:len(image), j] = image
    return out


def _coefficient_matrix(profiles: Sequence[TrialProfile]) -> np.ndarray:
    d = max(p.degree for p in profiles)
    out = np.zeros((len(profiles), d + 1))
    for i, p in enumerate(profiles):
        out[i, :p.degree + 1] = p.coefficients
    return out


def orthogonalize(profile: TrialProfile) -> TrialProfile:
    """
    Remove the nu_{N,1}-projection of phi onto span{1, v^2 - 1}.

    f = sum_k phi(v_k) only shifts by a constant and a multiple of
    sum_k (v_k^2 - 1) = 0, so the induced mean-zero function is unchanged.
    A profile that lies inside the removed span collapses to zero and is
    reported with a warning.
    """
    N = profile.N
    d = max(profile.degree, 1)
    coef = np.zeros(d + 1)
    coef[:profile.degree + 1] = profile.coefficients
    mu = _moments(N, d + 1)

    mean = float(np.dot(coef, mu[:d + 1]))
    cov = float(np.dot(coef, mu[1:d + 2] - mu[:d + 1]))
    b = cov / (mu[2] - 1.0)
    result = coef.copy()
    result[0] -= mean - b
    result[1] -= b

    before = math.sqrt(max(float(coef @ _moment_matrix(N, d) @ coef), 0.0))
    after = math.sqrt(max(float(result @ _moment_matrix(N, d) @ result), 0.0))
    if after <= 1e-12 * max(before, 1.0):
        if not profile.is_zero:
            console.warn("trial profile lies in span{1, v^2} and collapses to zero")
        result = np.zeros(d + 1)
    return TrialProfile(result, N, orthogonalized=True)


def f0_profile(N: int) -> TrialProfile:
    """v^4 - 3N/(N+2), orthogonalized."""
    return orthogonalize(TrialProfile([-3 * N / (N + 2), 0.0, 1.0], N))


def _check_orthogonal(profile: TrialProfile) -> None:
    if not profile.orthogonalized:
        raise DomainError("profile must be orthogonalized first")
    mu = _moments(profile.N, profile.degree + 1)
    c = profile.coefficients
    n = len(c)
    scale = float(np.dot(np.abs(c), mu[:n] + mu[1:n + 1])) + 1e-300
    if (abs(np.dot(c, mu[:n])) > ORTHOGONALITY_TOL * scale
            or abs(np.dot(c, mu[1:n + 1])) > ORTHOGONALITY_TOL * scale):
        raise DomainError("profile is not orthogonal to 1 and v^2")


def _norm_matrix(N: int, coefs: np.ndarray) -> np.ndarray:
    """Gram matrix of ||sum_k phi(v_k)||^2 = N ||phi||^2 + N(N-1) <phi, K phi>."""
    d = coefs.shape[1] - 1
    M = _moment_matrix(N, d)
    cross = M @ _k_matrix(N, d)
    cross = (cross + cross.T) / 2
    return N * coefs @ M @ coefs.T + N * (N - 1) * coefs @ cross @ coefs.T


def profile_norm_sq(profile: TrialProfile) -> float:
    """||f||^2 for f = sum_k phi(v_k) on the E = 1 sphere."""
    return float(_norm_matrix(profile.N, _coefficient_matrix([profile]))[0, 0])


# ===== SECTION 2: Dirichlet Form =====

def _pair_nodes(N: int, gamma: float, d: int, theta_nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nodes (w1, w2) and weights with sum weights * F = E_{nu_{N,2}}[|w|^{2 gamma} F].

    In t = |w|^2/N the pair marginal has density proportional to
    (1-t)^{(N-4)/2}; the factor t^gamma is absorbed into a Gauss-Jacobi rule.
    At N = 2 the pair is the whole circle of radius sqrt(2).
    """
    angles = 2 * math.pi * np.arange(theta_nodes) / theta_nodes
    if N == 2:
        r = np.full(1, math.sqrt(2.0))
        radial_w = np.array([2.0 ** gamma])
    else:
        alpha = (N - 4) / 2
        t, w = gauss_jacobi(d + 2, alpha, gamma)
        scale = N ** gamma * (alpha + 1) * math.exp(
            gammaln(gamma + 1) + gammaln(alpha + 1) - gammaln(gamma + alpha + 2))
        r = np.sqrt(N * t)
        radial_w = scale * w
    w1 = np.outer(r, np.cos(angles)).ravel()
    w2 = np.outer(r, np.sin(angles)).ravel()
    weights = np.repeat(radial_w / theta_nodes, theta_nodes)
    return w1, w2, weights


def pair_residuals(coefs: np.ndarray, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """
    f - [f]^{(1,2)} at each node for every profile row.

    The rotation average of v1^{2j} + v2^{2j} is 2 binom(2j, j) 4^{-j} r^{2j}.
    """
    d = coefs.shape[1] - 1
    j = np.arange(d + 1)
    average = 2 * comb(2 * j, j) / 4.0 ** j
    t1 = np.vander(w1 ** 2, d + 1, increasing=True)
    t2 = np.vander(w2 ** 2, d + 1, increasing=True)
    rr = np.vander(w1 ** 2 + w2 ** 2, d + 1, increasing=True)
    return coefs @ (t1 + t2).T - (coefs * average) @ rr.T


def _default_theta_nodes(d: int) -> int:
    return 2 * (2 * d) + 2


def dirichlet_matrix(N: int, gamma: float, profiles: Sequence[TrialProfile],
                     theta_nodes: Optional[int] = None) -> np.ndarray:
    """Bilinear Dirichlet form N E[|w|^{2 gamma} h_a h_b] over the pair marginal."""
    coefs = _coefficient_matrix(profiles)
    d = coefs.shape[1] - 1
    minimum = _default_theta_nodes(d)
    if theta_nodes is None:
        theta_nodes = minimum
    elif theta_nodes < minimum:
        raise DomainError(f"theta_nodes must be >= {minimum} for degree {2 * d}")
    w1, w2, weights = _pair_nodes(N, gamma, d, theta_nodes)
    h = pair_residuals(coefs, w1, w2)
    return N * (h * weights) @ h.T


def dirichlet_form_A(profile: TrialProfile, gamma: float, theta_nodes: Optional[int] = None) -> float:
    """
    E_N(f, f) for f = sum_k phi(v_k).

    Only the pair (1, 2) needs to be integrated:
        E_N(f, f) = N E[(w1^2 + w2^2)^gamma (f - [f]^{(1,2)})^2]
    where f - [f]^{(1,2)} depends on (w1, w2) alone.

    Args:
        profile: Orthogonalized trial profile
        gamma: Rate exponent in [0, 1]
        theta_nodes: Angular trapezoid size, at least 2*degree + 2

    Returns:
        Dirichlet form value (0 for the zero profile)
    """
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("gamma must lie in [0, 1]")
    _check_orthogonal(profile)
    if profile.is_zero:
        return 0.0
    return float(dirichlet_matrix(profile.N, gamma, [profile], theta_nodes)[0, 0])


def dirichlet_quotient(profile: TrialProfile, gamma: float, theta_nodes: Optional[int] = None) -> float:
    """E_N(f, f) / ||f||^2."""
    if profile.is_zero:
        raise DegenerateProfileError("quotient of the zero profile is undefined")
    norm = profile_norm_sq(profile)
    if norm <= 0:
        raise DegenerateProfileError("profile induces the zero function on the sphere")
    return dirichlet_form_A(profile, gamma, theta_nodes) / norm


# ===== SECTION 3: Rayleigh-Ritz =====

def _symmetric_eigh(matrix: np.ndarray, label: str, values_only: bool = False):
    """scipy.linalg.eigh of the symmetric part; LAPACK failures become NumericalError."""
    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"{label}: matrix has non-finite entries")
    try:
        return eigh((matrix + matrix.T) / 2, eigvals_only=values_only)
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        raise NumericalError(f"{label}: eigensolver failed ({e})") from e


def _pruned_pencil(A: np.ndarray, B: np.ndarray, label: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve A x = lambda B x after dropping near-null directions of B.

    Returns:
        (eigenvalues ascending, eigenvectors in the original coordinates)
    """
    scale = np.sqrt(np.clip(np.diag(B), 1e-300, None))
    Bs = B / np.outer(scale, scale)
    As = A / np.outer(scale, scale)
    lam, U = _symmetric_eigh(Bs, label)
    keep = lam > PRUNE_TOL * lam.max() if lam.size and lam.max() > 0 else np.zeros(lam.size, bool)
    if not np.any(keep):
        raise NumericalError(f"{label}: Gram matrix is numerically zero")
    dropped = int(np.sum(~keep))
    if dropped:
        console.warn(f"{label}: pruned {dropped} dependent basis direction(s)")
    T = U[:, keep] / np.sqrt(lam[keep])
    reduced = T.T @ As @ T
    values, vectors = _symmetric_eigh(reduced, label)
    return values, (T @ vectors) / scale[:, None]


def rayleigh_min(N: int, gamma: float, degree: int) -> Tuple[float, TrialProfile]:
    """
    Minimize the Dirichlet quotient over profiles of degree <= degree in v.

    The quotient is quadratic over quadratic in the coefficients, so the
    minimum is the smallest eigenvalue of a symmetric pencil. The result is an
    upper bound on the restricted gap hat Delta_N.

    Returns:
        (value, minimizing orthogonalized profile)
    """
    if degree % 2 or not 4 <= degree <= 12:
        raise DomainError("degree must be even and in [4, 12]")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("gamma must lie in [0, 1]")
    basis = [orthogonalize(TrialProfile.monomial(N, j)) for j in range(2, degree // 2 + 1)]
    basis = [p for p in basis if not p.is_zero]
    coefs = _coefficient_matrix(basis)
    A = dirichlet_matrix(N, gamma, basis)
    B = _norm_matrix(N, coefs)
    values, vectors = _pruned_pencil(A, B, "rayleigh_min")
    profile = TrialProfile(vectors[:, 0] @ coefs, N, orthogonalized=True)
    return float(values[0]), profile


# ===== SECTION 4: Linearized Operator =====

@dataclass(frozen=True)
class LinearizedModel:
    """Galerkin setup for the linearized gap."""
    gamma: float
    basis_size: int = 16
    quadrature_order: Optional[int] = None

    def validate(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError("gamma must lie in [0, 1]")
        if not 4 <= self.basis_size <= 64:
            raise DomainError("basis_size must lie in [4, 64]")
        if self.quadrature_order is not None and self.quadrature_order < 2 * self.basis_size:
            raise DomainError("quadrature_order must be >= 2 * basis_size")

    @property
    def nodes(self) -> int:
        """Gauss-Laguerre order; twice the basis size unless set."""
        return self.quadrature_order or 2 * self.basis_size


def linearized_gap(model: LinearizedModel) -> float:
    """
    Galerkin upper bound on the gap of the linearized operator.

    Basis: He_{2k}/sqrt((2k)!) for k = 2..basis_size+1, orthonormal under M
    and orthogonal to the null directions 1 and v^2. The form
        -<h, L h> = E_{M x M}[(v^2 + w^2)^gamma (H - [H]_theta)^2],
    H = h(v) + h(w), is integrated in polar coordinates: generalized
    Gauss-Laguerre in s = v^2 + w^2 (weight s^gamma e^{-s/2}) and an angular
    trapezoid, which is exact since [H]_theta only depends on the radius.
    """
    model.validate()
    top = 2 * (model.basis_size + 1)
    x, wx = roots_genlaguerre(model.nodes, model.gamma)
    n_theta = 2 * top + 2
    angles = 2 * math.pi * np.arange(n_theta) / n_theta
    rho = np.sqrt(2 * x)
    v = np.outer(rho, np.cos(angles))
    w = np.outer(rho, np.sin(angles))

    orders = range(4, top + 1, 2)
    residuals = []
    for n in orders:
        c = np.zeros(n + 1)
        c[n] = 1.0 / math.sqrt(math.factorial(n))
        H = hermite_e.hermeval(v, c) + hermite_e.hermeval(w, c)
        residuals.append(H - H.mean(axis=1, keepdims=True))
    D = np.stack(residuals)

    # s = 2x turns s^gamma e^{-s/2} ds / 2 into 2^gamma x^gamma e^{-x} dx
    weights = 2.0 ** model.gamma * wx
    flat = D.reshape(len(residuals), -1)
    node_w = np.repeat(weights / n_theta, n_theta)
    A = (flat * node_w) @ flat.T
    values = _symmetric_eigh(A, "linearized_gap", values_only=True)
    if values[0] <= 0:
        raise NumericalError("linearized form is not positive on the retained space")
    return float(values[0])


# ===== SECTION 5: Exact Maxwellian Spectrum =====

@dataclass
class MaxwellianSpectrum:
    """Spectrum of -L on symmetric polynomials at gamma = 0."""
    N: int
    max_degree: int
    eigenvalues: List[float]
    gap: float
    alignment: float
    retained_dimension: int

    def to_dict(self) -> Dict:
        return {
            'N': self.N,
            'max_degree': self.max_degree,
            'eigenvalues': list(self.eigenvalues),
            'gap': self.gap,
            'alignment': self.alignment,
            'retained_dimension': self.retained_dimension,
        }


def _partitions(total: int, max_part: int, max_len: int) -> Iterator[Tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    if max_len == 0:
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first, max_len - 1):
            yield (first,) + rest


def _distinct_permutations(items: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if not items:
        yield ()
        return
    for value in sorted(set(items)):
        rest = list(items)
        rest.remove(value)
        for tail in _distinct_permutations(tuple(rest)):
            yield (value,) + tail


def _cos_sin_moment(a: int, b: int) -> float:
    """E[cos^{2a} sin^{2b}] for a uniform angle."""
    return math.exp(gammaln(a + 0.5) + gammaln(b + 0.5) - gammaln(a + b + 1)) / math.pi


def exact_maxwellian_spectrum(N: int, max_degree: int) -> MaxwellianSpectrum:
    """
    Spectrum of -L_{N,1} at gamma = 0 on symmetric polynomials in v^2.

    Basis: monomial symmetric functions m_lambda, |lambda| <= max_degree/2.
    The Gram matrix uses closed-form sphere moments; the form is
    E(f, g) = N (<f, g> - <[f]^{(1,2)}, g>) with the rotation average of a
    monomial given by trigonometric moments. Dependencies caused by
    sum v_j^2 = N are pruned.
    """
    if not 3 <= N <= 8:
        raise DomainError("exact spectra are computed for 3 <= N <= 8")
    if max_degree % 2 or not 4 <= max_degree <= 8:
        raise DomainError("max_degree must be 4, 6 or 8")
    spec = SphereSpec(N)
    D = max_degree // 2
    basis = [lam for total in range(D + 1) for lam in _partitions(total, total, N)]
    orbits = {lam: list(_distinct_permutations(lam + (0,) * (N - len(lam)))) for lam in basis}

    @lru_cache(maxsize=None)
    def orbit_sum(beta: Tuple[int, ...], mu: Tuple[int, ...]) -> float:
        """sum over gamma in orbit(mu) of E[v^{2(beta + gamma)}]; beta sorted."""
        return math.fsum(moment_monomial(spec, [2 * (b + g) for b, g in zip(beta, perm)])
                         for perm in orbits[mu])

    def key(vec: Sequence[int]) -> Tuple[int, ...]:
        return tuple(sorted(vec, reverse=True))

    size = len(basis)
    G = np.zeros((size, size))
    for i, lam in enumerate(basis):
        padded = key(lam + (0,) * (N - len(lam)))
        for j, mu in enumerate(basis):
            G[i, j] = len(orbits[lam]) * orbit_sum(padded, mu)

    averaged = np.zeros((size, size))
    for i, lam in enumerate(basis):
        expansion: Dict[Tuple[int, ...], float] = {}
        for alpha in orbits[lam]:
            a, b = alpha[0], alpha[1]
            s = a + b
            weight = _cos_sin_moment(a, b)
            for k in range(s + 1):
                beta = key((k, s - k) + alpha[2:])
                expansion[beta] = expansion.get(beta, 0.0) + weight * comb(s, k, exact=True)
        for j, mu in enumerate(basis):
            averaged[i, j] = math.fsum(c * orbit_sum(beta, mu) for beta, c in expansion.items())

    form = N * (G - (averaged + averaged.T) / 2)
    values, vectors = _pruned_pencil(form, G, "exact_maxwellian_spectrum")

    positive = np.flatnonzero(values > 1e-9 * max(1.0, abs(values[-1])))
    if positive.size == 0:
        raise NumericalError("no nonzero eigenvalue found")
    gap_index = int(positive[0])

    f0 = np.zeros(size)
    f0[basis.index((2,))] = 1.0
    f0[basis.index(())] = -3 * N * N / (N + 2)
    x = vectors[:, gap_index]
    alignment = abs(x @ G @ f0) / math.sqrt((x @ G @ x) * (f0 @ G @ f0))

    return MaxwellianSpectrum(
        N=N,
        max_degree=max_degree,
        eigenvalues=[float(v) for v in values],
        gap=float(values[gap_index]),
        alignment=float(alignment),
        retained_dimension=int(values.size),
    )
