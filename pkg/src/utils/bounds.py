"""
Bounds - Rigorous lower bounds on the Kac spectral gaps.

Every closed-form constant of the induction argument lives here: the
coefficients A_N and C_N, the projection eigenvalue mu_N, the uniform bound
and the product chains for the restricted gap (hat Delta_N), the full gap
(Delta_N) and the linearized gap Lambda.

Chains start from a base bound B(N0) and multiply by (1 - A_k/k^2) (or
(1 - (A_k + C_k)/k^2)) for k = N0+1..N. B is 4 N0^{gamma-1} prod_{j=3}^{N0}[...]
for gamma > 0, and the Maxwellian chain 2 prod_{j=3}^{N0}[...] at gamma = 0.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .correlation import projection_sum_bound
from .errors import BoundViolation, DomainError, NumericalError
from .products import (ProductResult, gamma_product_limit, integral_tail_bound,
                       truncated_product, uniform_factor_spec)

DEFAULT_N0 = 10
DEFAULT_TRUNCATION = 1_000_000
AUTO_N0_RANGE = (5, 64)

N0Choice = Union[int, str]


# ===== SECTION 1: Coefficients =====

def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")


def a_coeff(N: int, gamma: float) -> float:
    """
    A_N = (p(N) + gamma q(N)) / r(N).

    p, q and r are evaluated in exact integer arithmetic; only the final
    combination is done in floating point.
    """
    _check_gamma(gamma)
    N = int(N)
    if N <= 2:
        raise DomainError("A_N is defined for N >= 3")
    p = 5 * N**7 + 31 * N**6 + 15 * N**5 + 131 * N**4 + 256 * N**3 - 102 * N**2
    q = 5 * N**7 - 5 * N**6 - 87 * N**5 - 211 * N**4 - 164 * N**3 + 78 * N**2
    r = (N**2 + 4 * N - 12) * (N - 1)**3 * (N + 1) * (N - 2)
    return (p + gamma * q) / r


def a_coeff_array(ks: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized A_k in floating point, normalized by k^7 to stay in range."""
    x = 1.0 / np.asarray(ks, dtype=float)
    p = 5 + 31 * x + 15 * x**2 + 131 * x**3 + 256 * x**4 - 102 * x**5
    q = 5 - 5 * x - 87 * x**2 - 211 * x**3 - 164 * x**4 + 78 * x**5
    r = (1 + 4 * x - 12 * x**2) * (1 - x)**3 * (1 + x) * (1 - 2 * x)
    return (p + gamma * q) / r


def c_coeff(N: int, gamma: float) -> float:
    """C_N, the price of passing from the restricted to the full gap."""
    _check_gamma(gamma)
    if N <= 4:
        raise DomainError("C_N is defined for N >= 5")
    return float(c_coeff_array(np.array([N]), gamma)[0])


def c_coeff_array(ks: np.ndarray, gamma: float) -> np.ndarray:
    N = np.asarray(ks, dtype=float)
    bracket = 2 / (N - 1) + 8 * N / ((N - 2) * (N - 4)**2)
    return (math.sqrt(15) * (1 - gamma) / (N - 1)**2 * N**2.5
            * np.sqrt(bracket) / np.sqrt(1 - 15 / ((N + 1) * (N + 3))))


def mu(N: int) -> float:
    """mu_N = 1/N + 3/(N(N+1))."""
    if N < 2:
        raise DomainError("mu_N is defined for N >= 2")
    return projection_sum_bound(N, 1)


def comp_lower(x: Union[float, np.ndarray], gamma: float) -> Union[float, np.ndarray]:
    """Quadratic minorant 1 + gamma x - (1-gamma) x^2 of (1+x)^gamma on [-1, inf)."""
    return 1 + gamma * x - (1 - gamma) * x ** 2


def weight_poly_bounds(N: int, gamma: float, v: float) -> Tuple[float, float, float]:
    """
    Polynomial minorant m(v) of the weight ((N - v^2)/(N-1))^gamma and
    lower bounds on K m.

    Returns:
        (m_value, km_lb, km_refined)

    Raises:
        DomainError: if v^2 > N
        BoundViolation: if m(v) exceeds the weight or is not positive inside
    """
    _check_gamma(gamma)
    if N < 3:
        raise DomainError("N must be >= 3")
    v2 = v * v
    if v2 > N:
        raise DomainError(f"v^2 = {v2:g} exceeds N = {N}")
    x = (1 - v2) / (N - 1)
    m_value = comp_lower(x, gamma)
    weight = max((N - v2) / (N - 1), 0.0) ** gamma
    if m_value > weight + 1e-12:
        raise BoundViolation(f"m({v:g}) = {m_value:.12g} exceeds the weight {weight:.12g}")
    if v2 < N and m_value <= 0:
        raise BoundViolation(f"m({v:g}) is not positive")
    km_lb = 1 - (2 - gamma) / (N - 1)**2
    km_refined = km_lb + (1 - gamma) * (2 * N - 1) / ((N - 1)**3 * (N + 1))
    return m_value, km_lb, km_refined


def rescale_gap(gap: float, E_from: float, E_to: float, gamma: float) -> float:
    """Rates scale like E^gamma, so gaps do too."""
    if E_from <= 0 or E_to <= 0:
        raise DomainError("energies must be positive")
    return gap * (E_to / E_from) ** gamma


# ===== SECTION 2: Base Bounds =====

def uniform_factor(j: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """1 - (4j+1)/((j-1)^2 (j+1))."""
    j = np.asarray(j, dtype=float)
    value = 1 - (4 * j + 1) / ((j - 1)**2 * (j + 1))
    return float(value) if value.ndim == 0 else value


@lru_cache(maxsize=None)
def uniform_product(N: int) -> float:
    """prod_{j=3}^{N} uniform_factor(j); 1 for N < 3."""
    if N < 3:
        return 1.0
    return math.exp(math.fsum(np.log(uniform_factor(np.arange(3, N + 1)))))


def delta2(gamma: float) -> float:
    """Exact two-particle gap 2^{gamma+1}."""
    return 2.0 ** (gamma + 1)


def uniform_gap_lb(N: int, gamma: float) -> float:
    """
    4 N^{gamma-1} prod_{j=3}^{N}[...], or Delta_2 when N = 2.

    Raises:
        DomainError: for N < 2 or gamma outside (0, 1]
    """
    if N < 2:
        raise DomainError("N must be >= 2")
    if not 0.0 < gamma <= 1.0:
        raise DomainError("the uniform bound needs gamma in (0, 1]; use maxwellian_chain_lb at gamma = 0")
    if N == 2:
        return delta2(gamma)
    return 4 * N ** (gamma - 1) * uniform_product(N)


def maxwellian_chain_lb(N: int) -> float:
    """Delta_2 prod_{j=3}^{N}[...] at gamma = 0."""
    if N < 2:
        raise DomainError("N must be >= 2")
    return delta2(0.0) * uniform_product(N)


def induction_base(N: int, gamma: float) -> float:
    """Base bound B(N) the product chains start from."""
    _check_gamma(gamma)
    if gamma == 0.0:
        return maxwellian_chain_lb(N)
    return uniform_gap_lb(N, gamma)


def uniform_product_limit() -> float:
    """The infinite product prod_{j>=3}[...] via the Gamma-function closed form."""
    return gamma_product_limit(uniform_factor_spec()).value


# ===== SECTION 3: Product Chains =====

def _chain_factor(gamma: float, with_c: bool):
    def factor(ks):
        ks = np.asarray(ks, dtype=float)
        coeff = a_coeff_array(ks, gamma)
        if with_c:
            coeff = coeff + c_coeff_array(ks, gamma)
        return 1 - coeff / ks**2
    return factor


def a_tail_majorant(gamma: float, K: int, with_c: bool = False) -> float:
    """
    A constant a with a >= A_k (or A_k + C_k) for every k > K.

    The coefficient is sampled on a geometric grid over [K+1, 10K] and must be
    monotone there; the majorant is then its value at K+1 (decreasing case)
    or its limit 5(1+gamma) [+ sqrt(30)(1-gamma)] (increasing case).

    Raises:
        NumericalError: if the sampled coefficient is not monotone
    """
    _check_gamma(gamma)
    if K < 5:
        raise DomainError("truncation index must be >= 5")
    grid = np.unique(np.round(np.geomspace(K + 1, 10 * K, 256)))
    values = a_coeff_array(grid, gamma)
    limit = 5 * (1 + gamma)
    if with_c:
        values = values + c_coeff_array(grid, gamma)
        limit += math.sqrt(30) * (1 - gamma)
    steps = np.diff(values)
    slack = 1e-12 * np.abs(values[:-1])
    if np.all(steps <= slack) and values[0] >= limit * (1 - 1e-12):
        return float(values[0]) * (1 + 1e-12)
    if np.all(steps >= -slack) and values[-1] <= limit * (1 + 1e-12):
        return limit * (1 + 1e-12)
    raise NumericalError(f"chain coefficient is not monotone on [{K + 1}, {10 * K}]")


def _chain(N: int, gamma: float, n0: int, with_c: bool, workers: int = 1) -> float:
    if N <= n0:
        return induction_base(N, gamma)
    try:
        product = truncated_product(_chain_factor(gamma, with_c), n0 + 1, N, 0.0, workers)
    except DomainError as e:
        raise DomainError(f"N0 = {n0} is not admissible for gamma = {gamma}: {e}")
    return induction_base(n0, gamma) * product.value


def hat_delta_lb(N: int, gamma: float, n0: N0Choice = DEFAULT_N0, workers: int = 1) -> float:
    """
    Lower bound on the restricted gap hat Delta_N.

    B(N0) prod_{k=N0+1}^{N}(1 - A_k/k^2), or B(N) itself when N <= N0.
    n0='auto' uses the N0 that maximizes the certified bound on Lambda.

    Raises:
        DomainError: for N < 2 or an inadmissible N0
    """
    _check_gamma(gamma)
    if N < 2:
        raise DomainError("N must be >= 2")
    n0 = best_n0(gamma, with_c=False) if n0 == 'auto' else int(n0)
    if n0 < 3:
        raise DomainError("N0 must be >= 3")
    return _chain(N, gamma, n0, False, workers)


def delta_lb(N: int, gamma: float, n0: N0Choice = DEFAULT_N0, workers: int = 1) -> float:
    """
    Lower bound on the full gap Delta_N.

    Same base as hat_delta_lb with factors (1 - (A_k + C_k)/k^2). Requires
    N0 >= 5 since C_N is singular at N = 4.
    """
    _check_gamma(gamma)
    if N < 2:
        raise DomainError("N must be >= 2")
    n0 = best_n0(gamma, with_c=True) if n0 == 'auto' else int(n0)
    if n0 < 5:
        raise DomainError("N0 must be >= 5 for the full-gap chain")
    return _chain(N, gamma, n0, True, workers)


# ===== SECTION 4: Infinite-N Certificates =====

@dataclass(frozen=True)
class LambdaCertificate:
    """A certified value L <= inf_N of a bound chain."""
    gamma: float
    n0: int
    truncation: int
    base: float
    head_min: float
    product: ProductResult
    tail_majorant: float
    with_c: bool = False

    @property
    def value(self) -> float:
        return min(self.head_min, self.base * self.product.lower)

    def to_dict(self) -> Dict:
        return {
            'gamma': self.gamma,
            'n0': self.n0,
            'truncation': self.truncation,
            'base': self.base,
            'head_min': self.head_min,
            'product': self.product.to_dict(),
            'tail_majorant': self.tail_majorant,
            'with_c': self.with_c,
            'value': self.value,
        }


@lru_cache(maxsize=64)
def certify_lambda(gamma: float, n0: int = DEFAULT_N0, K: int = DEFAULT_TRUNCATION,
                   with_c: bool = False, workers: int = 1) -> LambdaCertificate:
    """
    Certify inf_N of the chain started at N0.

    For N <= N0 the bound is B(N); beyond, it decreases towards
    B(N0) prod_{k>N0}(...), which is at least
    B(N0) prod_{k=N0+1}^{K}(...) exp(-tail_bound).

    Raises:
        DomainError: for gamma = 1 (no linearized gap statement) or a bad N0
    """
    _check_gamma(gamma)
    if gamma >= 1.0 and not with_c:
        raise DomainError("the linearized gap bound needs gamma in [0, 1)")
    if n0 < (5 if with_c else 3):
        raise DomainError("N0 too small")
    if K <= n0:
        raise DomainError("truncation index must exceed N0")
    majorant = a_tail_majorant(gamma, K, with_c)
    try:
        product = truncated_product(_chain_factor(gamma, with_c), n0 + 1, K, majorant, workers)
    except DomainError as e:
        raise DomainError(f"N0 = {n0} is not admissible for gamma = {gamma}: {e}")
    head_min = min(induction_base(n, gamma) for n in range(2, n0 + 1))
    return LambdaCertificate(gamma, n0, K, induction_base(n0, gamma), head_min, product, majorant, with_c)


def lambda_lb(gamma: float, n0: N0Choice = DEFAULT_N0, K: int = DEFAULT_TRUNCATION,
              workers: int = 1) -> float:
    """Certified L with hat Delta_N >= L for all N, hence Lambda >= L."""
    if n0 == 'auto':
        n0 = best_n0(gamma, with_c=False, K=K)
    return certify_lambda(gamma, int(n0), K, False, workers).value


@lru_cache(maxsize=32)
def best_n0(gamma: float, with_c: bool = False, K: int = DEFAULT_TRUNCATION) -> int:
    """
    N0 in [5, 64] maximizing the certified infimum of the chain.

    One pass over the factor logs serves every candidate: the tail product
    from N0+1 is the suffix sum, recovered by subtracting short prefixes.

    Raises:
        DomainError: if no candidate is admissible
    """
    _check_gamma(gamma)
    lo, hi = AUTO_N0_RANGE
    ks = np.arange(lo + 1, K + 1)
    factors = _chain_factor(gamma, with_c)(ks)
    bad = np.flatnonzero(factors <= 0)
    first_ok = lo if bad.size == 0 else int(ks[bad[-1]])
    if first_ok > hi:
        raise DomainError(f"no admissible N0 in [{lo}, {hi}] for gamma = {gamma}")

    logs = np.log(factors[first_ok - lo:])
    suffix_total = math.fsum(logs)
    tail_bound = integral_tail_bound(a_tail_majorant(gamma, K, with_c), K)

    best, best_value = None, -math.inf
    for n0 in range(first_ok, hi + 1):
        log_tail = suffix_total - math.fsum(logs[:n0 - first_ok])
        head_min = min(induction_base(n, gamma) for n in range(2, n0 + 1))
        value = min(head_min, induction_base(n0, gamma) * math.exp(log_tail - tail_bound))
        if value > best_value:
            best, best_value = n0, value
    return best


# ===== SECTION 5: Report =====

@dataclass(frozen=True)
class GapBoundInputs:
    """Validated (N, gamma, N0) triple feeding BoundReport.build."""
    N: int
    gamma: float
    n0: N0Choice = DEFAULT_N0

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)
        if self.N < 2:
            raise DomainError("N must be >= 2")
        if self.n0 != 'auto' and (isinstance(self.n0, str) or int(self.n0) < 2):
            raise DomainError(f"n0 must be an integer >= 2 or 'auto', got {self.n0!r}")


@dataclass
class BoundReport:
    """All rigorous lower bounds for one (N, gamma)."""
    N: int
    gamma: float
    n0: int
    a_n: Optional[float]
    c_n: Optional[float]
    mu_n: float
    uniform_lb: float
    hat_delta_lb: float
    delta_lb: Optional[float]
    lambda_lb: Optional[float]
    delta2: float
    tail_certificate: Optional[float]
    provenance: List[str] = field(default_factory=list)

    @classmethod
    def build(cls, N: int, gamma: float, n0: N0Choice = DEFAULT_N0,
              K: int = DEFAULT_TRUNCATION, workers: int = 1) -> 'BoundReport':
        """
        Compute every bound and check delta_lb <= hat_delta_lb.

        delta_lb and the full-gap fields are None when the chain is not
        admissible for this N0 (C_N is undefined below 5).
        """
        GapBoundInputs(N, gamma, n0)
        chosen = best_n0(gamma, False, K) if n0 == 'auto' else int(n0)

        hat = hat_delta_lb(N, gamma, chosen, workers)
        try:
            full = delta_lb(N, gamma, max(chosen, 5), workers)
        except DomainError:
            full = None
        if full is not None and full > hat * (1 + 1e-12):
            raise BoundViolation(f"delta_lb {full:.6g} exceeds hat_delta_lb {hat:.6g}")

        lam, tail = None, None
        if gamma < 1.0:
            certificate = certify_lambda(gamma, chosen, K, False, workers)
            lam, tail = certificate.value, certificate.product.tail_bound

        return cls(
            N=N,
            gamma=gamma,
            n0=chosen,
            a_n=a_coeff(N, gamma) if N >= 3 else None,
            c_n=c_coeff(N, gamma) if N >= 5 else None,
            mu_n=mu(N),
            uniform_lb=induction_base(N, gamma),
            hat_delta_lb=hat,
            delta_lb=full,
            lambda_lb=lam,
            delta2=delta2(gamma),
            tail_certificate=tail,
            provenance=[
                "A_N = (p + gamma q)/r, integer-exact",
                "C_N closed form, N >= 5",
                "base: 4 N^{gamma-1} uniform product (gamma > 0), 2 * uniform product (gamma = 0)",
                f"tail: integral comparison beyond K = {K}",
            ],
        )

    def to_dict(self) -> Dict:
        return {
            'N': self.N,
            'gamma': self.gamma,
            'n0': self.n0,
            'a_n': self.a_n,
            'c_n': self.c_n,
            'mu_n': self.mu_n,
            'uniform_lb': self.uniform_lb,
            'hat_delta_lb': self.hat_delta_lb,
            'delta_lb': self.delta_lb,
            'lambda_lb': self.lambda_lb,
            'delta2': self.delta2,
            'tail_certificate': self.tail_certificate,
            'provenance': list(self.provenance),
        }
