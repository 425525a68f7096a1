"""
Products - Infinite and truncated products of rational functions.

Key Features:
- Root finding for the numerator/denominator polynomials (companion matrix)
- Closed form of lim_{N->inf} prod_{j=M}^{N} P(j)/Q(j) through scipy's complex log-Gamma
- Brute-force partial products used as an oracle for the closed form
- Truncated products with an integral-comparison bound on the neglected tail

All functions are pure; truncated products may split their range across a
thread pool without changing the result.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import loggamma

from .errors import DomainError, NumericalError


# Numerator and denominator of 1 - (4j+1)/((j-1)^2 (j+1))
UNIFORM_FACTOR_NUMERATOR = (1.0, -1.0, -5.0, 0.0)
UNIFORM_FACTOR_DENOMINATOR = (1.0, -1.0, -1.0, 1.0)
UNIFORM_FACTOR_START = 3

CHUNK_SIZE = 1 << 16
ROOT_MATCH_TOLERANCE = 1e-9


# ===== SECTION 1: Domain Types =====

@dataclass(frozen=True)
class RationalProductSpec:
    """
    Roots of P and Q plus the start index M of prod_{j>=M} P(j)/Q(j).

    Both polynomials are monic once leading_ratio is divided out, so the
    product is fully described by its roots.
    """
    numerator_roots: Tuple[complex, ...]
    denominator_roots: Tuple[complex, ...]
    start_index: int
    leading_ratio: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'numerator_roots', tuple(complex(r) for r in self.numerator_roots))
        object.__setattr__(self, 'denominator_roots', tuple(complex(r) for r in self.denominator_roots))

    @classmethod
    def from_polynomials(cls, numerator: Sequence[float], denominator: Sequence[float],
                         start_index: int, tolerance: float = ROOT_MATCH_TOLERANCE) -> 'RationalProductSpec':
        """
        Build a spec from coefficient lists (highest degree first).

        Args:
            numerator: Coefficients of P
            denominator: Coefficients of Q
            start_index: First index M of the product
            tolerance: Root residual tolerance handed to poly_roots

        Returns:
            RationalProductSpec (not yet validated)
        """
        return cls(
            numerator_roots=tuple(poly_roots(numerator, tolerance)),
            denominator_roots=tuple(poly_roots(denominator, tolerance)),
            start_index=int(start_index),
            leading_ratio=float(numerator[0]) / float(denominator[0]),
        )

    def validate(self) -> None:
        """
        Check the convergence and well-posedness conditions.

        Raises:
            DomainError: if any invariant fails
        """
        if self.start_index < 1:
            raise DomainError(f"start index must be >= 1, got {self.start_index}")
        if abs(self.leading_ratio - 1.0) > 1e-12:
            raise DomainError(f"leading coefficients must agree (ratio {self.leading_ratio})")
        if len(self.numerator_roots) != len(self.denominator_roots) or not self.numerator_roots:
            raise DomainError("P and Q must have the same positive degree")

        gap = sum(self.numerator_roots) - sum(self.denominator_roots)
        if abs(gap) > 1e-9:
            raise DomainError(f"root sums differ by {abs(gap):.3e}; the product diverges or vanishes")

        for root in self.numerator_roots + self.denominator_roots:
            if abs(root.imag) < 1e-12 and root.real >= self.start_index - 1e-12:
                nearest = round(root.real)
                if nearest >= self.start_index and abs(root.real - nearest) < 1e-12:
                    raise DomainError(f"root {root.real:g} makes the factor at j={nearest} vanish or blow up")

        for roots in (self.numerator_roots, self.denominator_roots):
            if not _conjugate_closed(roots):
                raise DomainError("complex roots must come in conjugate pairs")


@dataclass(frozen=True)
class ProductResult:
    """Value of a product plus a bound on the log-error of truncation."""
    value: float
    truncation_index: Union[int, str]
    tail_bound: float

    @property
    def lower(self) -> float:
        """Certified lower end: the true product lies in [lower, value]."""
        return self.value * math.exp(-self.tail_bound)

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'truncation_index': self.truncation_index,
            'tail_bound': self.tail_bound if math.isfinite(self.tail_bound) else None,
            'lower': self.lower,
        }


# ===== SECTION 2: Special Functions =====

def log_gamma(z: complex) -> complex:
    """
    Principal-branch log Gamma for complex arguments.

    Thin wrapper over scipy.special.loggamma that turns the poles into DomainError.

    Args:
        z: Argument, not a non-positive integer

    Returns:
        Complex log Gamma(z)

    Raises:
        DomainError: at the poles z = 0, -1, -2, ...
    """
    z = complex(z)
    if abs(z.imag) < 1e-14 and z.real <= 0 and abs(z.real - round(z.real)) < 1e-14:
        raise DomainError(f"Gamma has a pole at {z.real:g}")

    return complex(loggamma(z))


# ===== SECTION 3: Root Finding =====

def poly_roots(coefficients: Sequence[float], tolerance: float = ROOT_MATCH_TOLERANCE) -> List[complex]:
    """
    All complex roots of a real polynomial, with multiplicity.

    Roots come from the eigenvalues of the companion matrix. Near-real roots
    are snapped to the real axis and complex roots are paired with their
    conjugates so that downstream sums of logs cancel exactly.

    Args:
        coefficients: Real coefficients, highest degree first
        tolerance: Residual tolerance relative to the coefficient norm

    Returns:
        Sorted list of roots

    Raises:
        DomainError: for the zero polynomial, a zero leading coefficient or degree 0
        NumericalError: if a returned root does not satisfy the residual check
    """
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.size == 0 or not np.any(coeffs):
        raise DomainError("degenerate (zero) polynomial")
    if coeffs[0] == 0:
        raise DomainError("leading coefficient must be nonzero")
    if coeffs.size < 2:
        raise DomainError("polynomial must have degree >= 1")

    roots = _symmetrize_conjugates(np.roots(coeffs), tolerance)

    scale = float(np.linalg.norm(coeffs))
    for root in roots:
        residual = abs(np.polyval(coeffs, root))
        if residual > tolerance * scale:
            raise NumericalError(f"root {root} has residual {residual:.3e}")
    return roots


def _symmetrize_conjugates(raw_roots: np.ndarray, tolerance: float) -> List[complex]:
    """Snap near-real roots to the axis and average conjugate partners."""
    roots = [complex(r) for r in raw_roots]
    used = [False] * len(roots)
    result: List[complex] = []

    for i, root in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(root.imag) <= tolerance * max(1.0, abs(root)):
            result.append(complex(root.real, 0.0))
            continue

        candidates = [(abs(roots[k] - root.conjugate()), k) for k in range(len(roots)) if not used[k]]
        if not candidates:
            raise NumericalError(f"complex root {root} has no conjugate partner")
        _, partner = min(candidates)
        used[partner] = True
        mid = (root + roots[partner].conjugate()) / 2
        result.extend([mid, mid.conjugate()])

    return sorted(result, key=lambda r: (r.real, r.imag))


def _conjugate_closed(roots: Sequence[complex]) -> bool:
    """True if the multiset of roots equals its own conjugate."""
    pending = [r for r in roots if abs(r.imag) > ROOT_MATCH_TOLERANCE]
    while pending:
        root = pending.pop()
        matches = [k for k, r in enumerate(pending) if abs(r - root.conjugate()) <= 1e-9 * max(1.0, abs(root))]
        if not matches:
            return False
        pending.pop(matches[0])
    return True


# ===== SECTION 4: Product Evaluation =====

def gamma_product_limit(spec: RationalProductSpec) -> ProductResult:
    """
    Closed form of prod_{j>=M} P(j)/Q(j).

    With P(x) = prod (x - mu_n) and Q(x) = prod (x - nu_n) the limit equals
    prod_n Gamma(M - nu_n) / Gamma(M - mu_n). The printed statement of this
    identity is often quoted with the ratio inverted; this orientation is the
    one that reproduces 0.03881503614 for the uniform factor.

    Args:
        spec: Validated product description

    Returns:
        ProductResult with truncation_index "closed-form" and tail_bound 0

    Raises:
        DomainError: if the spec is invalid or M - root hits a Gamma pole
        NumericalError: if the imaginary parts of the log sum do not cancel
    """
    spec.validate()
    M = spec.start_index

    terms = [log_gamma(M - nu) for nu in spec.denominator_roots]
    terms += [-log_gamma(M - mu) for mu in spec.numerator_roots]

    real_part = math.fsum(t.real for t in terms)
    imag_part = math.remainder(math.fsum(t.imag for t in terms), 2 * math.pi)
    if abs(imag_part) > 1e-9:
        raise NumericalError(f"imaginary parts of the log-Gamma sum do not cancel ({imag_part:.3e})")

    return ProductResult(value=math.exp(real_part), truncation_index="closed-form", tail_bound=0.0)


def partial_product(spec: RationalProductSpec, K: int) -> ProductResult:
    """
    Brute-force prod_{j=M}^{K} P(j)/Q(j), summed in log space.

    No tail certificate is attached (tail_bound is infinite).
    """
    spec.validate()
    M = spec.start_index
    if K < M:
        return ProductResult(value=1.0, truncation_index=K, tail_bound=math.inf)

    js = np.arange(M, K + 1, dtype=float)
    real_terms: List[float] = []
    imag_terms: List[float] = []
    for sign, roots in ((1.0, spec.numerator_roots), (-1.0, spec.denominator_roots)):
        for root in roots:
            logs = np.log((js - root).astype(complex))
            real_terms.append(sign * math.fsum(logs.real))
            imag_terms.append(sign * math.fsum(logs.imag))

    imag_part = math.remainder(math.fsum(imag_terms), 2 * math.pi)
    if abs(imag_part) > 1e-9:
        raise NumericalError("partial product is not positive")
    return ProductResult(value=math.exp(math.fsum(real_terms)), truncation_index=K, tail_bound=math.inf)


def truncated_product(factor: Callable, M: int, K: int, tail_majorant: float,
                      workers: int = 1) -> ProductResult:
    """
    prod_{k=M}^{K} factor(k) with a bound on the neglected tail.

    The caller certifies a >= sup_{k>K} k^2 (1 - factor(k)). Comparing
    sum_{k>K} -log(1 - a/k^2) with an integral gives the log-error bound
    a / (K (1 - a/K^2)), so the infinite product lies in
    [value * exp(-tail_bound), value].

    Args:
        factor: Callable on an integer array (or on a single integer)
        M: First index
        K: Last index (K < M means an empty range)
        tail_majorant: The certified constant a
        workers: Threads used for the range-split log sum

    Returns:
        ProductResult

    Raises:
        DomainError: for a negative or oversized majorant, or a factor outside (0, 1]
    """
    if M < 1:
        raise DomainError(f"start index must be >= 1, got {M}")
    if tail_majorant < 0:
        raise DomainError("tail majorant must be non-negative")

    tail_bound = integral_tail_bound(tail_majorant, max(K, M - 1, 1))

    if K < M:
        return ProductResult(value=1.0, truncation_index=K, tail_bound=tail_bound)

    chunks = [(lo, min(lo + CHUNK_SIZE - 1, K)) for lo in range(M, K + 1, CHUNK_SIZE)]

    def chunk_log(bounds: Tuple[int, int]) -> float:
        lo, hi = bounds
        ks = np.arange(lo, hi + 1)
        values = _evaluate_factor(factor, ks)
        bad = np.flatnonzero((values <= 0) | (values > 1) | ~np.isfinite(values))
        if bad.size:
            k = int(ks[bad[0]])
            raise DomainError(f"factor must lie in (0, 1], got {values[bad[0]]:.6g} at k={k}")
        return math.fsum(np.log(values))

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(chunk_log, chunks))
    else:
        partials = [chunk_log(c) for c in chunks]

    return ProductResult(value=math.exp(math.fsum(partials)), truncation_index=K, tail_bound=tail_bound)


def integral_tail_bound(tail_majorant: float, K: int) -> float:
    """Bound a / (K (1 - a/K^2)) on sum_{k>K} -log(1 - a/k^2)."""
    if tail_majorant < 0:
        raise DomainError("tail majorant must be non-negative")
    if tail_majorant >= K ** 2:
        raise DomainError(f"tail majorant {tail_majorant:g} is too large for truncation at {K}")
    return tail_majorant / (K * (1.0 - tail_majorant / K ** 2))


def _evaluate_factor(factor: Callable, ks: np.ndarray) -> np.ndarray:
    """Call factor on the whole index array, falling back to one call per index."""
    try:
        values = np.asarray(factor(ks), dtype=float)
    except (TypeError, ValueError):
        values = None
    if values is None or values.shape != ks.shape:
        values = np.fromiter((factor(int(k)) for k in ks), dtype=float, count=ks.size)
    return values


def uniform_factor_spec() -> RationalProductSpec:
    """Spec of prod_{j>=3} [1 - (4j+1)/((j-1)^2 (j+1))]."""
    return RationalProductSpec.from_polynomials(
        UNIFORM_FACTOR_NUMERATOR, UNIFORM_FACTOR_DENOMINATOR, UNIFORM_FACTOR_START)
