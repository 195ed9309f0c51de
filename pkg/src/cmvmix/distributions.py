"""Matrix-variate normal and contaminated matrix-variate normal laws.

The contaminated density is a two-component scale mixture: a "good" part
with weight alpha and a "bad" part whose row scale is inflated by eta > 1.
All density arithmetic is done in log space (posterior good-point
probabilities routinely reach 1e-160 on contaminated data and underflow in
linear space).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch

ETA_MIN = 1.0001

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class MvnParams:
    """Parameters (mean, row scale, column scale) of a matrix normal law.

    The pair (sigma, psi) is identified only up to reciprocal scaling, so
    the constructor normalizes sigma to have first diagonal element 1 and
    pushes the factor into psi; the Kronecker product psi (x) sigma is
    unchanged.
    """

    m: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        m = linalg.as_matrix(self.m, "m")
        sigma = linalg.as_spd(self.sigma, "sigma")
        psi = linalg.as_spd(self.psi, "psi")
        r, p = m.shape
        if sigma.shape[0] != r:
            raise DimensionMismatch(f"sigma {sigma.shape} does not match mean rows {r}")
        if psi.shape[0] != p:
            raise DimensionMismatch(f"psi {psi.shape} does not match mean cols {p}")
        s11 = sigma[0, 0]
        if s11 <= 0:
            raise ValueError("sigma[0,0] must be positive")
        sigma = sigma / s11
        psi = psi * s11
        for name, arr in (("m", m), ("sigma", sigma), ("psi", psi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.m.shape


@dataclass(frozen=True)
class CmvnParams:
    """Contaminated matrix normal: base law plus (alpha, eta).

    alpha is the proportion of good matrices; eta >= ETA_MIN inflates the
    row scale of the bad component.  alpha is validated in (0, 1): the
    intended operating range is (0.5, 1) (a majority-good model), but the
    estimation updates are unconstrained closed forms, so construction only
    rejects values outside the open unit interval.
    """

    base: MvnParams
    alpha: float
    eta: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.eta < ETA_MIN:
            raise ValueError(f"eta must be >= {ETA_MIN}, got {self.eta}")

    @property
    def shape(self):
        return self.base.shape


def mvn_log_density(x, params: MvnParams) -> float:
    """Log density of an r x p matrix under the matrix normal law."""
    return float(mvn_log_densities(np.asarray(x, dtype=float)[None, :, :], params)[0])


def mvn_log_densities(xs, params: MvnParams):
    """Vectorized matrix normal log density for a stack of shape (N, r, p)."""
    r, p = params.shape
    if xs.shape[1:] != (r, p):
        raise DimensionMismatch(f"observations {xs.shape[1:]} vs params {(r, p)}")
    L_sigma = linalg.cholesky(params.sigma, "sigma")
    L_psi = linalg.cholesky(params.psi, "psi")
    delta = linalg.trace_quad_forms(xs, params.m, L_sigma, L_psi)
    const = (
        -0.5 * r * p * _LOG_2PI
        - 0.5 * p * linalg.log_det_from_factor(L_sigma)
        - 0.5 * r * linalg.log_det_from_factor(L_psi)
    )
    return const - 0.5 * delta


def cmvn_log_density(x, params: CmvnParams) -> float:
    """Log of alpha * f_good + (1 - alpha) * f_bad, mixed via log-sum-exp."""
    return float(cmvn_log_densities(np.asarray(x, dtype=float)[None, :, :], params)[0])


def cmvn_log_densities(xs, params: CmvnParams):
    """Vectorized contaminated log density for a stack of shape (N, r, p)."""
    lg, lb = _component_log_densities(xs, params)
    return np.logaddexp(np.log(params.alpha) + lg, np.log1p(-params.alpha) + lb)


def _component_log_densities(xs, params: CmvnParams):
    """Log densities of the good and inflated components, sharing one
    distance computation (the inflated scale only rescales delta and the
    determinant)."""
    base = params.base
    r, p = base.shape
    if xs.shape[1:] != (r, p):
        raise DimensionMismatch(f"observations {xs.shape[1:]} vs params {(r, p)}")
    L_sigma = linalg.cholesky(base.sigma, "sigma")
    L_psi = linalg.cholesky(base.psi, "psi")
    delta = linalg.trace_quad_forms(xs, base.m, L_sigma, L_psi)
    const = (
        -0.5 * r * p * _LOG_2PI
        - 0.5 * p * linalg.log_det_from_factor(L_sigma)
        - 0.5 * r * linalg.log_det_from_factor(L_psi)
    )
    log_good = const - 0.5 * delta
    log_bad = const - 0.5 * r * p * np.log(params.eta) - 0.5 * delta / params.eta
    return log_good, log_bad


def posterior_good_prob(x, params: CmvnParams) -> float:
    """Posterior probability that x is a good (uncontaminated) point."""
    return float(posterior_good_probs(np.asarray(x, dtype=float)[None, :, :], params)[0])


def posterior_good_probs(xs, params: CmvnParams):
    """Vectorized posterior good-point probabilities, values in (0, 1)."""
    lg, lb = _component_log_densities(xs, params)
    num = np.log(params.alpha) + lg
    tot = np.logaddexp(num, np.log1p(-params.alpha) + lb)
    v = np.exp(num - tot)
    return np.clip(v, np.finfo(float).tiny, np.nextafter(1.0, 0.0))


def _check_weight_args(delta, alpha, eta, r, p):
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if eta <= 1.0:
        raise ValueError(f"eta must be > 1, got {eta}")
    if r < 1 or p < 1:
        raise ValueError("r and p must be positive")


def h_weight(delta, alpha, eta, r, p):
    """Posterior good-point probability as a closed form in the distance.

    h(delta) = 1 / (1 + ((1-alpha)/alpha) eta^(-rp/2) exp[(delta/2)(1 - 1/eta)]),
    strictly decreasing in delta; value in (0, 1).
    """
    _check_weight_args(delta, alpha, eta, r, p)
    log_odds = (
        np.log1p(-alpha)
        - np.log(alpha)
        - 0.5 * r * p * np.log(eta)
        + 0.5 * delta * (1.0 - 1.0 / eta)
    )
    # 1 / (1 + exp(log_odds)), stable for both signs
    if log_odds > 0:
        return float(np.exp(-log_odds) / (1.0 + np.exp(-log_odds)))
    return float(1.0 / (1.0 + np.exp(log_odds)))


def w_weight(delta, alpha, eta, r, p):
    """Effective mean-update weight (1/eta)[1 + (eta-1) h]; in [1/eta, 1].

    Decreasing in delta: distant points are progressively downweighted,
    bottoming out at 1/eta for a certain bad point.
    """
    h = h_weight(delta, alpha, eta, r, p)
    return float((1.0 + (eta - 1.0) * h) / eta)


def sample_mvn(params: MvnParams, rng: np.random.Generator):
    """Draw one r x p matrix: M + A Z B' with A A' = sigma, B B' = psi."""
    return sample_mvn_stack(params, 1, rng)[0]


def sample_mvn_stack(params: MvnParams, n: int, rng: np.random.Generator):
    """Draw n iid matrices as a stack of shape (n, r, p)."""
    r, p = params.shape
    a = linalg.cholesky(params.sigma, "sigma")
    b = linalg.cholesky(params.psi, "psi")
    z = rng.standard_normal((n, r, p))
    return params.m[None, :, :] + np.einsum("ij,njk,lk->nil", a, z, b)


def sample_cmvn(params: CmvnParams, rng: np.random.Generator):
    """Draw one matrix from the contaminated law.

    Returns (x, good): good ~ Bernoulli(alpha); bad draws come from the
    eta-inflated row scale.  The flag is only used by simulation truth
    records.
    """
    base = params.base
    good = bool(rng.random() < params.alpha)
    if good:
        return sample_mvn(base, rng), True
    inflated = MvnParams(base.m, params.eta * base.sigma, base.psi)
    return sample_mvn(inflated, rng), False
