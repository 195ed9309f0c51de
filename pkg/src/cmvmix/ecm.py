"""ECM fitting of matrix-variate normal and contaminated-normal mixtures.

One ECM cycle runs the conditional maximizations first (weights/alpha/mean,
then the row scale given the previous column scale, then the column scale
given the new row scale, then the inflation parameter), followed by an
E-step that refreshes the cluster and good-point posteriors and the
observed log-likelihood.  Chains start from random responsibilities; fit()
runs several independent chains and keeps the best converged one.
"""

import enum
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from . import linalg
from .data import Dataset
from .distributions import (
    ETA_MIN,
    CmvnParams,
    MvnParams,
    mvn_log_densities,
    _component_log_densities,
)
from .errors import (
    AllStartsFailed,
    DegenerateCluster,
    DimensionMismatch,
    NotPositiveDefinite,
)

_ALPHA_EPS = 1e-12
_V_CEIL = np.nextafter(1.0, 0.0)


class Kind(str, enum.Enum):
    """Mixture family: plain matrix normal or contaminated matrix normal."""

    MVN = "mvn"
    CMVN = "cmvn"


@dataclass(frozen=True)
class MixtureModel:
    """Mixing weights plus per-component parameter records."""

    kind: Kind
    weights: np.ndarray
    components: Tuple[Union[MvnParams, CmvnParams], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be strictly positive and sum to 1")
        comps = tuple(self.components)
        if len(comps) != w.size:
            raise ValueError("weights and components disagree on G")
        want = CmvnParams if self.kind is Kind.CMVN else MvnParams
        if any(not isinstance(c, want) for c in comps):
            raise TypeError(f"{self.kind.value} model requires {want.__name__} components")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def g(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class Responsibilities:
    """Cluster posteriors z (N x G) and, for CMVN, good-point posteriors v."""

    z: np.ndarray
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 2:
            raise DimensionMismatch("z must be N x G")
        object.__setattr__(self, "z", z)
        if self.v is not None:
            v = np.asarray(self.v, dtype=float)
            if v.shape != z.shape:
                raise DimensionMismatch("v must match z in shape")
            object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the ECM driver.

    min_cluster_weight defaults to r*p/2 effective observations at fit time;
    chains dropping below it abort and the next start runs.
    unscaled_eta_update switches the inflation update to the plain
    bad-mass-weighted mean distance without the rp divisor (for comparison
    only; the default form is the stationary point of the complete-data
    objective).
    """

    g: int = 1
    n_starts: int = 20
    max_iter: int = 1000
    tol: float = 1e-8
    eta_min: float = ETA_MIN
    seed: int = 0
    min_cluster_weight: Optional[float] = None
    unscaled_eta_update: bool = False
    init_eta: float = 2.0

    def __post_init__(self):
        if self.g < 1:
            raise ValueError("g must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.eta_min <= 1:
            raise ValueError("eta_min must be > 1")


@dataclass(frozen=True)
class FitResult:
    """Converged model plus everything needed for reporting and replay."""

    model: MixtureModel
    resp: Responsibilities
    loglik_trace: np.ndarray
    converged: bool
    iterations: int
    hard_labels: np.ndarray
    bad_flags: Optional[np.ndarray]
    seed: int
    config: FitConfig
    start_index: int = 0
    warnings: Tuple[str, ...] = ()

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


def _component_stack_logs(samples, model):
    """Per-component log densities, shape (N, G); for CMVN also the
    good-component posteriors v, else None."""
    n = samples.shape[0]
    g = model.g
    logf = np.empty((n, g))
    v = None
    if model.kind is Kind.CMVN:
        v = np.empty((n, g))
        for j, comp in enumerate(model.components):
            lg, lb = _component_log_densities(samples, comp)
            num = np.log(comp.alpha) + lg
            tot = np.logaddexp(num, np.log1p(-comp.alpha) + lb)
            logf[:, j] = tot
            v[:, j] = np.clip(np.exp(num - tot), np.finfo(float).tiny, _V_CEIL)
    else:
        for j, comp in enumerate(model.components):
            logf[:, j] = mvn_log_densities(samples, comp)
    return logf, v


def e_step(data: Dataset, model: MixtureModel) -> Responsibilities:
    """Posterior cluster memberships (and good-point posteriors for CMVN)."""
    logf, v = _component_stack_logs(data.samples, model)
    logw = logf + np.log(model.weights)[None, :]
    z = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
    z /= z.sum(axis=1, keepdims=True)
    return Responsibilities(z=z, v=v)


def observed_loglik(data: Dataset, model: MixtureModel) -> float:
    """Observed-data log-likelihood of the mixture."""
    logf, _ = _component_stack_logs(data.samples, model)
    return float(logsumexp(logf + np.log(model.weights)[None, :], axis=1).sum())


def _effective_weights(z, v, etas):
    """Per-observation M-step weights z * (v + (1 - v)/eta)."""
    if v is None:
        return z.copy()
    return z * (v + (1.0 - v) / etas[None, :])


def cm_step_1(data: Dataset, resp: Responsibilities, etas_prev):
    """Update mixing weights, alpha, and means.

    Returns (weights, alphas, means, u) where u are the effective weights
    reused by the scale updates; alphas is None for plain MVN.
    """
    z, v = resp.z, resp.v
    n = data.n
    ng = z.sum(axis=0)
    weights = ng / n
    alphas = None
    if v is not None:
        alphas = np.clip((z * v).sum(axis=0) / ng, _ALPHA_EPS, 1.0 - _ALPHA_EPS)
    u = _effective_weights(z, v, etas_prev)
    s = u.sum(axis=0)
    means = np.einsum("ig,irp->grp", u, data.samples) / s[:, None, None]
    return weights, alphas, means, u


def cm_step_2_sigma(samples, u, ng, means, prev_psis):
    """Row-scale update: weighted scatter through the previous column scale.

    Returned matrices are not yet normalized to sigma[0,0] = 1; that happens
    when the component record is built, after the column scale is also
    updated, so the Kronecker product is preserved exactly.
    """
    p = samples.shape[2]
    sigmas = []
    for j in range(means.shape[0]):
        L_psi = linalg.cholesky(prev_psis[j], "psi")
        acc = linalg.weighted_row_scatter(samples, means[j], u[:, j], L_psi)
        sigmas.append(acc / (p * ng[j]))
    return sigmas


def cm_step_3_psi(samples, u, ng, means, new_sigmas):
    """Column-scale update: weighted scatter through the new row scale."""
    r = samples.shape[1]
    psis = []
    for j in range(means.shape[0]):
        L_sigma = linalg.cholesky(new_sigmas[j], "sigma")
        acc = linalg.weighted_col_scatter(samples, means[j], u[:, j], L_sigma)
        psis.append(acc / (r * ng[j]))
    return psis


def cm_step_4_eta(samples, z, v, means, sigmas, psis, eta_min, rp_divisor=True):
    """Inflation update: bad-mass-weighted mean distance, floored at eta_min.

    The default divides by r*p (the stationary point of the complete-data
    objective in eta); rp_divisor=False reproduces the plain ratio.
    """
    n, r, p = samples.shape
    etas = []
    for j in range(means.shape[0]):
        L_sigma = linalg.cholesky(sigmas[j], "sigma")
        L_psi = linalg.cholesky(psis[j], "psi")
        delta = linalg.trace_quad_forms(samples, means[j], L_sigma, L_psi)
        bad_mass = z[:, j] * (1.0 - v[:, j])
        denom = bad_mass.sum()
        if denom < 1e-12:
            etas.append(eta_min)
            continue
        eta = float((bad_mass * delta).sum() / denom)
        if rp_divisor:
            eta /= r * p
        etas.append(max(eta_min, eta))
    return np.array(etas)


def _run_chain(data: Dataset, kind: Kind, config: FitConfig, init_z, init_v):
    """One deterministic ECM chain from given initial responsibilities.

    Raises DegenerateCluster / NotPositiveDefinite when the chain collapses;
    fit() treats that as a failed start.
    """
    samples = data.samples
    n, r, p = samples.shape
    g = config.g
    mcw = config.min_cluster_weight
    if mcw is None:
        mcw = r * p / 2.0

    z = np.asarray(init_z, dtype=float)
    v = np.asarray(init_v, dtype=float) if kind is Kind.CMVN else None
    etas = np.full(g, config.init_eta)
    psis = [np.eye(p)] * g

    trace = []
    prev_ll = None
    converged = False
    model = None
    resp = None
    iterations = 0

    for it in range(1, config.max_iter + 1):
        ng = z.sum(axis=0)
        if np.any(ng < mcw):
            raise DegenerateCluster(f"component mass fell below {mcw:.3g}: {ng}")
        resp_in = Responsibilities(z=z, v=v)
        weights, alphas, means, u = cm_step_1(data, resp_in, etas)
        sigmas = cm_step_2_sigma(samples, u, ng, means, psis)
        psis = cm_step_3_psi(samples, u, ng, means, sigmas)
        if kind is Kind.CMVN:
            etas = cm_step_4_eta(samples, z, v, means, sigmas, psis, config.eta_min,
                           rp_divisor=not config.unscaled_eta_update)
            comps = tuple(
                CmvnParams(MvnParams(means[j], sigmas[j], psis[j]),
                           float(alphas[j]), float(etas[j]))
                for j in range(g)
            )
        else:
            comps = tuple(MvnParams(means[j], sigmas[j], psis[j]) for j in range(g))
        model = MixtureModel(kind=kind, weights=weights / weights.sum(), components=comps)

        resp = e_step(data, model)
        ll = observed_loglik(data, model)
        trace.append(ll)
        z, v = resp.z, resp.v
        iterations = it

        if prev_ll is not None and abs(ll - prev_ll) / (1.0 + abs(ll)) < config.tol:
            converged = True
            break
        prev_ll = ll

    return model, resp, np.array(trace), converged, iterations


def _initial_responsibilities(rng, n, g, kind):
    z = rng.dirichlet(np.ones(g), size=n)
    v = rng.uniform(0.5, 1.0, size=(n, g)) if kind is Kind.CMVN else None
    return z, v


def fit(data: Dataset, config: FitConfig, kind: Kind = Kind.CMVN) -> FitResult:
    """Multi-start ECM fit; returns the best chain by final log-likelihood.

    Start s draws its initial responsibilities from a generator seeded with
    seed XOR s, so results are reproducible and independent of execution
    order.  Raises AllStartsFailed when every chain degenerates.
    """
    kind = Kind(kind)
    if data.n < config.g:
        raise DimensionMismatch(f"need at least G={config.g} observations, have {data.n}")
    # Chains are ranked admissible-first, then converged, then by final
    # log-likelihood.  A chain whose final alpha leaves (0.5, 1) sits outside
    # the parameter space ("good" points must be the majority of every
    # cluster), and a chain still climbing at max_iter is usually riding an
    # unbounded likelihood spike; both are kept only as fallbacks.
    best = None
    best_key = None
    failures = []
    for s in range(config.n_starts):
        rng = np.random.default_rng(config.seed ^ s)
        init_z, init_v = _initial_responsibilities(rng, data.n, config.g, kind)
        try:
            model, resp, trace, converged, iters = _run_chain(data, kind, config, init_z, init_v)
        except (DegenerateCluster, NotPositiveDefinite) as exc:
            failures.append(f"start {s}: {exc}")
            continue
        admissible = kind is Kind.MVN or all(c.alpha > 0.5 for c in model.components)
        key = (admissible, converged, trace[-1])
        if best is None or key > best_key:
            best, best_key = (model, resp, trace, converged, iters, s), key
    if best is None:
        raise AllStartsFailed("; ".join(failures))
    model, resp, trace, converged, iters, s = best
    labels, bad = classify_from(resp, model.kind)
    warns = []
    if model.kind is Kind.CMVN:
        for j, comp in enumerate(model.components):
            if comp.alpha <= 0.5:
                warns.append(f"component {j}: majority-bad (alpha={comp.alpha:.4f})")
    return FitResult(
        model=model,
        resp=resp,
        loglik_trace=trace,
        converged=converged,
        iterations=iters,
        hard_labels=labels,
        bad_flags=bad,
        seed=config.seed,
        config=config,
        start_index=s,
        warnings=tuple(warns),
    )


def classify_from(resp: Responsibilities, kind: Kind):
    """Hard labels by maximal z (ties to the lowest index) and, for CMVN,
    bad flags where the assigned component's good-posterior is <= 0.5."""
    labels = np.argmax(resp.z, axis=1)
    bad = None
    if kind is Kind.CMVN:
        bad = resp.v[np.arange(len(labels)), labels] <= 0.5
    return labels, bad


def classify(result: FitResult):
    """(labels, bad_flags) of a finished fit."""
    return classify_from(result.resp, result.model.kind)


def expected_complete_loglik(data: Dataset, resp: Responsibilities, model: MixtureModel) -> float:
    """Expected complete-data log-likelihood at the given posteriors.

    Used to check that each conditional maximization weakly increases the
    objective it optimizes.
    """
    samples = data.samples
    n, r, p = samples.shape
    z = resp.z
    total = float((z * np.log(model.weights)[None, :]).sum())
    for j, comp in enumerate(model.components):
        if model.kind is Kind.CMVN:
            base, alpha, eta = comp.base, comp.alpha, comp.eta
            v = resp.v[:, j]
        else:
            base, alpha, eta = comp, None, 1.0
            v = np.ones(n)
        L_sigma = linalg.cholesky(base.sigma, "sigma")
        L_psi = linalg.cholesky(base.psi, "psi")
        delta = linalg.trace_quad_forms(samples, base.m, L_sigma, L_psi)
        zj = z[:, j]
        if alpha is not None:
            total += float((zj * (v * np.log(alpha) + (1 - v) * np.log1p(-alpha))).sum())
        total += float(
            (
                zj
                * (
                    -0.5 * r * p * np.log(2 * np.pi)
                    - 0.5 * p * linalg.log_det_from_factor(L_sigma)
                    - 0.5 * r * linalg.log_det_from_factor(L_psi)
                    - 0.5 * r * p * (1 - v) * np.log(eta)
                    - 0.5 * (v + (1 - v) / eta) * delta
                )
            ).sum()
        )
    return total
