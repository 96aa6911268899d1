"""Joint time-space Gaussian mixture estimation and regression.

Demonstrations are stacked into (t, x_1..x_n) rows with t the shared
normalized time vector. A mixture is fit per labeled subset with EM,
the component count is picked by BIC, and regression conditions the
joint model on time to produce a mean trajectory with per-timestep
covariances:

    m(t)     = sum_k beta_k(t) (mu_x^k + S_xt^k (S_tt^k)^-1 (t - mu_t^k))
    Sigma(t) = sum_k beta_k(t)^2 (S_xx^k - S_xt^k (S_tt^k)^-1 S_tx^k)

with beta_k(t) the prior-weighted responsibility of component k for
stamp t. All covariances are floored to symmetric positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateFitError, FitError, InsufficientDataError
from .trajectory import Trajectory

_LOG_2PI = float(np.log(2.0 * np.pi))
_PRIOR_COLLAPSE = 1e-12


@dataclass(frozen=True)
class FitConfig:
    """Knobs for EM and the BIC search."""

    k_range: tuple[int, int] = (1, 6)
    max_em_iters: int = 200
    tol: float = 1e-7
    cov_floor_rel: float = 1e-6
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.k_range
        if lo < 1 or hi < lo:
            raise FitError(f"invalid k_range {self.k_range}")
        if self.cov_floor_rel <= 0:
            raise FitError("cov_floor_rel must be positive")
        if self.restarts < 1 or self.max_em_iters < 1:
            raise FitError("restarts and max_em_iters must be >= 1")


@dataclass(frozen=True)
class MixtureModel:
    """GMM over (t, x) rows: priors, time-augmented means, covariances."""

    priors: np.ndarray          # (K,)
    means: np.ndarray           # (K, n+1), [mu_t, mu_x]
    covariances: np.ndarray     # (K, n+1, n+1)
    dim: int                    # n, spatial dimension
    floor: float                # effective SPD floor used during the fit
    loglik_history: tuple[float, ...] = ()
    time_support: tuple[float, float] = (0.0, 1.0)
    bic_table: "tuple[KCandidate, ...] | None" = None

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=float)
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covariances, dtype=float)
        if abs(priors.sum() - 1.0) > 1e-9:
            raise FitError(f"priors sum to {priors.sum()}, expected 1")
        if np.any(priors <= 0):
            raise FitError("priors must be positive")
        sym_err = np.max(np.abs(covs - covs.transpose(0, 2, 1)))
        if sym_err > 1e-9:
            raise FitError(f"covariances asymmetric by {sym_err}")
        smallest = np.linalg.eigvalsh(covs)[:, 0].min()
        if smallest < self.floor * (1.0 - 1e-6):
            raise FitError(f"covariance eigenvalue {smallest} below floor {self.floor}")
        for name, arr in (("priors", priors), ("means", means), ("covariances", covs)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.priors.shape[0]


@dataclass(frozen=True)
class KCandidate:
    """One row of the BIC search table."""

    k: int
    loglik: float | None
    bic: float | None
    error: str | None = None


@dataclass(frozen=True)
class RegressedPath:
    """Per-timestep regression output: means, covariances, stamps."""

    means: np.ndarray            # (T, n)
    covariances: np.ndarray      # (T, n, n)
    time: np.ndarray             # (T,)
    extrapolated: np.ndarray     # (T,) bool, stamps outside the fitted support
    inverse_covariances: np.ndarray = field(init=False)

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covariances, dtype=float)
        time = np.asarray(self.time, dtype=float)
        extr = np.asarray(self.extrapolated, dtype=bool)
        if not (len(means) == len(covs) == len(time) == len(extr)):
            raise FitError("regressed path fields disagree on length")
        inv = np.linalg.inv(covs)
        inv = 0.5 * (inv + inv.transpose(0, 2, 1))
        for name, arr in (
            ("means", means),
            ("covariances", covs),
            ("time", time),
            ("extrapolated", extr),
            ("inverse_covariances", inv),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def length(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def stack_rows(demos: Sequence[Trajectory]) -> np.ndarray:
    """Stack demonstrations into (S, n+1) rows of (t, x)."""
    if not demos:
        raise InsufficientDataError("no demonstrations to stack")
    T = demos[0].length
    n = demos[0].dim
    for d in demos:
        if d.length != T or d.dim != n:
            raise FitError("demonstrations must share length and dimension")
    t = np.linspace(0.0, 1.0, T)
    rows = np.empty((len(demos) * T, n + 1))
    for j, d in enumerate(demos):
        rows[j * T : (j + 1) * T, 0] = t
        rows[j * T : (j + 1) * T, 1:] = d.points
    return rows


def _effective_floor(data: np.ndarray, rel: float) -> float:
    scale = float(np.mean(np.var(data, axis=0)))
    if scale <= 0.0:
        scale = 1.0
    return rel * scale


def _floor_spd(covs: np.ndarray, floor: float) -> np.ndarray:
    """Symmetrize and lift the spectrum so every eigenvalue >= floor."""
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))
    d = covs.shape[-1]
    smallest = np.linalg.eigvalsh(covs)[:, 0]
    lift = floor - smallest
    mask = lift > 0
    if np.any(mask):
        covs[mask] += lift[mask, None, None] * np.eye(d)
    return covs


def _kmeanspp_centers(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    S = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(S)]
    d2 = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(S))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total))
            idx = min(idx, S - 1)
        centers[j] = data[idx]
        d2 = np.minimum(d2, np.sum((data - centers[j]) ** 2, axis=1))
    return centers


def _init_params(data, k, floor, rng):
    S, d = data.shape
    centers = _kmeanspp_centers(data, k, rng)
    dists = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = np.argmin(dists, axis=1)
    priors = np.empty(k)
    means = np.empty((k, d))
    covs = np.empty((k, d, d))
    global_cov = np.cov(data.T, bias=True).reshape(d, d)
    for j in range(k):
        members = data[assign == j]
        if len(members) == 0:
            far = int(np.argmax(dists[np.arange(S), assign]))
            members = data[far : far + 1]
        priors[j] = max(len(members), 1) / S
        means[j] = members.mean(axis=0)
        diff = members - means[j]
        covs[j] = diff.T @ diff / len(members) if len(members) > 1 else global_cov
    priors /= priors.sum()
    covs = _floor_spd(covs, floor)
    return priors, means, covs


def _em_single(data, k, cfg: FitConfig, floor, rng):
    S, d = data.shape
    priors, means, covs = _init_params(data, k, floor, rng)
    history: list[float] = []
    prev = -np.inf
    for _ in range(cfg.max_em_iters):
        chols = np.linalg.cholesky(covs)
        resp, loglik = _kernels.estep_responsibilities(
            data, means, chols, np.log(priors)
        )
        if not np.isfinite(loglik):
            raise DegenerateFitError("log-likelihood became non-finite")
        history.append(loglik)
        nk = resp.sum(axis=0)
        if np.any(nk / S < _PRIOR_COLLAPSE):
            raise DegenerateFitError("a component prior collapsed to zero")
        priors = nk / S
        means = (resp.T @ data) / nk[:, None]
        for j in range(k):
            diff = data - means[j]
            covs[j] = (resp[:, j, None] * diff).T @ diff / nk[j]
        covs = _floor_spd(covs, floor)
        if abs(loglik - prev) < cfg.tol:
            break
        prev = loglik
    return priors, means, covs, tuple(history)


def fit_em(demos: Sequence[Trajectory], k: int, cfg: FitConfig,
           _seed_seq: "np.random.SeedSequence | None" = None) -> MixtureModel:
    """Fit a k-component joint GMM with restarts; best log-likelihood wins."""
    if k < 1:
        raise FitError(f"k must be >= 1, got {k}")
    data = stack_rows(demos)
    S, d = data.shape
    n = d - 1
    if S < k * (n + 2):
        raise InsufficientDataError(
            f"{S} samples cannot support k={k} components in {n}-D"
        )
    floor = _effective_floor(data, cfg.cov_floor_rel)
    seed_seq = _seed_seq if _seed_seq is not None else np.random.SeedSequence(cfg.seed)
    children = seed_seq.spawn(cfg.restarts)
    best = None
    last_error: FitError | None = None
    for child in children:
        rng = np.random.default_rng(child)
        try:
            priors, means, covs, history = _em_single(data, k, cfg, floor, rng)
        except FitError as exc:
            last_error = exc
            continue
        if best is None or history[-1] > best[3][-1]:
            best = (priors, means, covs, history)
    if best is None:
        raise last_error if last_error is not None else DegenerateFitError("all restarts failed")
    priors, means, covs, history = best
    return MixtureModel(
        priors=priors,
        means=means,
        covariances=covs,
        dim=n,
        floor=floor,
        loglik_history=history,
        time_support=(float(data[:, 0].min()), float(data[:, 0].max())),
    )


def free_parameter_count(k: int, n: int) -> int:
    d = n + 1
    return (k - 1) + k * d + k * d * (d + 1) // 2


def bic_score(loglik: float, k: int, n: int, samples: int) -> float:
    return -2.0 * loglik + free_parameter_count(k, n) * float(np.log(samples))


def select_k_bic(demos: Sequence[Trajectory], cfg: FitConfig) -> MixtureModel:
    """Fit every k in k_range and keep the BIC minimizer (ties go small)."""
    data = stack_rows(demos)
    S = data.shape[0]
    n = data.shape[1] - 1
    lo, hi = cfg.k_range
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(hi - lo + 1)
    table: list[KCandidate] = []
    best_model = None
    best_bic = np.inf
    last_error: FitError | None = None
    for idx, k in enumerate(range(lo, hi + 1)):
        try:
            model = fit_em(demos, k, cfg, _seed_seq=children[idx])
        except FitError as exc:
            table.append(KCandidate(k=k, loglik=None, bic=None, error=str(exc)))
            last_error = exc
            continue
        ll = model.loglik_history[-1]
        bic = bic_score(ll, k, n, S)
        table.append(KCandidate(k=k, loglik=ll, bic=bic))
        if bic < best_bic:
            best_bic = bic
            best_model = model
    if best_model is None:
        raise last_error if last_error is not None else FitError("every k failed to fit")
    return replace(best_model, bic_table=tuple(table))


def gmr(model: MixtureModel, time: Sequence[float] | np.ndarray) -> RegressedPath:
    """Condition the joint model on time stamps."""
    stamps = np.asarray(time, dtype=float)
    if stamps.ndim != 1 or len(stamps) == 0:
        raise FitError("time stamps must be a nonempty 1-D sequence")
    mu_t = model.means[:, 0]
    mu_x = model.means[:, 1:]
    s_tt = model.covariances[:, 0, 0]
    s_xt = model.covariances[:, 1:, 0]
    s_xx = model.covariances[:, 1:, 1:]
    if np.any(s_tt < model.floor * (1.0 - 1e-6)):
        raise DegenerateFitError("temporal variance fell below the floor")

    diff = stamps[:, None] - mu_t[None, :]                    # (T, K)
    log_pt = -0.5 * (np.log(2.0 * np.pi * s_tt)[None, :] + diff**2 / s_tt[None, :])
    logw = log_pt + np.log(model.priors)[None, :]
    m = logw.max(axis=1, keepdims=True)
    beta = np.exp(logw - m)
    beta /= beta.sum(axis=1, keepdims=True)                   # (T, K)

    slope = s_xt / s_tt[:, None]                              # (K, n)
    cond_means = mu_x[None, :, :] + slope[None, :, :] * diff[:, :, None]
    means = np.einsum("tk,tkn->tn", beta, cond_means)

    cond_covs = s_xx - slope[:, :, None] * s_xt[:, None, :]   # (K, n, n)
    covs = np.einsum("tk,kij->tij", beta**2, cond_covs)
    covs = _floor_spd(covs, model.floor)

    t0, t1 = model.time_support
    extrapolated = (stamps < t0 - 1e-12) | (stamps > t1 + 1e-12)
    return RegressedPath(means=means, covariances=covs, time=stamps,
                         extrapolated=extrapolated)
