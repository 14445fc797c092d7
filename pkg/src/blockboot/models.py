"""Seedable generators for stationary test processes.

Three process families are provided, each strongly mixing:

``arma11``
    Gaussian ARMA(1,1), ``X_t = 0.4 X_{t-1} + e_t + 0.3 e_{t-1}``, with
    exponentially decaying mixing coefficients.
``arma23sq``
    The square ``Y_t = X_t**2`` of a Gaussian ARMA(2,3)
    ``X_t = 0.1 X_{t-1} - 0.3 X_{t-2} + e_t + 0.1 e_{t-1} + 0.2 e_{t-2}
    - 0.1 e_{t-3}``; squaring preserves the exponential mixing rate.
``polymix``
    A truncated one-sided moving average ``X_t = sum_j c_j Z_{t-j}`` with
    ``c_j = (1/(j+1))**nu``, whose mixing coefficients decay polynomially
    with exponent bounded by ``nu - 2``.

ARMA recursions are started from the exact stationary joint law of the
initial states and innovations (computed from the moving-average weights), so
every output value has the stationary marginal distribution.  An alternative
``init="independent"`` mode draws the initial values independently from their
marginals; that scheme is only asymptotically stationary and inflates the
variance of the first few observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr, ndtri

from .seeding import standard_normal_stream, substream

__all__ = [
    "ModelSpec",
    "TimeSeries",
    "MODEL_NAMES",
    "arma11_model",
    "squared_arma23_model",
    "poly_mixing_model",
    "constant_model",
    "model_from_name",
    "simulate",
    "simulate_batch",
    "simulate_arma11",
    "simulate_squared_arma23",
    "simulate_poly_mixing",
    "standard_normal_stream",
]

MODEL_NAMES = ("arma11", "arma23sq", "polymix")

_ARMA11_AR = (0.4,)
_ARMA11_MA = (0.3,)
_ARMA23_AR = (0.1, -0.3)
_ARMA23_MA = (0.1, 0.2, -0.1)


@dataclass(frozen=True)
class ModelSpec:
    """Description of a stationary test process.

    Attributes
    ----------
    kind : str
        One of ``"arma11"``, ``"arma23sq"``, ``"polymix"``, ``"constant"``.
    params : dict
        Named real parameters (AR/MA coefficients, or ``nu`` and ``n_terms``).
    marginal_sd : float
        Standard deviation of the stationary marginal.  For ``arma23sq`` this
        is the standard deviation of the latent Gaussian series.
    mixing : str
        ``"exponential"`` or ``"polynomial"`` decay of the mixing
        coefficients.
    beta_bound : float
        Upper bound on the polynomial mixing exponent (``inf`` for
        exponential mixing).
    """

    kind: str
    params: dict = field(default_factory=dict)
    marginal_sd: float = 1.0
    mixing: str = "exponential"
    beta_bound: float = math.inf

    def marginal_cdf(self, x):
        """Stationary marginal distribution function, evaluated at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.kind in ("arma11", "polymix"):
            out = ndtr(x / self.marginal_sd)
        elif self.kind == "arma23sq":
            out = np.where(x > 0.0, 2.0 * ndtr(np.sqrt(np.maximum(x, 0.0)) / self.marginal_sd) - 1.0, 0.0)
        elif self.kind == "constant":
            out = (x >= self.params["value"]).astype(float)
        else:
            raise ValueError(f"no closed-form marginal CDF for model kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    def marginal_quantile(self, p: float) -> float:
        """Stationary marginal quantile function at probability ``p``."""
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if self.kind in ("arma11", "polymix"):
            return float(self.marginal_sd * ndtri(p))
        if self.kind == "arma23sq":
            return float((self.marginal_sd * ndtri((1.0 + p) / 2.0)) ** 2)
        if self.kind == "constant":
            return float(self.params["value"])
        raise ValueError(f"no closed-form marginal quantile for model kind {self.kind!r}")

    @property
    def median(self) -> float:
        return self.marginal_quantile(0.5)


@dataclass(frozen=True)
class TimeSeries:
    """An observed sample path with its generation metadata."""

    values: np.ndarray
    model: ModelSpec | None = None
    seed: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("a time series must hold at least one observation")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


def _psi_weights(ar: tuple, ma: tuple, count: int) -> np.ndarray:
    """Moving-average weights of the causal ARMA transfer function."""
    p, q = len(ar), len(ma)
    psi = np.zeros(count)
    psi[0] = 1.0
    for k in range(1, count):
        acc = ma[k - 1] if k <= q else 0.0
        for i in range(1, min(k, p) + 1):
            acc += ar[i - 1] * psi[k - i]
        psi[k] = acc
    return psi


@lru_cache(maxsize=None)
def _arma_autocov(ar: tuple, ma: tuple, n_lags: int, n_terms: int = 512) -> tuple:
    psi = _psi_weights(ar, ma, n_terms)
    return tuple(float(psi[: n_terms - k] @ psi[k:]) for k in range(n_lags + 1))


@lru_cache(maxsize=None)
def _stationary_start_chol(ar: tuple, ma: tuple) -> np.ndarray:
    """Cholesky factor of the joint stationary covariance of the start state.

    The state vector is ``(X_0, ..., X_{1-p}, e_0, ..., e_{1-q})``; under
    stationarity ``Cov(X_{-a}, e_{-b})`` equals the moving-average weight
    ``psi_{b-a}`` for ``b >= a``.
    """
    p, q = len(ar), len(ma)
    gamma = _arma_autocov(ar, ma, p + 1)
    psi = _psi_weights(ar, ma, q + 1)
    dim = p + q
    cov = np.zeros((dim, dim))
    for a in range(p):
        for b in range(p):
            cov[a, b] = gamma[abs(a - b)]
    for a in range(p):
        for b in range(q):
            cov[a, p + b] = cov[p + b, a] = psi[b - a] if b >= a else 0.0
    cov[p:, p:] = np.eye(q)
    return np.linalg.cholesky(cov)


def _arma_batch(ar, ma, n, count, rng, burn_in=0, init="stationary"):
    p, q = len(ar), len(ma)
    total = burn_in + n
    if init == "stationary":
        chol = _stationary_start_chol(tuple(ar), tuple(ma))
        state = rng.standard_normal((count, p + q)) @ chol.T
    elif init == "independent":
        state = rng.standard_normal((count, p + q))
        state[:, :p] *= math.sqrt(_arma_autocov(tuple(ar), tuple(ma), 0)[0])
    else:
        raise ValueError(f"unknown init mode {init!r}")

    # Buffer layout: x columns hold (X_{1-p}, ..., X_0, X_1, ..., X_total) and
    # e columns hold (e_{1-q}, ..., e_0, e_1, ..., e_total).
    x = np.empty((count, p + total))
    e = np.empty((count, q + total))
    x[:, :p] = state[:, :p][:, ::-1]
    e[:, :q] = state[:, p:][:, ::-1]
    e[:, q:] = rng.standard_normal((count, total))
    for t in range(total):
        acc = e[:, q + t].copy()
        for j, theta in enumerate(ma, start=1):
            acc += theta * e[:, q + t - j]
        for i, phi in enumerate(ar, start=1):
            acc += phi * x[:, p + t - i]
        x[:, p + t] = acc
    return x[:, p + burn_in :]


def _poly_coeffs(nu: float, n_terms: int) -> np.ndarray:
    return (1.0 / (np.arange(n_terms) + 1.0)) ** nu


def _poly_mixing_batch(nu, n_terms, n, count, rng):
    coeffs = _poly_coeffs(nu, n_terms)
    z = rng.standard_normal((count, n + n_terms - 1))
    return fftconvolve(z, coeffs[None, :], mode="valid", axes=1)


def arma11_model() -> ModelSpec:
    """Preset Gaussian ARMA(1,1) with ``phi=0.4``, ``theta=0.3``."""
    var = _arma_autocov(_ARMA11_AR, _ARMA11_MA, 0)[0]
    return ModelSpec(
        kind="arma11",
        params={"phi": 0.4, "theta": 0.3},
        marginal_sd=math.sqrt(var),
        mixing="exponential",
    )


def squared_arma23_model() -> ModelSpec:
    """Preset squared Gaussian ARMA(2,3); ``marginal_sd`` refers to the latent series."""
    var = _arma_autocov(_ARMA23_AR, _ARMA23_MA, 0)[0]
    return ModelSpec(
        kind="arma23sq",
        params={"ar": _ARMA23_AR, "ma": _ARMA23_MA},
        marginal_sd=math.sqrt(var),
        mixing="exponential",
    )


def poly_mixing_model(nu: float = 10.0, n_terms: int = 100) -> ModelSpec:
    """Preset truncated moving average with polynomial mixing rate.

    Parameters
    ----------
    nu : float
        Coefficient decay exponent; must exceed 2 for a nondegenerate mixing
        bound.
    n_terms : int
        Truncation point of the moving-average series (default 100).
    """
    if nu <= 2.0:
        raise ValueError("nu must exceed 2 (mixing bound degenerate)")
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    var = float(np.sum(_poly_coeffs(nu, n_terms) ** 2))
    return ModelSpec(
        kind="polymix",
        params={"nu": float(nu), "n_terms": int(n_terms)},
        marginal_sd=math.sqrt(var),
        mixing="polynomial",
        beta_bound=float(nu) - 2.0,
    )


def constant_model(value: float = 0.0) -> ModelSpec:
    """Degenerate model emitting a constant series; useful in tests."""
    return ModelSpec(kind="constant", params={"value": float(value)}, marginal_sd=0.0)


def model_from_name(name: str, nu: float | None = None, n_terms: int | None = None) -> ModelSpec:
    """Look up a model preset by name (``arma11``, ``arma23sq``, ``polymix``).

    ``nu`` and ``n_terms`` override the ``polymix`` defaults and are rejected
    for the other presets.
    """
    if name == "arma11" or name == "arma23sq":
        if nu is not None or n_terms is not None:
            raise ValueError(f"model {name!r} takes no nu/n_terms overrides")
        return arma11_model() if name == "arma11" else squared_arma23_model()
    if name == "polymix":
        return poly_mixing_model(nu=10.0 if nu is None else nu, n_terms=100 if n_terms is None else n_terms)
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


def simulate_batch(model: ModelSpec, n: int, count: int, rng: np.random.Generator, burn_in: int = 0, init: str = "stationary") -> np.ndarray:
    """Simulate ``count`` independent length-``n`` sample paths.

    Returns an array of shape ``(count, n)``.  Rows are mutually independent;
    the draw layout is fixed, so a given generator state determines the
    output bit for bit.
    """
    if n < 1:
        raise ValueError("series length n must be at least 1")
    if count < 1:
        raise ValueError("count must be at least 1")
    if model.kind == "arma11":
        return _arma_batch(_ARMA11_AR, _ARMA11_MA, n, count, rng, burn_in, init)
    if model.kind == "arma23sq":
        latent = _arma_batch(_ARMA23_AR, _ARMA23_MA, n, count, rng, burn_in, init)
        return latent**2
    if model.kind == "polymix":
        return _poly_mixing_batch(model.params["nu"], model.params["n_terms"], n, count, rng)
    if model.kind == "constant":
        return np.full((count, n), model.params["value"])
    raise ValueError(f"cannot simulate model kind {model.kind!r}")


def simulate(model: ModelSpec, n: int, seed: int, burn_in: int = 0, init: str = "stationary") -> TimeSeries:
    """Simulate a single sample path from ``model`` under the given seed."""
    values = simulate_batch(model, n, 1, substream(seed), burn_in=burn_in, init=init)[0]
    return TimeSeries(values=values, model=model, seed=int(seed))


def simulate_arma11(n: int, seed: int, burn_in: int = 0, init: str = "stationary") -> TimeSeries:
    """Series from the ARMA(1,1) preset."""
    return simulate(arma11_model(), n, seed, burn_in=burn_in, init=init)


def simulate_squared_arma23(n: int, seed: int, burn_in: int = 0, init: str = "stationary") -> TimeSeries:
    """Series from the squared ARMA(2,3) preset; all values are nonnegative."""
    return simulate(squared_arma23_model(), n, seed, burn_in=burn_in, init=init)


def simulate_poly_mixing(n: int, seed: int, nu: float = 10.0, n_terms: int = 100) -> TimeSeries:
    """Series from the polynomial-mixing moving-average preset."""
    return simulate(poly_mixing_model(nu=nu, n_terms=n_terms), n, seed)
