"""Classical continuous-time random walk on the same hierarchy.

With the default diagonal the Hamiltonian is a symmetric generator ``Q``
(rows sum to zero, off-diagonals positive).  ``exp(tQ)`` shares the
eigenvectors of the quantum problem, so the class distribution is the
quantum amplitude formula with ``exp(i t eta_m)`` replaced by
``exp(t eta_m)``, where ``eta_m <= 0`` are relaxation rates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .hamiltonian import EpsilonSequence, Landscape, build_hamiltonian, default_eps0
from .quantum_walk import ClassProfile, WalkParams, _mode_weights, combine_classes
from .ultrametric import TreeParams

MODELS = ("power", "stretched", "logarithmic")


def _check_default_diagonal(es: EpsilonSequence, p: int) -> None:
    ref = default_eps0(es.eps, p)
    if abs(es.eps0 - ref) > 1e-12 * max(1.0, abs(ref)):
        raise ValidationError(
            f"a generator needs the row-sum-zero diagonal {ref!r}, got eps0={es.eps0!r}"
        )


def generator(es: EpsilonSequence, tp: TreeParams) -> np.ndarray:
    """Dense generator matrix (oracle use only; capped like the Hamiltonian)."""
    _check_default_diagonal(es, tp.p)
    return build_hamiltonian(es, tp)


def classical_oracle(wp: WalkParams, t: float) -> np.ndarray:
    """``exp(tQ) e_0`` by dense diagonalisation (test oracle)."""
    (t,) = np.atleast_1d(_check_times(t))
    lam, V = np.linalg.eigh(generator(wp.es, wp.tp))
    return V @ (np.exp(t * lam) * V[0])


def _check_times(t) -> np.ndarray:
    ts = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(ts)):
        raise DomainError(f"time must be finite, got {t!r}")
    if np.any(ts < 0.0):
        raise DomainError(f"classical evolution needs t >= 0, got {t!r}")
    return ts


def classical_grid(wp: WalkParams, ts) -> np.ndarray:
    """Class occupation probabilities per site, shape ``(len(ts), M+1)``."""
    _check_default_diagonal(wp.es, wp.p)
    ts = _check_times(ts)
    decay = np.exp(np.multiply.outer(ts, wp.spectrum.etas))
    out = combine_classes(wp.p, wp.M, decay)
    # exact values are >= 0; clip rounding residue from the V_k cancellation
    return np.maximum(out, 0.0)


def classical_distribution(wp: WalkParams, t: float) -> ClassProfile:
    return ClassProfile(wp.p, wp.M, classical_grid(wp, [t])[0])


def excess_return(wp: WalkParams, t):
    """``P_c(0, t) - p**-M``, summed directly so nothing cancels."""
    _check_default_diagonal(wp.es, wp.p)
    ts = _check_times(t)
    w = _mode_weights(wp.p, wp.M)[:-1]
    vals = np.exp(np.multiply.outer(ts, wp.spectrum.etas[:-1])) @ w
    return float(vals) if vals.ndim == 0 else vals


def return_probability(wp: WalkParams, t):
    """``P_c(0, t) = (p-1) sum_m p^-(m+1) exp(t eta_m) + p^-M``; O(M) per time."""
    return excess_return(wp, t) + float(wp.p) ** -wp.M


# ---------------------------------------------------------------------------
# decay-law fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFitResult:
    """Least-squares fit of one decay model on a time window.

    ``slope`` is taken in the model's linearising coordinates (against
    ``log t``): ``log P`` for *power*, ``log(-log P)`` for *stretched*,
    ``1/P`` for *logarithmic*.  ``residual`` is the RMS misfit of
    ``log P`` after mapping the fitted line back, so residuals of
    different models on the same data are comparable.
    """

    model: str
    slope: float
    intercept: float
    window: tuple
    residual: float

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValidationError(f"empty window {self.window}")
        if not self.residual >= 0.0:
            raise ValidationError(f"residual must be >= 0, got {self.residual}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def fit_decay_curve(t: np.ndarray, P: np.ndarray, model: str) -> DecayFitResult:
    """Fit ``model`` to samples ``P(t)`` (plateau already removed)."""
    if model not in MODELS:
        raise ValidationError(f"unknown decay model {model!r}; choose from {MODELS}")
    t = np.asarray(t, dtype=float)
    P = np.asarray(P, dtype=float)
    if t.shape != P.shape or t.size < 3:
        raise ValidationError("need at least three matching (t, P) samples")
    if np.any(t <= 0.0) or np.any(P <= 0.0):
        raise ValidationError("decay fits need t > 0 and P > 0")
    x = np.log(t)
    logP = np.log(P)
    if model == "power":
        y = logP
    elif model == "stretched":
        if np.any(P >= 1.0):
            raise ValidationError("stretched-exponential fit needs P < 1")
        y = np.log(-logP)
    else:
        y = 1.0 / P
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    if model == "power":
        pred = fitted
    elif model == "stretched":
        pred = -np.exp(fitted)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            pred = np.where(fitted > 0.0, -np.log(np.where(fitted > 0.0, fitted, 1.0)), np.nan)
    residual = math.sqrt(float(np.mean((pred - logP) ** 2)))
    if not math.isfinite(residual):
        residual = math.inf
    return DecayFitResult(model, float(slope), float(intercept), (float(t[0]), float(t[-1])), residual)


def fit_decay(
    ls: Landscape,
    tp: TreeParams,
    window: tuple,
    model: str,
    n_points: int = 200,
) -> DecayFitResult:
    """Fit the return-probability decay of landscape ``ls`` on ``window``.

    The ``p**-M`` plateau is removed first; a window whose excess falls
    below ten times the plateau is rejected instead of fitted.
    """
    t_min, t_max = (float(v) for v in window)
    if not (0.0 < t_min < t_max and math.isfinite(t_max)):
        raise ValidationError(f"window must satisfy 0 < t_min < t_max, got {window}")
    wp = WalkParams.from_landscape(ls, tp)
    t = np.geomspace(t_min, t_max, n_points)
    excess = excess_return(wp, t)
    plateau = float(tp.p) ** -tp.M
    if np.any(excess < 10.0 * plateau):
        bad = float(t[np.argmax(excess < 10.0 * plateau)])
        raise ValidationError(
            f"window reaches the p^-M plateau at t={bad:.6g}: "
            f"P_c - p^-M < 10 p^-M = {10.0 * plateau:.3g}"
        )
    return fit_decay_curve(t, excess, model)
