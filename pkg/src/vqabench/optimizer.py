"""Derivative-free minimization with strict objective-call accounting.

The default method is an unconstrained COBYLA-style linear trust region:
keep a simplex of k+1 points, interpolate a linear model of the objective on
it, step a distance rho against the model gradient, and accept or reject by
actual-versus-predicted reduction. rho shrinks from ``rho_beg`` toward
``rho_end``; a run stops when rho falls below ``rho_end`` or when the
objective-call budget ``n_max`` is spent, whichever comes first.

Every objective invocation is counted, including the calls that build the
initial simplex, so ``n_calls == len(history)`` always and never exceeds
``n_max``. Non-finite objective values are recorded as +inf and can never win
a comparison, which keeps the budget guarantee even for NaN-returning
objectives. The optimizer itself is deterministic: with a deterministic
objective, identical (initial, settings) reproduce the full history.

Alternative optimizers plug in by matching the ``minimize`` signature; this
module's implementation is the default used for experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Simplex geometry bounds (offset lengths within BETA*rho, per-vertex extent
# at least ALPHA*rho) and the fraction of rho used by geometry-repair steps.
_ALPHA = 0.25
_BETA = 2.1
_GEOM_FRACTION = 0.5
_ACCEPT_RATIO = 0.1
_SHRINK = 0.5


@dataclass(frozen=True)
class OptimizerSettings:
    """Budget and trust-region radii for one optimization run.

    ``n_max`` is a hard cap on objective evaluations and doubles as the
    normalization constant of the quality diagram, so it is recorded with
    every run. ``rho_beg``/``rho_end`` are in radians for ansatz angles.
    """

    n_max: int = 1000
    rho_beg: float = 1.0
    rho_end: float = 1e-4

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError(f"n_max must be positive, got {self.n_max}")
        if not 0.0 < self.rho_end < self.rho_beg:
            raise ValueError(
                f"need 0 < rho_end < rho_beg, got rho_end={self.rho_end}, rho_beg={self.rho_beg}"
            )


@dataclass
class OptimizationResult:
    final_params: np.ndarray
    n_calls: int
    best_value: float
    history: list[tuple[int, float]] = field(repr=False)


def minimize(objective, initial: np.ndarray, settings: OptimizerSettings) -> OptimizationResult:
    """Minimize a (possibly stochastic) objective over unconstrained reals.

    Returns the best evaluation seen, its value, the number of objective
    calls consumed, and the full 1-based ``(call index, value)`` history
    (with non-finite values stored as +inf).
    """
    x0 = np.array(initial, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError(f"initial point must be a non-empty vector, got shape {x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial point must be finite")
    k = x0.size
    if settings.n_max < k + 2:
        raise ValueError(
            f"n_max={settings.n_max} too small: building the linear model over "
            f"{k} parameters takes at least {k + 2} evaluations"
        )

    history: list[tuple[int, float]] = []
    best_x = x0.copy()
    best_f = math.inf

    def call(x: np.ndarray) -> float:
        nonlocal best_x, best_f
        raw = objective(x.copy())
        value = float(raw)
        if not math.isfinite(value):
            value = math.inf
        history.append((len(history) + 1, value))
        if value < best_f:
            best_f = value
            best_x = x.copy()
        return value

    def done() -> OptimizationResult:
        return OptimizationResult(
            final_params=best_x.copy(),
            n_calls=len(history),
            best_value=best_f,
            history=history,
        )

    # Initial simplex: the start point plus a rho_beg step along each coordinate.
    verts = np.tile(x0, (k + 1, 1))
    fvals = np.full(k + 1, math.inf)
    fvals[0] = call(verts[0])
    for i in range(k):
        if len(history) >= settings.n_max:
            return done()
        verts[i + 1, i] += settings.rho_beg
        fvals[i + 1] = call(verts[i + 1])

    rho = settings.rho_beg
    while len(history) < settings.n_max and rho >= settings.rho_end:
        # Pivot the best vertex (the pole) into row 0.
        b = int(np.argmin(fvals))
        if b != 0:
            verts[[0, b]] = verts[[b, 0]]
            fvals[[0, b]] = fvals[[b, 0]]
        pole, fpole = verts[0], fvals[0]
        span = verts[1:] - pole  # row j: offset of vertex j+1
        with np.errstate(invalid="ignore"):  # inf vertices give nan differences
            df = fvals[1:] - fpole

        inv = _inverse_or_none(span)
        if inv is None:
            # Rank-deficient simplex: push the shortest offset along the
            # null direction to restore a basis.
            null_dir = np.linalg.svd(span)[2][-1]
            j = int(np.argmin(np.linalg.norm(span, axis=1)))
            step = _GEOM_FRACTION * rho * null_dir
            step = _orient_downhill(step, span, df)
            verts[j + 1] = pole + step
            fvals[j + 1] = call(verts[j + 1])
            continue

        lengths = np.linalg.norm(span, axis=1)
        extents = 1.0 / np.linalg.norm(inv, axis=0)  # column j: normal of vertex j+1
        if lengths.max() > _BETA * rho or extents.min() < _ALPHA * rho:
            # Geometry repair: rebuild the worst-placed vertex at half the
            # trust radius along its orthogonal-complement direction.
            if lengths.max() > _BETA * rho:
                j = int(np.argmax(lengths))
            else:
                j = int(np.argmin(extents))
            direction = inv[:, j] / np.linalg.norm(inv[:, j])
            step = _orient_downhill(_GEOM_FRACTION * rho * direction, span, df)
            verts[j + 1] = pole + step
            fvals[j + 1] = call(verts[j + 1])
            continue

        # Linear model: span @ g = df. The trust-region minimizer of the
        # model is the full-radius step against g. A non-finite model (some
        # vertex stuck at +inf) falls through to the radius shrink below.
        with np.errstate(invalid="ignore", over="ignore"):
            g = inv @ df
        gnorm = float(np.linalg.norm(g))
        predicted = rho * gnorm
        if not math.isfinite(predicted) or predicted <= 1e-13 * max(1.0, abs(fpole)):
            rho *= _SHRINK
            continue
        xnew = pole - (rho / gnorm) * g
        fnew = call(xnew)
        actual = fpole - fnew

        if actual > _ACCEPT_RATIO * predicted:
            # Good step: drop the vertex whose span coefficient the step uses
            # most, which keeps the simplex well conditioned.
            coeffs = inv.T @ (xnew - pole)
            j = int(np.argmax(np.abs(coeffs)))
            verts[j + 1] = xnew
            fvals[j + 1] = fnew
        else:
            # Poor step with sound geometry: the model is trustworthy at this
            # scale, so tighten the radius; keep the point if it at least
            # improves the worst vertex.
            w = 1 + int(np.argmax(fvals[1:]))
            if fnew < fvals[w]:
                verts[w] = xnew
                fvals[w] = fnew
            rho *= _SHRINK

    return done()


def _inverse_or_none(span: np.ndarray) -> np.ndarray | None:
    try:
        inv = np.linalg.inv(span)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(inv)):
        return None
    return inv


def _orient_downhill(step: np.ndarray, span: np.ndarray, df: np.ndarray) -> np.ndarray:
    """Flip a geometry step so the least-squares model predicts descent."""
    if not np.all(np.isfinite(df)):
        return step
    g = np.linalg.lstsq(span, df, rcond=None)[0]
    if np.all(np.isfinite(g)) and float(g @ step) > 0.0:
        return -step
    return step
