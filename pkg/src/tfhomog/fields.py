"""Diffusion coefficients and initial data used in the experiments.

The four benchmark coefficients are 1-periodic scalars on the unit cell:
two smooth sine perturbations of different amplitude around 10, and two
piecewise-constant fields that jump on the inner square U = [1/5, 4/5]^2.
Each field carries its ellipticity bracket [mu, upper].

Evaluation is vectorized; coordinates are wrapped into the unit cell
internally, so fields may be sampled anywhere in the plane.
"""
from __future__ import annotations

import numpy as np

from .grid import periodic_wrap


class CoefficientField:
    """Scalar 1-periodic coefficient with bounds mu <= kappa(y) <= upper."""

    def __init__(self, field_id: str, fn, mu: float, upper: float):
        if mu <= 0:
            raise ValueError(f"field {field_id!r} must be elliptic (mu > 0), got mu={mu}")
        self.id = field_id
        self._fn = fn
        self.mu = float(mu)
        self.upper = float(upper)

    def __call__(self, y1, y2):
        w1 = periodic_wrap(y1)
        w2 = periodic_wrap(y2)
        return self._fn(w1, w2)

    def __repr__(self):
        return f"CoefficientField({self.id!r}, mu={self.mu}, upper={self.upper})"


def _sine_bump(w1, w2):
    return w1 * w2 * (1.0 - w1) * (1.0 - w2)


def smooth_low() -> CoefficientField:
    """10 + sin(2 pi {y1}{y2}(1-{y1})(1-{y2}))."""
    return CoefficientField(
        "smooth-low",
        lambda w1, w2: 10.0 + np.sin(2.0 * np.pi * _sine_bump(w1, w2)),
        mu=9.0, upper=11.0)


def smooth_high() -> CoefficientField:
    """Same profile with sine amplitude 9 instead of 1."""
    return CoefficientField(
        "smooth-high",
        lambda w1, w2: 10.0 + 9.0 * np.sin(2.0 * np.pi * _sine_bump(w1, w2)),
        mu=1.0, upper=19.0)


def _indicator_U(w1, w2):
    return (w1 >= 0.2) & (w1 <= 0.8) & (w2 >= 0.2) & (w2 <= 0.8)


def piecewise_low() -> CoefficientField:
    """11 on U = [1/5,4/5]^2, 10 elsewhere."""
    return CoefficientField(
        "piecewise-low",
        lambda w1, w2: np.where(_indicator_U(w1, w2), 11.0, 10.0),
        mu=10.0, upper=11.0)


def piecewise_high() -> CoefficientField:
    """20 on U = [1/5,4/5]^2, 10 elsewhere."""
    return CoefficientField(
        "piecewise-high",
        lambda w1, w2: np.where(_indicator_U(w1, w2), 20.0, 10.0),
        mu=10.0, upper=20.0)


def constant(c: float) -> CoefficientField:
    c = float(c)
    return CoefficientField(f"constant:{c:g}",
                            lambda w1, w2: np.full(np.shape(w1), c, dtype=float),
                            mu=c, upper=c)


_LAYERED_PROFILES = {
    # step: 19 on [0, 1/2), 10 on [1/2, 1); effective values are the
    # harmonic mean 2/(1/19 + 1/10) = 380/29 along y1 and the arithmetic
    # mean 14.5 across layers
    "step": (lambda w1: np.where(w1 < 0.5, 19.0, 10.0), 10.0, 19.0),
    # sine: 10 + 9 sin(2 pi y1); harmonic mean sqrt(100 - 81) = sqrt(19)
    "sine": (lambda w1: 10.0 + 9.0 * np.sin(2.0 * np.pi * w1), 1.0, 19.0),
}


def layered(name: str) -> CoefficientField:
    """y1-dependent field (layers); used mainly as a test oracle."""
    try:
        fn, mu, upper = _LAYERED_PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown layered profile {name!r}; "
                         f"known: {sorted(_LAYERED_PROFILES)}") from None
    return CoefficientField(f"layered:{name}", lambda w1, w2: fn(w1), mu=mu, upper=upper)


_NAMED_FIELDS = {
    "smooth-low": smooth_low,
    "smooth-high": smooth_high,
    "piecewise-low": piecewise_low,
    "piecewise-high": piecewise_high,
}


def parse_field(spec: str) -> CoefficientField:
    """Build a field from its CLI/config id.

    Accepted: "smooth-low", "smooth-high", "piecewise-low",
    "piecewise-high", "constant:<c>", "layered:<name>".
    """
    if spec in _NAMED_FIELDS:
        return _NAMED_FIELDS[spec]()
    if spec.startswith("constant:"):
        try:
            c = float(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad constant field spec {spec!r}") from None
        return constant(c)
    if spec.startswith("layered:"):
        return layered(spec.split(":", 1)[1])
    raise ValueError(f"unknown coefficient field {spec!r}")


def eval_kappa(field: CoefficientField, y):
    """Evaluate kappa at a point (or array of points with last axis 2)."""
    y = np.asarray(y, dtype=float)
    return field(y[..., 0], y[..., 1])


def eval_kappa_eps(field: CoefficientField, eps: float, x):
    """kappa^eps(x) := kappa(x / eps)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x = np.asarray(x, dtype=float)
    return field(x[..., 0] / eps, x[..., 1] / eps)


class InitialData:
    """Initial datum a(x) on D = [0,1]^2."""

    def __init__(self, data_id: str, fn):
        self.id = data_id
        self._fn = fn

    def __call__(self, x1, x2):
        return self._fn(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))

    def __repr__(self):
        return f"InitialData({self.id!r})"


def smooth_poly() -> InitialData:
    """x1(1-x1)x2(1-x2); vanishes on the boundary of the unit square."""
    return InitialData("smooth-poly",
                       lambda x1, x2: x1 * (1.0 - x1) * x2 * (1.0 - x2))


def rough_indicator() -> InitialData:
    """Indicator of the open square (1/2,1)^2 (edges assigned to 0)."""
    return InitialData(
        "rough-indicator",
        lambda x1, x2: ((x1 > 0.5) & (x1 < 1.0) & (x2 > 0.5) & (x2 < 1.0)).astype(float))


_NAMED_INITIAL = {
    "smooth-poly": smooth_poly,
    "rough-indicator": rough_indicator,
}


def parse_initial(spec: str) -> InitialData:
    if spec in _NAMED_INITIAL:
        return _NAMED_INITIAL[spec]()
    raise ValueError(f"unknown initial data {spec!r}; known: {sorted(_NAMED_INITIAL)}")


def eval_initial(data: InitialData, x):
    x = np.asarray(x, dtype=float)
    return data(x[..., 0], x[..., 1])
