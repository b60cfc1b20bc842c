"""Hidden circle, sensor models and ground-truth measurement simulation."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError

__all__ = [
    "FieldBounds",
    "CircleState",
    "MeasurementLocation",
    "SensorModel",
    "contains",
    "predict",
    "predict_matrix",
    "overlap_fraction",
    "simulate_measurement",
    "as_generator",
]

SENSOR_KINDS = ("ideal", "disk")


@dataclass(frozen=True)
class FieldBounds:
    xmin: float = 0.0
    xmax: float = 100.0
    ymin: float = 0.0
    ymax: float = 100.0

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValidationError("field bounds must satisfy xmax > xmin and ymax > ymin")

    def contains_point(self, x, y):
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


@dataclass(frozen=True)
class CircleState:
    """One hypothesis about the hidden circle."""

    x: float
    y: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValidationError(f"circle radius must be positive, got {self.r!r}")

    def check_bounds(self, bounds):
        if not bounds.contains_point(self.x, self.y):
            raise ValidationError(f"circle center ({self.x}, {self.y}) outside field bounds")
        return self


@dataclass(frozen=True)
class MeasurementLocation:
    x: float
    y: float

    def check_bounds(self, bounds):
        if not bounds.contains_point(self.x, self.y):
            raise ValidationError(f"measurement location ({self.x}, {self.y}) outside field bounds")
        return self


@dataclass(frozen=True)
class SensorModel:
    """Light-sensor model.

    ``kind="ideal"`` reads white (1) inside the circle and black (0) outside;
    ``noise`` is the probability that a reading is flipped. ``kind="disk"``
    reads the fraction of a disk of radius ``footprint_radius`` covered by
    the circle; ``noise`` is the standard deviation of additive Gaussian
    noise, and readings are clamped to ``[0, 1]``.
    """

    kind: str = "ideal"
    noise: float = 0.02
    footprint_radius: float = 1.0
    bins: int = 16

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValidationError(f"sensor kind must be one of {SENSOR_KINDS}, got {self.kind!r}")
        if self.kind == "ideal" and not (0.0 <= self.noise < 0.5):
            raise ValidationError("ideal sensor flip probability must lie in [0, 0.5)")
        if self.kind == "disk":
            if not self.noise >= 0.0:
                raise ValidationError("disk sensor noise sigma must be >= 0")
            if not self.footprint_radius > 0.0:
                raise ValidationError("disk sensor footprint_radius must be positive")
            if int(self.bins) < 2:
                raise ValidationError("disk sensor needs at least 2 histogram bins")

    @property
    def n_bins(self):
        """Number of outcome bins used when histogramming predictions."""
        return 2 if self.kind == "ideal" else int(self.bins)

    def to_bins(self, values):
        """Map intensities in ``[0, 1]`` to outcome-bin indices."""
        v = np.asarray(values, dtype=float)
        if self.kind == "ideal":
            return (v >= 0.5).astype(np.intp)
        b = self.n_bins
        return np.minimum((v * b).astype(np.intp), b - 1)


def contains(circle, location):
    """True when ``location`` lies inside or on the boundary of ``circle``."""
    dx = location.x - circle.x
    dy = location.y - circle.y
    return dx * dx + dy * dy <= circle.r * circle.r


def overlap_fraction(d, r_circle, r_sensor):
    """Fraction of a sensor disk covered by a circle, for center distances ``d``.

    Exact lens-area formula, vectorised over any broadcastable inputs.
    """
    d, R, s = np.broadcast_arrays(
        np.asarray(d, dtype=float), np.asarray(r_circle, dtype=float), np.asarray(r_sensor, dtype=float)
    )
    out = np.zeros(d.shape)
    inner = d <= np.abs(R - s)
    out[inner] = np.minimum(R[inner], s[inner]) ** 2 / s[inner] ** 2
    lens = ~inner & (d < R + s)
    if np.any(lens):
        dl, Rl, sl = d[lens], R[lens], s[lens]
        a1 = np.clip((dl * dl + Rl * Rl - sl * sl) / (2 * dl * Rl), -1.0, 1.0)
        a2 = np.clip((dl * dl + sl * sl - Rl * Rl) / (2 * dl * sl), -1.0, 1.0)
        k = (-dl + Rl + sl) * (dl + Rl - sl) * (dl - Rl + sl) * (dl + Rl + sl)
        area = Rl * Rl * np.arccos(a1) + sl * sl * np.arccos(a2) - 0.5 * np.sqrt(np.maximum(k, 0.0))
        out[lens] = area / (np.pi * sl * sl)
    return np.clip(out, 0.0, 1.0)


def predict_matrix(states, locations, sensor):
    """Noiseless predicted intensity for every (state, location) pair.

    Parameters
    ----------
    states : ndarray of shape (n_states, 3)
        Rows of ``(x, y, r)``.
    locations : ndarray of shape (n_locations, 2)
        Rows of ``(x, y)``.
    sensor : SensorModel

    Returns
    -------
    ndarray of shape (n_states, n_locations)
        Values in ``[0, 1]``; exactly 0 or 1 for the ideal sensor.
    """
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    locations = np.asarray(locations, dtype=float).reshape(-1, 2)
    dx = locations[None, :, 0] - states[:, 0, None]
    dy = locations[None, :, 1] - states[:, 1, None]
    d2 = dx * dx + dy * dy
    r = states[:, 2, None]
    if sensor.kind == "ideal":
        return (d2 <= r * r).astype(float)
    return overlap_fraction(np.sqrt(d2), r, sensor.footprint_radius)


def predict(circle, location, sensor):
    """Noiseless predicted intensity at ``location`` if the circle is ``circle``."""
    if sensor.kind == "ideal":
        return 1.0 if contains(circle, location) else 0.0
    return float(predict_matrix([[circle.x, circle.y, circle.r]], [[location.x, location.y]], sensor)[0, 0])


def as_generator(seed):
    """Accept a Generator, SeedSequence, int or None and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate_measurement(truth, location, sensor, seed=None):
    """Draw one noisy reading of the true circle at ``location``.

    Exactly one random variate is consumed per call, so a shared generator
    advances identically regardless of the outcome.
    """
    rng = as_generator(seed)
    value = predict(truth, location, sensor)
    if sensor.kind == "ideal":
        u = rng.random()
        return 1.0 - value if u < sensor.noise else value
    z = rng.standard_normal()
    return float(min(max(value + sensor.noise * z, 0.0), 1.0))
