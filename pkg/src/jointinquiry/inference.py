"""Bayesian posterior over a finite grid of circle hypotheses."""

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ContradictionError, ValidationError
from .inquiry import PROB_ATOL, shannon_entropy
from .validation import check_locations, check_intensities
from .world import CircleState, MeasurementLocation, SensorModel, as_generator, predict_matrix

__all__ = [
    "StateGrid",
    "GridPosterior",
    "init_prior",
    "likelihood",
    "bayes_update",
    "posterior_entropy",
    "draw_samples",
    "map_estimate",
    "GridBayesEstimator",
]


def _strictly_increasing(name, values):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if np.any(np.diff(arr) <= 0):
        raise ValidationError(f"{name} must be strictly increasing")
    return arr


@dataclass(frozen=True, eq=False)
class StateGrid:
    """Cartesian product of candidate centers and radii.

    States are flattened with x varying slowest and radius fastest, so
    index ``(ix * ny + iy) * nr + ir`` is the state
    ``(x_centers[ix], y_centers[iy], radii[ir])``.
    """

    x_centers: np.ndarray
    y_centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_centers", _strictly_increasing("x_centers", self.x_centers))
        object.__setattr__(self, "y_centers", _strictly_increasing("y_centers", self.y_centers))
        radii = _strictly_increasing("radii", self.radii)
        if radii[0] <= 0:
            raise ValidationError("radii must be positive")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def linspace(cls, x_range, y_range, r_range):
        """Build a grid from ``(start, stop, num)`` triples."""
        return cls(np.linspace(*x_range), np.linspace(*y_range), np.linspace(*r_range))

    @property
    def shape(self):
        return (self.x_centers.size, self.y_centers.size, self.radii.size)

    @property
    def size(self):
        nx, ny, nr = self.shape
        return nx * ny * nr

    @cached_property
    def states(self):
        """Array of shape (size, 3) with rows ``(x, y, r)``."""
        X, Y, R = np.meshgrid(self.x_centers, self.y_centers, self.radii, indexing="ij")
        out = np.column_stack([X.ravel(), Y.ravel(), R.ravel()])
        out.setflags(write=False)
        return out

    def state(self, index):
        x, y, r = self.states[int(index)]
        return CircleState(float(x), float(y), float(r))

    def index_of(self, circle, atol=1e-9):
        """Flat index of ``circle``, or ``None`` when it is not on the grid."""
        hits = np.flatnonzero(np.all(np.abs(self.states - [circle.x, circle.y, circle.r]) <= atol, axis=1))
        return int(hits[0]) if hits.size else None

    def check_bounds(self, bounds):
        for name, vals, lo, hi in (
            ("x_centers", self.x_centers, bounds.xmin, bounds.xmax),
            ("y_centers", self.y_centers, bounds.ymin, bounds.ymax),
        ):
            if vals[0] < lo or vals[-1] > hi:
                raise ValidationError(f"{name} outside field bounds [{lo}, {hi}]")
        return self


@dataclass(frozen=True, eq=False)
class GridPosterior:
    """Normalised probability mass over the states of a :class:`StateGrid`."""

    grid: StateGrid
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float).ravel()
        if mass.size != self.grid.size:
            raise ValidationError(f"mass has {mass.size} entries, grid has {self.grid.size} states")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValidationError("posterior mass must be finite and non-negative")
        if abs(mass.sum() - 1.0) > PROB_ATOL:
            raise ValidationError(f"posterior mass sums to {mass.sum()!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def support(self):
        """Indices of states with non-zero mass."""
        return np.flatnonzero(self.mass > 0)

    def to_csv(self, fh=None):
        """Write one ``x_o,y_o,r_o,mass`` row per state; return text if ``fh`` is None."""
        sink = io.StringIO() if fh is None else fh
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["x_o", "y_o", "r_o", "mass"])
        for (x, y, r), m in zip(self.grid.states, self.mass):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(r)), repr(float(m))])
        if fh is None:
            return sink.getvalue()
        return None

    @classmethod
    def from_csv(cls, grid, fh):
        rows = list(csv.DictReader(fh))
        if len(rows) != grid.size:
            raise ValidationError(f"CSV has {len(rows)} rows, grid has {grid.size} states")
        states = np.array([[float(r["x_o"]), float(r["y_o"]), float(r["r_o"])] for r in rows])
        if not np.allclose(states, grid.states):
            raise ValidationError("CSV states do not match the grid")
        return cls(grid, np.array([float(r["mass"]) for r in rows]))


def init_prior(grid):
    """Uniform prior over every grid state."""
    return GridPosterior(grid, np.full(grid.size, 1.0 / grid.size))


def likelihood(predicted, obs, sensor):
    """Likelihood of observing ``obs`` given noiseless predictions ``predicted``.

    Ideal sensor: ``1 - eps`` when the reading agrees with the prediction,
    ``eps`` otherwise. Disk sensor: Gaussian density with the clamped
    boundary values 0 and 1 carrying the censored tail mass.
    """
    predicted = np.asarray(predicted, dtype=float)
    if sensor.kind == "ideal":
        eps = sensor.noise
        white = obs >= 0.5
        match = (predicted >= 0.5) == white
        return np.where(match, 1.0 - eps, eps)
    sigma = sensor.noise
    if sigma == 0.0:
        return (np.abs(predicted - obs) <= 1e-12).astype(float)
    if obs <= 0.0:
        return norm.cdf((0.0 - predicted) / sigma)
    if obs >= 1.0:
        return norm.sf((1.0 - predicted) / sigma)
    return norm.pdf(obs, loc=predicted, scale=sigma)


def bayes_update(posterior, location, obs, sensor):
    """Condition ``posterior`` on reading ``obs`` at ``location``.

    Only states in the current support are evaluated; zero-mass states
    stay at zero.
    """
    obs = float(obs)
    if not 0.0 <= obs <= 1.0:
        raise ValidationError(f"intensity must lie in [0, 1], got {obs!r}")
    support = posterior.support
    pred = predict_matrix(posterior.grid.states[support], [[location.x, location.y]], sensor)[:, 0]
    weighted = posterior.mass[support] * likelihood(pred, obs, sensor)
    evidence = weighted.sum()
    if not evidence > 0.0:
        raise ContradictionError(
            f"observation {obs} at ({location.x}, {location.y}) is impossible under every state"
        )
    mass = np.zeros(posterior.grid.size)
    mass[support] = weighted / evidence
    return GridPosterior(posterior.grid, mass)


def posterior_entropy(posterior):
    return shannon_entropy(posterior.mass)


def draw_samples(posterior, n, seed=None):
    """Draw ``n`` states with replacement, proportional to mass.

    Returns the flat state indices; use ``grid.state(i)`` for circles.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("need at least one sample")
    rng = as_generator(seed)
    support = posterior.support
    p = posterior.mass[support]
    return support[rng.choice(support.size, size=n, p=p / p.sum())]


def map_estimate(posterior):
    """Highest-mass state; ``np.argmax`` already breaks ties by lowest index."""
    return posterior.grid.state(int(np.argmax(posterior.mass)))


class GridBayesEstimator(BaseEstimator):
    """Grid posterior over circles, fitted from (location, intensity) readings.

    Parameters
    ----------
    grid : StateGrid
        Candidate circle hypotheses.
    sensor : SensorModel, default=None
        Sensor used to relate hypotheses to readings. ``None`` means the
        ideal sensor with the default flip probability.

    Attributes
    ----------
    posterior_ : GridPosterior
    n_observations_ : int

    Examples
    --------
    >>> grid = StateGrid.linspace((0, 10, 11), (0, 10, 11), (1, 4, 4))
    >>> est = GridBayesEstimator(grid, SensorModel(noise=0.0))
    >>> est.fit([[5, 5], [0, 0]], [1.0, 0.0]).posterior_.support.size > 0
    True
    """

    def __init__(self, grid, sensor=None):
        self.grid = grid
        self.sensor = sensor

    def _sensor(self):
        return self.sensor if self.sensor is not None else SensorModel()

    def fit(self, X, y):
        """Start from the uniform prior and condition on every reading."""
        self.posterior_ = init_prior(self.grid)
        self.n_observations_ = 0
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        """Condition the current posterior on more readings."""
        X = check_locations(X)
        y = check_intensities(y, len(X))
        if not hasattr(self, "posterior_"):
            self.posterior_ = init_prior(self.grid)
            self.n_observations_ = 0
        sensor = self._sensor()
        post = self.posterior_
        for (x, yy), obs in zip(X, y):
            post = bayes_update(post, MeasurementLocation(float(x), float(yy)), obs, sensor)
        self.posterior_ = post
        self.n_observations_ += len(X)
        return self

    def predict(self, X):
        """Noiseless intensity each location would read under the MAP circle."""
        check_is_fitted(self, "posterior_")
        X = check_locations(X)
        c = map_estimate(self.posterior_)
        return predict_matrix([[c.x, c.y, c.r]], X, self._sensor())[0]

    def predict_proba(self, X):
        """Posterior predictive distribution over outcome bins at each location.

        Returns an array of shape (n_locations, n_bins); for the ideal
        sensor the columns are (black, white).
        """
        check_is_fitted(self, "posterior_")
        X = check_locations(X)
        sensor = self._sensor()
        support = self.posterior_.support
        pred = predict_matrix(self.grid.states[support], X, sensor)
        bins = sensor.to_bins(pred)
        w = self.posterior_.mass[support]
        out = np.zeros((len(X), sensor.n_bins))
        for j in range(len(X)):
            out[j] = np.bincount(bins[:, j], weights=w, minlength=sensor.n_bins)
        return out

    def entropy(self):
        check_is_fitted(self, "posterior_")
        return posterior_entropy(self.posterior_)
