"""Entropy maps and joint-entropy measurement-pair selection.

Every quantity here is computed from a *prediction table*: the outcome bin
each weighted hypothesis predicts at each candidate location. In exact
mode the hypotheses are the posterior's support with their masses; in
sampled mode they are ``n`` posterior draws weighted ``1/n`` each.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import xlogy
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ValidationError
from .inference import draw_samples
from .validation import check_locations
from .world import MeasurementLocation, predict_matrix

__all__ = [
    "PredictionMode",
    "MapGrid",
    "EntropyMap",
    "PredictionTable",
    "prediction_table",
    "outcome_distribution",
    "joint_outcome_distribution",
    "entropy_at",
    "joint_entropy_at",
    "mutual_information_at",
    "entropy_map",
    "joint_entropy_map",
    "mutual_information_map",
    "pair_joint_entropy_matrix",
    "select_independent",
    "select_sequential_greedy",
    "select_joint_exhaustive",
    "hill_climb_pair_search",
    "JointEntropySelector",
]

# values within this of the maximum count as tied
TIE_ATOL = 1e-12
_LN2 = np.log(2.0)


@dataclass(frozen=True)
class PredictionMode:
    """``kind="exact"`` weights every support state by its mass;
    ``kind="sampled"`` histograms ``n_samples`` seeded posterior draws."""

    kind: str = "exact"
    n_samples: int = 45
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "sampled"):
            raise ValidationError(f"prediction mode must be 'exact' or 'sampled', got {self.kind!r}")
        if self.kind == "sampled" and int(self.n_samples) < 1:
            raise ValidationError("sampled mode needs n_samples >= 1")

    @classmethod
    def sampled(cls, n_samples=45, seed=0):
        return cls("sampled", int(n_samples), int(seed))


EXACT = PredictionMode()


@dataclass(frozen=True, eq=False)
class MapGrid:
    """Rectangular lattice of candidate measurement locations.

    Location index ``iy * nx + ix`` is ``(xs[ix], ys[iy])``; map values are
    stored as arrays of shape ``(ny, nx)`` in the same order.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        for name in ("xs", "ys"):
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            if arr.size == 0 or np.any(np.diff(arr) <= 0):
                raise ValidationError(f"map grid {name} must be non-empty and strictly increasing")
            object.__setattr__(self, name, arr)

    @classmethod
    def linspace(cls, x_range, y_range):
        return cls(np.linspace(*x_range), np.linspace(*y_range))

    @property
    def shape(self):
        return (self.ys.size, self.xs.size)

    @property
    def size(self):
        return self.xs.size * self.ys.size

    @property
    def points(self):
        """Array of shape (size, 2) in index order."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])

    def location(self, index):
        iy, ix = divmod(int(index), self.xs.size)
        return MeasurementLocation(float(self.xs[ix]), float(self.ys[iy]))

    def index_of(self, location, atol=1e-9):
        ix = np.flatnonzero(np.abs(self.xs - location.x) <= atol)
        iy = np.flatnonzero(np.abs(self.ys - location.y) <= atol)
        if ix.size == 0 or iy.size == 0:
            return None
        return int(iy[0]) * self.xs.size + int(ix[0])

    def check_bounds(self, bounds):
        if self.xs[0] < bounds.xmin or self.xs[-1] > bounds.xmax:
            raise ValidationError("map grid xs outside field bounds")
        if self.ys[0] < bounds.ymin or self.ys[-1] > bounds.ymax:
            raise ValidationError("map grid ys outside field bounds")
        return self


@dataclass(frozen=True, eq=False)
class EntropyMap:
    """Per-location values (bits) over a :class:`MapGrid`."""

    grid: MapGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "values", values)

    def flat(self):
        return self.values.ravel()

    def argmax(self):
        return self.grid.location(_argmax_tol(self.flat()))

    def to_csv(self, fh=None):
        """Rows ``x,y,value`` in location-index order."""
        sink = io.StringIO() if fh is None else fh
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["x", "y", "value"])
        for (x, y), v in zip(self.grid.points, self.flat()):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
        return sink.getvalue() if fh is None else None

    def to_pgm(self):
        """Binary 8-bit PGM (P5) bytes.

        Pixel = ``round(255 * value / max(values))`` (all zero when the
        maximum is not positive); row-major with the top row at max y.
        """
        return encode_pgm(self.values)


def pgm_scale(values):
    values = np.asarray(values, dtype=float)
    vmax = values.max() if values.size else 0.0
    if not vmax > 0:
        return np.zeros(values.shape, dtype=np.uint8)
    scaled = np.rint(255.0 * np.clip(values, 0.0, None) / vmax)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def encode_pgm(values):
    pixels = pgm_scale(values)[::-1]
    ny, nx = pixels.shape
    return b"P5\n%d %d\n255\n" % (nx, ny) + pixels.tobytes()


def decode_pgm(data):
    """Inverse of :func:`encode_pgm`; returns the pixel array with row 0 at min y."""
    header, rest = data.split(b"\n", 1)
    if header != b"P5":
        raise ValidationError("not a binary PGM")
    dims, rest = rest.split(b"\n", 1)
    nx, ny = (int(t) for t in dims.split())
    maxval, raw = rest.split(b"\n", 1)
    if int(maxval) != 255:
        raise ValidationError("only 8-bit PGM supported")
    return np.frombuffer(raw, dtype=np.uint8).reshape(ny, nx)[::-1]


def _entropy_bits(table, axis=None):
    """Entropy in bits of probability tables, summed over ``axis``."""
    t = np.clip(table, 0.0, None)
    h = -xlogy(t, t).sum(axis=axis) / _LN2
    return np.maximum(h, 0.0)


def _argmax_tol(values):
    values = np.asarray(values, dtype=float).ravel()
    return int(np.flatnonzero(values >= values.max() - TIE_ATOL)[0])


@dataclass(frozen=True, eq=False)
class PredictionTable:
    """Weighted hypotheses and the outcome bin each predicts per location."""

    weights: np.ndarray  # (n_hypotheses,)
    bins: np.ndarray  # (n_hypotheses, n_locations) int
    n_bins: int

    def marginal(self, j):
        return np.bincount(self.bins[:, j], weights=self.weights, minlength=self.n_bins)

    def joint(self, i, j):
        b = self.n_bins
        flat = np.bincount(self.bins[:, i] * b + self.bins[:, j], weights=self.weights, minlength=b * b)
        return flat.reshape(b, b)

    def marginals(self):
        """All single-location outcome distributions, shape (n_locations, n_bins)."""
        b = self.n_bins
        out = np.empty((self.bins.shape[1], b))
        for k in range(b):
            out[:, k] = self.weights @ (self.bins == k)
        return out


def _hypotheses(posterior, mode):
    """Weighted state indices for the requested prediction mode."""
    if mode.kind == "exact":
        support = posterior.support
        return support, posterior.mass[support]
    draws = draw_samples(posterior, mode.n_samples, seed=mode.seed)
    states, counts = np.unique(draws, return_counts=True)
    return states, counts / float(mode.n_samples)


def prediction_table(posterior, locations, sensor, mode=EXACT):
    """Build the :class:`PredictionTable` for ``locations``."""
    locs = check_locations(locations)
    idx, w = _hypotheses(posterior, mode)
    pred = predict_matrix(posterior.grid.states[idx], locs, sensor)
    return PredictionTable(w, sensor.to_bins(pred), sensor.n_bins)


def _pair_table(posterior, m1, m2, sensor, mode):
    return prediction_table(posterior, [[m1.x, m1.y], [m2.x, m2.y]], sensor, mode)


def outcome_distribution(posterior, location, sensor, mode=EXACT):
    """Predicted distribution over outcome bins at one location.

    For the ideal sensor the bins are ``(black, white)``.
    """
    return prediction_table(posterior, [[location.x, location.y]], sensor, mode).marginal(0)


def joint_outcome_distribution(posterior, m1, m2, sensor, mode=EXACT):
    """Joint predicted outcomes at two locations, indexed ``[bin at m1, bin at m2]``.

    For the ideal sensor, ``table[1, 1]``, ``[1, 0]``, ``[0, 1]`` and
    ``[0, 0]`` are the white/white, white/black, black/white and
    black/black probabilities.
    """
    return _pair_table(posterior, m1, m2, sensor, mode).joint(0, 1)


def entropy_at(posterior, location, sensor, mode=EXACT):
    return float(_entropy_bits(outcome_distribution(posterior, location, sensor, mode)))


def joint_entropy_at(posterior, m1, m2, sensor, mode=EXACT):
    return float(_entropy_bits(joint_outcome_distribution(posterior, m1, m2, sensor, mode)))


def mutual_information_at(posterior, m1, m2, sensor, mode=EXACT):
    """Shared information between the two readings, ``H1 + H2 - H12`` clamped at 0."""
    t = _pair_table(posterior, m1, m2, sensor, mode)
    h1 = _entropy_bits(t.marginal(0))
    h2 = _entropy_bits(t.marginal(1))
    h12 = _entropy_bits(t.joint(0, 1))
    return float(max(h1 + h2 - h12, 0.0))


def entropy_map(posterior, sensor, map_grid, mode=EXACT):
    table = prediction_table(posterior, map_grid.points, sensor, mode)
    return EntropyMap(map_grid, _entropy_bits(table.marginals(), axis=1))


def _joint_row(table, i):
    """Joint entropy of location ``i`` with every location, shape (n_locations,)."""
    b = table.n_bins
    n_loc = table.bins.shape[1]
    out = np.empty(n_loc)
    key_i = table.bins[:, i] * b
    for j in range(n_loc):
        out[j] = _entropy_bits(np.bincount(key_i + table.bins[:, j], weights=table.weights, minlength=b * b))
    return out


def joint_entropy_map(posterior, sensor, e1, map_grid, mode=EXACT):
    """Joint entropy of the pair ``(e1, m)`` for every ``m`` on the map grid."""
    pts = np.vstack([[e1.x, e1.y], map_grid.points])
    table = prediction_table(posterior, pts, sensor, mode)
    return EntropyMap(map_grid, _joint_row(table, 0)[1:])


def mutual_information_map(posterior, sensor, e1, map_grid, mode=EXACT):
    pts = np.vstack([[e1.x, e1.y], map_grid.points])
    table = prediction_table(posterior, pts, sensor, mode)
    h = _entropy_bits(table.marginals(), axis=1)
    joint = _joint_row(table, 0)
    mi = np.maximum(h[0] + h[1:] - joint[1:], 0.0)
    return EntropyMap(map_grid, mi)


def _binary_pair_matrix(table, chunk):
    """All-pairs joint entropy for two-bin outcomes via one Gram product."""
    white = (table.bins == 1).astype(float)
    p = table.weights @ white
    weighted = white * table.weights[:, None]
    n_loc = white.shape[1]
    out = np.empty((n_loc, n_loc))
    for start in range(0, n_loc, chunk):
        stop = min(start + chunk, n_loc)
        a = white[:, start:stop].T @ weighted  # Pr(white, white)
        pi = p[start:stop, None]
        cells = np.stack([a, pi - a, p[None, :] - a, 1.0 - pi - p[None, :] + a])
        out[start:stop] = _entropy_bits(cells, axis=0)
    return out


def _general_pair_matrix(table, chunk):
    b = table.n_bins
    n_hyp, n_loc = table.bins.shape
    onehot = np.zeros((n_hyp, n_loc * b))
    onehot[np.arange(n_hyp)[:, None], np.arange(n_loc)[None, :] * b + table.bins] = 1.0
    weighted = onehot * table.weights[:, None]
    out = np.empty((n_loc, n_loc))
    for start in range(0, n_loc, chunk):
        stop = min(start + chunk, n_loc)
        gram = onehot[:, start * b : stop * b].T @ weighted
        gram = gram.reshape(stop - start, b, n_loc, b)
        out[start:stop] = _entropy_bits(gram, axis=(1, 3))
    return out


def pair_joint_entropy_matrix(posterior, sensor, map_grid, mode=EXACT, table=None):
    """Joint entropy for every ordered pair of map locations, shape (M, M)."""
    if table is None:
        table = prediction_table(posterior, map_grid.points, sensor, mode)
    if table.n_bins == 2:
        return _binary_pair_matrix(table, chunk=256)
    return _general_pair_matrix(table, chunk=max(1, 4096 // table.n_bins))


def select_independent(posterior, sensor, map_grid, mode=EXACT):
    """Baseline: each agent takes a peak of its own entropy map.

    Agent 1 takes the lowest-index peak; agent 2 the second-lowest tied
    peak, or the same location when the peak is unique.
    """
    values = entropy_map(posterior, sensor, map_grid, mode).flat()
    tied = np.flatnonzero(values >= values.max() - TIE_ATOL)
    second = tied[1] if tied.size > 1 else tied[0]
    return map_grid.location(tied[0]), map_grid.location(second)


def select_sequential_greedy(posterior, sensor, map_grid, mode=EXACT):
    """E1 at the entropy-map peak, then E2 maximising joint entropy with E1 fixed."""
    table = prediction_table(posterior, map_grid.points, sensor, mode)
    i = _argmax_tol(_entropy_bits(table.marginals(), axis=1))
    j = _argmax_tol(_joint_row(table, i))
    return map_grid.location(i), map_grid.location(j)


def select_joint_exhaustive(posterior, sensor, map_grid, mode=EXACT):
    """Brute-force argmax of joint entropy over all ordered location pairs."""
    mat = pair_joint_entropy_matrix(posterior, sensor, map_grid, mode)
    i, j = divmod(_argmax_tol(mat), map_grid.size)
    return map_grid.location(i), map_grid.location(j)


# Moore neighbourhood of one location: 8 moves for E1 and 8 for E2
_MOVES = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]


def hill_climb_pair_search(posterior, sensor, map_grid, mode=EXACT, restarts=20, seed=0):
    """Multi-start steepest ascent over location pairs.

    Each restart begins at a uniformly random pair and repeatedly moves to
    the best strictly improving neighbour, where a neighbour shifts one of
    the two locations by one grid step in any of the 8 lattice directions.
    The best pair over all restarts is returned (ties: first found).
    """
    restarts = int(restarts)
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    table = prediction_table(posterior, map_grid.points, sensor, mode)
    nx = map_grid.xs.size
    ny = map_grid.ys.size
    b = table.n_bins
    cache = {}

    def score(pair):
        h = cache.get(pair)
        if h is None:
            (x1, y1), (x2, y2) = pair
            i, j = y1 * nx + x1, y2 * nx + x2
            key = table.bins[:, i] * b + table.bins[:, j]
            h = float(_entropy_bits(np.bincount(key, weights=table.weights, minlength=b * b)))
            cache[pair] = h
        return h

    def neighbours(pair):
        (x1, y1), (x2, y2) = pair
        for dx, dy in _MOVES:
            a, c = x1 + dx, y1 + dy
            if 0 <= a < nx and 0 <= c < ny:
                yield ((a, c), (x2, y2))
        for dx, dy in _MOVES:
            a, c = x2 + dx, y2 + dy
            if 0 <= a < nx and 0 <= c < ny:
                yield ((x1, y1), (a, c))

    best, best_h = None, -np.inf
    for _ in range(restarts):
        x1, x2 = rng.integers(nx, size=2)
        y1, y2 = rng.integers(ny, size=2)
        cur = ((int(x1), int(y1)), (int(x2), int(y2)))
        cur_h = score(cur)
        while True:
            nxt, nxt_h = None, cur_h
            for cand in neighbours(cur):
                h = score(cand)
                if h > nxt_h + TIE_ATOL:
                    nxt, nxt_h = cand, h
            if nxt is None:
                break
            cur, cur_h = nxt, nxt_h
        if cur_h > best_h + TIE_ATOL:
            best, best_h = cur, cur_h
    (x1, y1), (x2, y2) = best
    return map_grid.location(y1 * nx + x1), map_grid.location(y2 * nx + x2)


POLICIES = ("independent", "sequential-greedy", "joint-exhaustive", "joint-search")


class JointEntropySelector(TransformerMixin, BaseEstimator):
    """Choose a measurement pair for two agents from candidate locations.

    ``fit`` evaluates the candidate lattice against a posterior and stores
    the selected pair; ``transform`` maps arbitrary locations to their
    entropy, joint entropy with the selected E1, and mutual information
    with it.

    Parameters
    ----------
    sensor : SensorModel
    policy : {"independent", "sequential-greedy", "joint-exhaustive", "joint-search"}
    mode : PredictionMode, default=None
        ``None`` means exact mode.
    restarts : int, default=20
        Only used by ``"joint-search"``.
    random_state : int, default=0
        Seed for the restarts of ``"joint-search"``.
    """

    def __init__(self, sensor, policy="joint-exhaustive", mode=None, restarts=20, random_state=0):
        self.sensor = sensor
        self.policy = policy
        self.mode = mode
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None, *, posterior):
        """Select a pair.

        ``X`` is either a :class:`MapGrid` or an (n, 2) array that lays out
        a full rectangular lattice.
        """
        if self.policy not in POLICIES:
            raise ValidationError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        grid = X if isinstance(X, MapGrid) else _lattice_from_points(check_locations(X))
        mode = self.mode or EXACT
        if self.policy == "independent":
            pair = select_independent(posterior, self.sensor, grid, mode)
        elif self.policy == "sequential-greedy":
            pair = select_sequential_greedy(posterior, self.sensor, grid, mode)
        elif self.policy == "joint-exhaustive":
            pair = select_joint_exhaustive(posterior, self.sensor, grid, mode)
        else:
            pair = hill_climb_pair_search(posterior, self.sensor, grid, mode, self.restarts, self.random_state)
        self.map_grid_ = grid
        self.posterior_ = posterior
        self.pair_ = pair
        self.joint_entropy_ = joint_entropy_at(posterior, pair[0], pair[1], self.sensor, mode)
        self.mutual_information_ = mutual_information_at(posterior, pair[0], pair[1], self.sensor, mode)
        return self

    def transform(self, X):
        """Columns ``(H(m), H(E1, m), MI(E1, m))`` for each row location ``m``."""
        check_is_fitted(self, "pair_")
        X = check_locations(X)
        e1 = self.pair_[0]
        pts = np.vstack([[e1.x, e1.y], X])
        table = prediction_table(self.posterior_, pts, self.sensor, self.mode or EXACT)
        h = _entropy_bits(table.marginals(), axis=1)
        joint = _joint_row(table, 0)
        mi = np.maximum(h[0] + h[1:] - joint[1:], 0.0)
        return np.column_stack([h[1:], joint[1:], mi])


def _lattice_from_points(points):
    xs = np.unique(points[:, 0])
    ys = np.unique(points[:, 1])
    grid = MapGrid(xs, ys)
    if grid.size != len(points) or set(map(tuple, grid.points)) != set(map(tuple, points)):
        raise ValidationError("candidate locations must form a full rectangular lattice")
    return grid


def with_seed(mode, seed):
    """Copy of ``mode`` with a new sampling seed (no-op for exact mode)."""
    return mode if mode.kind == "exact" else replace(mode, seed=int(seed))
