"""Seeded heavy-tailed noise generators.

Every sampler draws from a Philox counter-based generator keyed through
``numpy.random.SeedSequence``, so a (family, parameters, seed, shape) tuple
pins the output bit-for-bit regardless of platform or call order.  Matrices
are produced as one vectorized row-major stream per call.

Families
--------
cauchy
    Standard Cauchy, density 1/(pi (1 + z^2)), via the inverse CDF
    ``tan(pi (u - 1/2))`` with u in the open interval (0, 1).
stable
    Symmetric alpha-stable S(alpha, beta=0, scale=1, shift=0) via the
    Chambers-Mallows-Stuck transform.  alpha = 1 reduces to Cauchy and
    alpha = 2 to N(0, 2).
signed_power_cauchy
    sign(C) |C|^q for a standard Cauchy C and q in (0, 1]; q = 1 reproduces
    the Cauchy stream of the same seed bit-for-bit.
bounded_moment
    Symmetric mixture with unit first absolute moment and a Pareto tail:
    |X| is uniform(0, u0) with probability 1 - w and Pareto(1, a) with
    probability w, where a = p + MOMENT_MARGIN, w = TAIL_WEIGHT and u0 is
    solved so that E|X| = 1 exactly.  E|X|^m is finite for every m < a, so
    the p-th absolute moment is bounded while the tail stays heavy.
"""

import warnings

import numpy as np

from .matrices import as_matrix

# bounded_moment family constants: survival exponent a = p + MOMENT_MARGIN
# (tail density ~ t^-(p + 1 + MOMENT_MARGIN)), Pareto branch weight w.
MOMENT_MARGIN = 0.25
TAIL_WEIGHT = 0.06


def _check_seed(seed):
    s = int(seed)
    if s < 0 or s >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return s


def generator(seed):
    """Philox generator for ``seed``; the package's single source of randomness."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))


def derive_seed(master, *path):
    """Derive a child seed from ``master`` and an integer index path.

    Children of distinct paths are statistically independent and stable
    across runs, which lets experiment cells pre-draw their seeds before
    any work is scheduled.
    """
    entropy = [_check_seed(master)] + [int(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _open_uniform(gen, shape):
    # u in the open interval (0, 1): redraw exact zeros so tan() and log()
    # below never see a singular point.
    u = gen.random(shape)
    while True:
        zero = u == 0.0
        if not zero.any():
            return u
        u[zero] = gen.random(int(zero.sum()))


def sample_cauchy_matrix(rows, cols, seed):
    """rows x cols matrix of i.i.d. standard Cauchy entries."""
    _check_shape(rows, cols)
    u = _open_uniform(generator(seed), (rows, cols))
    return np.tan(np.pi * (u - 0.5))


def sample_signed_power_cauchy_matrix(rows, cols, q, seed):
    """sign(C) |C|^q entrywise for a standard Cauchy matrix C, q in (0, 1]."""
    _check_shape(rows, cols)
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    c = sample_cauchy_matrix(rows, cols, seed)
    return np.sign(c) * np.abs(c) ** q


def sample_stable_matrix(rows, cols, alpha, seed):
    """Symmetric alpha-stable matrix, alpha in (0, 2], unit scale.

    Chambers-Mallows-Stuck: with U uniform on (-pi/2, pi/2) and W standard
    exponential,

        X = sin(alpha U) / cos(U)^(1/alpha)
            * (cos((1 - alpha) U) / W)^((1 - alpha)/alpha).

    The exponent vanishes at alpha = 1, collapsing to tan(U).
    """
    _check_shape(rows, cols)
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    gen = generator(seed)
    u1 = _open_uniform(gen, (rows, cols))
    u2 = _open_uniform(gen, (rows, cols))
    theta = np.pi * (u1 - 0.5)
    w = -np.log(u2)
    if alpha == 1.0:
        return np.tan(theta)
    x = np.sin(alpha * theta) / np.cos(theta) ** (1.0 / alpha)
    x *= (np.cos((1.0 - alpha) * theta) / w) ** ((1.0 - alpha) / alpha)
    return x


def bounded_moment_params(p):
    """(a, w, u0) for the bounded_moment family at moment parameter p."""
    if not 1.0 < p < 2.0:
        raise ValueError(f"p must lie in (1, 2), got {p}")
    a = p + MOMENT_MARGIN
    w = TAIL_WEIGHT
    tail_mean = a / (a - 1.0)
    u0 = 2.0 * (1.0 - w * tail_mean) / (1.0 - w)
    return a, w, u0


def bounded_moment_abs_moment(p, m):
    """Analytic E|X|^m for the bounded_moment family; requires m < p + margin."""
    a, w, u0 = bounded_moment_params(p)
    if m >= a:
        raise ValueError(f"moment {m} diverges: tail index is {a}")
    return (1.0 - w) * u0**m / (m + 1.0) + w * a / (a - m)


def sample_bounded_moment_matrix(rows, cols, p, seed):
    """Symmetric heavy-tailed matrix with E|X| = 1 and E|X|^p bounded."""
    _check_shape(rows, cols)
    a, w, u0 = bounded_moment_params(p)
    gen = generator(seed)
    u = _open_uniform(gen, (3, rows, cols))
    magnitude = np.where(u[0] < w, u[1] ** (-1.0 / a), u0 * u[1])
    return np.where(u[2] < 0.5, -magnitude, magnitude)


def scale_noise_to_signal(noise, signal):
    """Scale ``noise`` by ``||signal||_1 / (20 rows cols)``.

    The divisor keeps the average noise magnitude a factor 20 below the
    average signal magnitude.  A zero signal yields the zero matrix and a
    warning, since every experiment downstream would divide by zero mass.
    """
    nz = as_matrix(noise, "noise")
    sg = as_matrix(signal, "signal")
    if nz.shape != sg.shape:
        raise ValueError(f"noise shape {nz.shape} != signal shape {sg.shape}")
    mass = float(np.abs(sg).sum())
    if mass == 0.0:
        warnings.warn("zero signal: scaled noise is identically zero", stacklevel=2)
        return np.zeros_like(nz)
    rows, cols = nz.shape
    return nz * (mass / (20.0 * rows * cols))


def _check_shape(rows, cols):
    if int(rows) < 1 or int(cols) < 1:
        raise ValueError(f"matrix shape must be positive, got {rows} x {cols}")


_FAMILIES = ("cauchy", "stable", "signed_power_cauchy", "bounded_moment")


class NoiseSpec:
    """Declarative description of a noise matrix draw.

    Parameters
    ----------
    family : str
        One of ``cauchy``, ``stable``, ``signed_power_cauchy``,
        ``bounded_moment``.
    alpha, q, p : float
        Family parameter; only the one matching ``family`` is read.
    scale : float
        Fixed multiplier, >= 0.  Zero marks a deliberate noiseless run.
    signal_relative : bool
        When true, additionally multiply by ``||signal||_1 / (20 rows cols)``.
    seed : int
        Default seed used when the caller does not supply one.
    """

    __slots__ = ("family", "alpha", "q", "p", "scale", "signal_relative", "seed")

    def __init__(self, family, alpha=1.1, q=1.0 / 1.1, p=1.5, scale=1.0,
                 signal_relative=True, seed=0):
        if family not in _FAMILIES:
            raise ValueError(f"unknown noise family {family!r}, expected one of {_FAMILIES}")
        if not 0.0 < alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
        if not 0.0 < q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {q}")
        if not 1.0 < p < 2.0:
            raise ValueError(f"p must lie in (1, 2), got {p}")
        if scale < 0.0:
            raise ValueError(f"scale must be >= 0, got {scale}")
        self.family = family
        self.alpha = float(alpha)
        self.q = float(q)
        self.p = float(p)
        self.scale = float(scale)
        self.signal_relative = bool(signal_relative)
        self.seed = _check_seed(seed)

    def asdict(self):
        return {
            "family": self.family, "alpha": self.alpha, "q": self.q, "p": self.p,
            "scale": self.scale, "signal_relative": self.signal_relative,
            "seed": self.seed,
        }

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.asdict().items())
        return f"NoiseSpec({args})"

    def __eq__(self, other):
        return isinstance(other, NoiseSpec) and self.asdict() == other.asdict()


def sample_noise(spec, rows, cols, signal=None, seed=None):
    """Draw the noise matrix described by ``spec``.

    ``signal`` is required when ``spec.signal_relative`` is set.  ``seed``
    overrides ``spec.seed`` (used by experiment drivers that derive one seed
    per repeat).
    """
    use_seed = spec.seed if seed is None else _check_seed(seed)
    if spec.scale == 0.0:
        _check_shape(rows, cols)
        return np.zeros((rows, cols))
    if spec.family == "cauchy":
        out = sample_cauchy_matrix(rows, cols, use_seed)
    elif spec.family == "stable":
        out = sample_stable_matrix(rows, cols, spec.alpha, use_seed)
    elif spec.family == "signed_power_cauchy":
        out = sample_signed_power_cauchy_matrix(rows, cols, spec.q, use_seed)
    else:
        out = sample_bounded_moment_matrix(rows, cols, spec.p, use_seed)
    if spec.signal_relative:
        if signal is None:
            raise ValueError("spec.signal_relative requires a signal matrix")
        out = scale_noise_to_signal(out, signal)
    if spec.scale != 1.0:
        out = out * spec.scale
    return out
