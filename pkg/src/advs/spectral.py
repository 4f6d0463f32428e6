"""Bath spectral functions, coupling topologies, and correlation kernels.

The stationary environment enters the lowest-order failure probability only
through the Fourier decomposition of its correlation function,

    <A(t1) A(t2)> = int domega exp(-i omega (t1 - t2)) f(omega),

so a bath model here is just a nonnegative spectral weight f(omega) plus
per-channel-pair multipliers.  Sign convention: omega > 0 moves energy from
the system into the bath, omega < 0 excites the system, which is why only
the negative side can satisfy the resonance condition omega + dE(t) = 0.

``PowerLaw`` carries an optional detailed-balance factor B(x) = x/(e^x - 1)
with x = |omega| / temperature.  B -> 1 deep in the thermal window
(|omega| << temperature), so the quoted infrared exponent of each preset is
the exponent of f itself there, and at zero temperature the weight gains
one extra power of omega.  Presets default to temperature = inf (pure power
law across the band), the idealization in which every mode of interest sits
in the thermal window.

Dimensional presets, for qubits riding magnetic-field fluctuations:

    photon_thermal(D)  ->  f ~ |omega|^(D-1)
    phonon_thermal(D)  ->  f ~ |omega|^(D-3)

with D the spatial dimension; the zero-temperature variants add +1 to the
exponent, and ``ohmic`` is the f ~ |omega| threshold case.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InfraredDivergenceError
from .grover import GroverInstance

__all__ = [
    "SpectralModel",
    "MarkovianDelta",
    "PowerLaw",
    "TabulatedGrid",
    "preset",
    "f_eval",
    "CouplingConfig",
    "effective_weight",
    "total_channel_weight",
    "CorrelationKernel",
    "correlation_kernel",
]

CHANNEL_PAIRS = ("xx", "xz", "zx", "zz")

_DEFAULT_CHANNEL_WEIGHTS = {"xx": 1.0, "xz": 1.0, "zx": 1.0, "zz": 1.0}


class SpectralModel:
    """Base class: a spectral weight f(omega) >= 0 with finite support.

    ``channel_weights`` scales f per channel pair, f^{mu nu} = w_{mu nu} f;
    which pairs actually enter an engine is chosen by the CouplingConfig.
    """

    is_delta = False

    def __init__(self, channel_weights: dict | None = None):
        self.channel_weights = dict(_DEFAULT_CHANNEL_WEIGHTS)
        if channel_weights:
            unknown = set(channel_weights) - set(CHANNEL_PAIRS)
            if unknown:
                raise ValueError(f"unknown channel pairs {sorted(unknown)}")
            self.channel_weights.update(channel_weights)

    def f(self, omega):
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        """Interval outside which f vanishes identically."""
        raise NotImplementedError

    def check_infrared(self) -> None:
        """Raise if int f(omega) domega diverges at omega -> 0."""

    def to_dict(self) -> dict:
        raise NotImplementedError


class MarkovianDelta(SpectralModel):
    """Delta-correlated bath: <A(t1)A(t2)> = strength * delta(t1 - t2).

    Equivalent to a flat spectrum f = strength / (2 pi); pointwise
    evaluation is permitted but warns, since the model has no meaningful
    omega dependence.
    """

    is_delta = True

    def __init__(self, strength: float, channel_weights: dict | None = None):
        super().__init__(channel_weights)
        if strength < 0:
            raise ValueError("delta strength must be >= 0")
        self.strength = float(strength)

    @property
    def flat(self) -> bool:
        return True

    def f(self, omega):
        warnings.warn("pointwise f of a delta-correlated bath is the flat value "
                      "strength/(2 pi)", stacklevel=2)
        omega = np.asarray(omega, dtype=float)
        out = np.full_like(omega, self.strength / (2.0 * math.pi))
        return out if out.ndim else float(out)

    def support(self):
        return (-math.inf, math.inf)

    def to_dict(self):
        return {"kind": "markovian-delta", "strength": self.strength,
                "channel_weights": self.channel_weights}


def _bose_factor(x):
    """x * nbar(x) = x / (e^x - 1), the occupation-number weight normalized
    to 1 in the thermal window x << 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.ones_like(x)
    pos = x > 1e-12
    out[pos] = x[pos] / np.expm1(x[pos])
    return out


class PowerLaw(SpectralModel):
    """f(omega) = C |omega|^p * B(|omega|/T) on ir <= |omega| <= uv, else 0."""

    def __init__(self, exponent: float, prefactor: float = 1.0,
                 ir_cutoff: float = 0.0, uv_cutoff: float = 1.0,
                 temperature: float = math.inf,
                 channel_weights: dict | None = None):
        super().__init__(channel_weights)
        if prefactor < 0:
            raise ValueError("prefactor must be >= 0")
        if not 0.0 <= ir_cutoff < uv_cutoff:
            raise ValueError("need 0 <= ir_cutoff < uv_cutoff")
        if temperature <= 0:
            raise ValueError("temperature must be positive (use inf for the "
                             "thermal-window idealization)")
        self.exponent = float(exponent)
        self.prefactor = float(prefactor)
        self.ir_cutoff = float(ir_cutoff)
        self.uv_cutoff = float(uv_cutoff)
        self.temperature = float(temperature)

    def f(self, omega):
        scalar = np.ndim(omega) == 0
        a = np.abs(np.atleast_1d(np.asarray(omega, dtype=float)))
        inside = (a >= self.ir_cutoff) & (a <= self.uv_cutoff)
        with np.errstate(divide="ignore"):
            mag = np.where(inside, self.prefactor * a ** self.exponent, 0.0)
        if math.isfinite(self.temperature):
            mag = np.where(inside, mag * _bose_factor(a / self.temperature), mag)
        return float(mag[0]) if scalar else mag

    def support(self):
        return (-self.uv_cutoff, self.uv_cutoff)

    def pieces(self):
        if self.ir_cutoff > 0.0:
            return [(-self.uv_cutoff, -self.ir_cutoff), (self.ir_cutoff, self.uv_cutoff)]
        return [(-self.uv_cutoff, self.uv_cutoff)]

    def check_infrared(self):
        if self.exponent <= -1.0 and self.ir_cutoff == 0.0:
            raise InfraredDivergenceError(
                f"power law with exponent {self.exponent} and no infrared cutoff "
                "has a divergent spectral weight at omega -> 0; restrict the "
                "reservoir (set ir_cutoff > 0)")

    def to_dict(self):
        return {"kind": "power-law", "exponent": self.exponent,
                "prefactor": self.prefactor, "ir_cutoff": self.ir_cutoff,
                "uv_cutoff": self.uv_cutoff,
                "temperature": (None if math.isinf(self.temperature)
                                else self.temperature),
                "channel_weights": self.channel_weights}


class TabulatedGrid(SpectralModel):
    """f given on an omega grid, linear interpolation inside, zero outside.

    A two-point table {(lo, h), (hi, h)} is a sharp box on [lo, hi]; see
    ``TabulatedGrid.box``.
    """

    def __init__(self, omegas, values, channel_weights: dict | None = None):
        super().__init__(channel_weights)
        omegas = np.asarray(omegas, dtype=float)
        values = np.asarray(values, dtype=float)
        if omegas.ndim != 1 or omegas.shape != values.shape or len(omegas) < 2:
            raise ValueError("need matching 1-d omega and value arrays, >= 2 points")
        if np.any(np.diff(omegas) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("spectral values must be >= 0")
        self.omegas = omegas
        self.values = values

    @classmethod
    def box(cls, lo: float, hi: float, height: float,
            channel_weights: dict | None = None) -> "TabulatedGrid":
        if hi <= lo:
            raise ValueError("need lo < hi")
        return cls([lo, hi], [height, height], channel_weights)

    @classmethod
    def from_csv(cls, path) -> "TabulatedGrid":
        data = np.loadtxt(path, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] != 2:
            raise ValueError("expected a two-column CSV of (omega, f)")
        return cls(data[:, 0], data[:, 1])

    def f(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.interp(omega, self.omegas, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def support(self):
        return (float(self.omegas[0]), float(self.omegas[-1]))

    def pieces(self):
        return [self.support()]

    def to_dict(self):
        return {"kind": "tabulated", "omegas": self.omegas.tolist(),
                "values": self.values.tolist(),
                "channel_weights": self.channel_weights}


def f_eval(model: SpectralModel, omega):
    """Spectral weight of the model at omega; zero outside cutoffs."""
    return model.f(omega)


def preset(name: str, dimension: int | None = None, *, prefactor: float = 1.0,
           uv_cutoff: float = 1.0, ir_cutoff: float = 0.0,
           temperature: float = math.inf, strength: float = 1.0) -> SpectralModel:
    """Named bath models.

    photon baths couple through field-momentum fluctuations, phonon baths
    through the field amplitude; the thermal variants quote the exponent in
    the thermal window, the zero-temperature ones gain a power of omega.
    """
    key = name.strip().lower().replace("-", "_")
    if key == "markovian":
        return MarkovianDelta(strength)
    if key == "ohmic":
        return PowerLaw(1.0, prefactor, ir_cutoff, uv_cutoff, temperature)
    table = {
        "photon_thermal": lambda d: d - 1,
        "phonon_thermal": lambda d: d - 3,
        "photon_zero_temperature": lambda d: d,
        "phonon_zero_temperature": lambda d: d - 2,
    }
    if key not in table:
        raise ValueError(f"unknown preset {name!r}")
    if dimension not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    p = table[key](dimension)
    return PowerLaw(float(p), prefactor, ir_cutoff, uv_cutoff, temperature)


# -- coupling configuration ---------------------------------------------------

COMMON_BATH = "common"
INDEPENDENT_BATHS = "independent"


@dataclass(frozen=True)
class CouplingConfig:
    """System-bath coupling strength and topology.

    ``lam`` is the dimensionless coupling; engines are second order in it
    and warn above 0.1 where the perturbative premise gets shaky.
    ``channels`` lists the channel pairs an engine should sum; by default
    only "xx", the conservative choice since the cross and zz terms cancel
    for balanced marked states on a common bath.
    """

    lam: float
    instance: GroverInstance
    topology: str = INDEPENDENT_BATHS
    channels: tuple[str, ...] = ("xx",)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("coupling lam must be >= 0")
        if self.lam > 0.1:
            warnings.warn(f"lam = {self.lam} is large for a second-order "
                          "treatment (lam^2 << 1 assumed)", stacklevel=2)
        if self.topology not in (COMMON_BATH, INDEPENDENT_BATHS):
            raise ValueError(f"unknown topology {self.topology!r}")
        bad = set(self.channels) - set(CHANNEL_PAIRS)
        if bad:
            raise ValueError(f"unknown channel pairs {sorted(bad)}")


def _channel_signs(instance: GroverInstance, mu: str) -> np.ndarray:
    bits = np.array(instance.marked_bits, dtype=float)
    if mu == "x":
        return -np.ones(instance.n_qubits)
    if mu == "z":
        return (-1.0) ** (bits + 1.0)
    raise ValueError(f"channel must be 'x' or 'z', got {mu!r}")


def effective_weight(config: CouplingConfig, model: SpectralModel | None = None) -> dict:
    """Qubit-sum multiplier for each channel pair.

    Common bath: every qubit sees the same operators, so amplitudes add
    before squaring, weight = |sum_a c_a^mu| * |sum_b c_b^nu|; the x-z cross
    terms vanish when the marked state has as many ones as zeros.
    Independent baths: only diagonal qubit pairs correlate, weight =
    sum_a c_a^mu c_a^nu.
    """
    out = {}
    for pair in CHANNEL_PAIRS:
        cu = _channel_signs(config.instance, pair[0])
        cv = _channel_signs(config.instance, pair[1])
        if config.topology == COMMON_BATH:
            w = abs(cu.sum()) * abs(cv.sum())
        else:
            w = float(np.dot(cu, cv))
        out[pair] = float(w)
    return out


def total_channel_weight(config: CouplingConfig, model: SpectralModel) -> float:
    """Sum of topology weight x model channel weight over the configured pairs."""
    topo = effective_weight(config, model)
    return float(sum(topo[p] * model.channel_weights.get(p, 0.0)
                     for p in config.channels))


# -- correlation kernels ------------------------------------------------------

_KERNEL_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n: int):
    if n not in _KERNEL_GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _KERNEL_GL_CACHE[n] = (x, w)
    return _KERNEL_GL_CACHE[n]


@dataclass
class CorrelationKernel:
    """Time-domain correlation C(tau) = int f(omega) exp(-i omega tau) domega.

    Carries both a tabulated grid on [-tau_max, tau_max] (for inspection and
    contract checks) and an on-demand evaluator used by the integration
    engines.  For a delta-correlated bath the kernel is symbolic:
    ``is_delta`` is set and the strength is stored, never a gridded spike.
    """

    taus: np.ndarray | None
    values: np.ndarray | None
    spacing: float
    quad_error: float
    is_delta: bool = False
    delta_strength: float = 0.0
    _eval: object = field(default=None, repr=False)

    def evaluate(self, tau):
        if self.is_delta:
            raise ValueError("delta kernel has no pointwise values; use "
                             "delta_strength with a diagonal line integral")
        return self._eval(np.asarray(tau, dtype=float))

    @property
    def c0(self) -> complex:
        if self.is_delta:
            raise ValueError("delta kernel has no finite C(0)")
        return complex(self._eval(np.zeros(1))[0])

    @classmethod
    def from_function(cls, func, tau_max: float, spacing: float) -> "CorrelationKernel":
        """Wrap a closed-form C(tau), e.g. the sinc transform of a box
        spectrum, as an independent kernel for cross-checks."""
        taus = np.arange(-tau_max, tau_max + 0.5 * spacing, spacing)
        vals = np.asarray(func(taus), dtype=complex)
        k = cls(taus=taus, values=vals, spacing=spacing, quad_error=0.0)
        k._eval = lambda tau: np.asarray(func(tau), dtype=complex)
        return k


def _piece_nodes(lo: float, hi: float, tau_max: float) -> int:
    """Gauss order resolving exp(-i omega tau) over the piece for all
    |tau| <= tau_max: about one node per two radians of total phase."""
    span_phase = (hi - lo) * tau_max
    return int(min(2000, max(48, 0.6 * span_phase + 24)))


def _make_evaluator(model, tau_max: float, refine: float = 1.0):
    pieces = model.pieces()
    grids = []
    for lo, hi in pieces:
        n = max(12, int(refine * _piece_nodes(lo, hi, tau_max)))
        x, w = _gl(n)
        om = lo + (hi - lo) * 0.5 * (x + 1.0)
        wt = 0.5 * (hi - lo) * w * model.f(om)
        grids.append((om, wt))
    om_all = np.concatenate([g[0] for g in grids])
    wt_all = np.concatenate([g[1] for g in grids])

    def evaluate(tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty(len(tau), dtype=complex)
        block = max(1, int(4e6 // max(len(om_all), 1)))
        for i in range(0, len(tau), block):
            tt = tau[i:i + block]
            out[i:i + block] = np.exp(-1j * np.outer(tt, om_all)) @ wt_all
        return out

    return evaluate


def correlation_kernel(model: SpectralModel, tau_max: float,
                       grid_spacing: float | None = None) -> CorrelationKernel:
    """Tabulate C(tau) on [-tau_max, tau_max] by Gauss quadrature over the
    spectral support, with node counts scaled to resolve the oscillation at
    the largest tau.

    Raises InfraredDivergenceError when the spectral weight itself is
    non-integrable at omega -> 0 (power-law exponent <= -1 with no infrared
    cutoff), the regime in which only a finite reservoir volume keeps the
    correlation function defined.
    """
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    if model.is_delta:
        return CorrelationKernel(taus=None, values=None, spacing=0.0,
                                 quad_error=0.0, is_delta=True,
                                 delta_strength=model.strength)
    model.check_infrared()
    lo, hi = model.support()
    if grid_spacing is None:
        scale = max(abs(lo), abs(hi), 1e-12)
        grid_spacing = min(0.25 / scale, tau_max / 64.0)
    evaluate = _make_evaluator(model, tau_max)
    taus = np.arange(-tau_max, tau_max + 0.5 * grid_spacing, grid_spacing)
    values = evaluate(taus)

    # error estimate against a rule with 60% of the nodes, at the worst tau
    coarse_eval = _make_evaluator(model, tau_max, refine=0.6)
    probe = np.array([tau_max, 0.5 * tau_max, 0.0])
    quad_error = float(np.max(np.abs(coarse_eval(probe) - evaluate(probe))))

    kernel = CorrelationKernel(taus=taus, values=values, spacing=grid_spacing,
                               quad_error=quad_error)
    kernel._eval = evaluate
    return kernel
