"""Levy characteristic and lattice white-noise sampling.

The noise law is determined by the characteristic exponent

    psi(t) = i*b*t - (sigma2/2)*t**2 + lam * integral (exp(i*s*t) - 1) dr(s)

with drift b, diffusion sigma2 >= 0, jump intensity lam >= 0 and jump law r,
a probability measure on the reals excluding 0 with finite moments.  On a
periodic lattice with spacing a the smeared pairing is the Riemann sum
eta(f) = a^d * sum_x eta_x f_x, and site values are scaled so that lattice
cumulants converge to their continuum integrals as a -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import factorial

from .errors import ConfigurationError, RangeError

MAX_CUMULANT_ORDER = 8

_ATOMS = "atoms"
_UNIFORM = "uniform"
_TWO_SIDED_EXP = "two_sided_exponential"
_KINDS = (_ATOMS, _UNIFORM, _TWO_SIDED_EXP)


@dataclass(frozen=True)
class JumpLaw:
    """Jump distribution r from a closed catalogue with analytic moments.

    Kinds:
      * ``atoms``: finite mixture of point masses at nonzero positions.
      * ``uniform``: uniform density on an interval not containing 0 in its
        interior.
      * ``two_sided_exponential``: symmetric Laplace density with given scale.
    """

    kind: str
    params: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unsupported jump law kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == _ATOMS:
            s, w = self.positions_weights()
            if s.size == 0:
                raise ConfigurationError("atom jump law needs at least one atom")
            if np.any(s == 0.0):
                raise ConfigurationError("jump law may not place mass at 0")
            if np.any(w <= 0.0) or abs(w.sum() - 1.0) > 1e-12:
                raise ConfigurationError("atom weights must be positive and sum to 1")
        elif self.kind == _UNIFORM:
            lo, hi = self.params
            if not lo < hi:
                raise ConfigurationError("uniform jump law needs lo < hi")
            if lo < 0.0 < hi:
                raise ConfigurationError("uniform jump interval must exclude 0")
        else:
            (scale,) = self.params
            if scale <= 0.0:
                raise ConfigurationError("two-sided exponential scale must be > 0")

    @classmethod
    def atoms(cls, positions_weights) -> "JumpLaw":
        flat = []
        for s, w in positions_weights:
            flat += [s, w]
        return cls(_ATOMS, tuple(flat))

    @classmethod
    def atom(cls, position: float) -> "JumpLaw":
        return cls.atoms([(position, 1.0)])

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "JumpLaw":
        return cls(_UNIFORM, (lo, hi))

    @classmethod
    def two_sided_exponential(cls, scale: float) -> "JumpLaw":
        return cls(_TWO_SIDED_EXP, (scale,))

    def positions_weights(self):
        p = np.asarray(self.params, dtype=float).reshape(-1, 2)
        return p[:, 0], p[:, 1]

    def moment(self, n: int) -> float:
        """n-th moment r_n = integral s^n dr(s), exact per catalogue kind."""
        if n < 0 or n > MAX_CUMULANT_ORDER:
            raise RangeError(f"jump moment order {n} outside [0, {MAX_CUMULANT_ORDER}]")
        if self.kind == _ATOMS:
            s, w = self.positions_weights()
            return float(np.sum(w * s**n))
        if self.kind == _UNIFORM:
            lo, hi = self.params
            return float((hi ** (n + 1) - lo ** (n + 1)) / ((n + 1) * (hi - lo)))
        (scale,) = self.params
        if n % 2 == 1:
            return 0.0
        return float(factorial(n) * scale**n)

    def char_minus_one(self, t):
        """integral (exp(i*s*t) - 1) dr(s), vectorized over t, closed form."""
        t = np.asarray(t, dtype=float)
        if self.kind == _ATOMS:
            s, w = self.positions_weights()
            return np.sum(w * (np.exp(1j * np.multiply.outer(t, s)) - 1.0), axis=-1)
        if self.kind == _UNIFORM:
            lo, hi = self.params
            # (e^{ith} - e^{itl}) / (it(h-l)) = e^{it(h+l)/2} sinc(t(h-l)/(2 pi));
            # the sinc form stays finite for t = 0 and subnormal t, where the
            # naive quotient's denominator underflows.
            mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
            val = np.exp(1j * t * mid) * np.sinc(t * half / np.pi)
            return val - 1.0
        (scale,) = self.params
        return 1.0 / (1.0 + scale**2 * t**2) - 1.0 + 0.0j

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == _ATOMS:
            s, w = self.positions_weights()
            return rng.choice(s, size=size, p=w)
        if self.kind == _UNIFORM:
            lo, hi = self.params
            return rng.uniform(lo, hi, size=size)
        (scale,) = self.params
        return rng.laplace(0.0, scale, size=size)


@dataclass(frozen=True)
class LevyCharacteristic:
    """Drift + diffusion + compound Poisson triple defining psi."""

    b: float = 0.0
    sigma2: float = 0.0
    lam: float = 0.0
    jump_law: JumpLaw | None = None

    def __post_init__(self):
        if self.sigma2 < 0.0:
            raise ConfigurationError("sigma2 must be >= 0")
        if self.lam < 0.0:
            raise ConfigurationError("lambda must be >= 0")
        if self.lam > 0.0 and self.jump_law is None:
            raise ConfigurationError("lambda > 0 requires a jump law")


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic d-dimensional grid with L sites per axis and spacing a."""

    d: int
    L: int
    a: float

    def __post_init__(self):
        if self.d < 1:
            raise ConfigurationError("dimension d must be >= 1")
        if self.L < 1:
            raise ConfigurationError("sites per axis L must be >= 1")
        if self.a <= 0.0:
            raise ConfigurationError("lattice spacing a must be > 0")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def cell_volume(self) -> float:
        return self.a**self.d

    @property
    def volume(self) -> float:
        return (self.L * self.a) ** self.d


@dataclass(frozen=True)
class LatticeField:
    """Real scalar field on a lattice; pairing convention a^d * sum_x."""

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            v = v.reshape(self.spec.shape)
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("lattice field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, spec: LatticeSpec) -> "LatticeField":
        return cls(spec, np.zeros(spec.shape))


def psi(chi: LevyCharacteristic, t):
    """Characteristic exponent psi(t); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    out = 1j * chi.b * t - 0.5 * chi.sigma2 * t**2
    if chi.lam > 0.0:
        out = out + chi.lam * chi.jump_law.char_minus_one(t)
    if out.ndim == 0:
        return complex(out)
    return out


def noise_cumulant(chi: LevyCharacteristic, n: int) -> float:
    """n-th cumulant of the noise: kappa_1 = b + lam*r_1, kappa_2 = sigma2 + lam*r_2,
    kappa_n = lam*r_n for n >= 3."""
    if n < 1 or n > MAX_CUMULANT_ORDER:
        raise RangeError(f"cumulant order {n} outside [1, {MAX_CUMULANT_ORDER}]")
    jump = chi.lam * chi.jump_law.moment(n) if chi.lam > 0.0 else 0.0
    if n == 1:
        return chi.b + jump
    if n == 2:
        return chi.sigma2 + jump
    return jump


def characteristic_functional(chi: LevyCharacteristic, f: LatticeField) -> complex:
    """E[exp(i*eta(f))] = exp(a^d * sum_x psi(f_x)) on the lattice."""
    return complex(np.exp(f.spec.cell_volume * np.sum(psi(chi, f.values))))


def sample_noise(chi: LevyCharacteristic, spec: LatticeSpec,
                 rng: np.random.Generator) -> LatticeField:
    """Draw one lattice noise realization.

    Site value: b + sigma*a^(-d/2)*N(0,1) + a^(-d) * sum of N jumps,
    N ~ Poisson(lam * a^d), jumps i.i.d. from the jump law.  Sites are
    independent; no thinning approximation for small Poisson means.
    """
    vol = spec.cell_volume
    values = np.full(spec.n_sites, chi.b)
    if chi.sigma2 > 0.0:
        values += np.sqrt(chi.sigma2 / vol) * rng.standard_normal(spec.n_sites)
    if chi.lam > 0.0:
        counts = rng.poisson(chi.lam * vol, size=spec.n_sites)
        total = int(counts.sum())
        if total:
            site = np.repeat(np.arange(spec.n_sites), counts)
            jumps = chi.jump_law.sample(rng, total)
            values += np.bincount(site, weights=jumps, minlength=spec.n_sites) / vol
    return LatticeField(spec, values.reshape(spec.shape))
