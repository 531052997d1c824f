"""Regularized fixed-mass truncated Wightman pairings and the momentum-support
vanishing check.

The truncated four-point kernel in momentum space is the j-sum

    sum_{j=1..4}  prod_{l<j} delta+(k_l^2 - m_l^2) * PV 1/(k_j^2 - m_j^2)
                  * prod_{l>j} delta-(k_l^2 - m_l^2),

with overall momentum conservation sum_l k_l = 0, k^2 the Minkowski square
(k0^2 - |kvec|^2) and delta+- supported on the positive/negative energy mass
shell.  Shells and principal values are regularized at scale epsilon with a
Gaussian surrogate delta (its fast tails sharpen the support-separation
mechanism) and PV(q) = q / (q^2 + eps^2).

The pairing with four momentum-space test functions is evaluated by
stratified, importance-sampled Monte Carlo: legs 1, 3, 4 are sampled inside
their hard-support balls (radially stratified, energies importance-sampled
toward the mass shells), leg 2 is fixed by momentum conservation.  If both
middle test functions have purely space-like support, every j-term carries at
least one shell delta evaluated at a bounded distance from its shell, so the
pairing vanishes as epsilon -> 0; a matched on-shell (time-like) control does
not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ClassificationError, ConfigurationError, NumericalError
from .streams import substream

SPACELIKE = "spacelike"
TIMELIKE = "timelike"
GENERIC = "generic"

_DIM = 3  # Minkowski dimension supported by the integrator


def minkowski_sq(k: np.ndarray) -> np.ndarray:
    """Invariant k^2 = (k0)^2 - |kvec|^2 for (..., d) arrays."""
    k = np.asarray(k, dtype=float)
    return k[..., 0] ** 2 - np.sum(k[..., 1:] ** 2, axis=-1)


@dataclass(frozen=True)
class MomentumTestFunction:
    """Truncated Gaussian bump exp(-|k-c|^2/(2 w^2)) on the ball |k-c| <= R."""

    center: tuple
    width: float
    radius: float
    classification: str = GENERIC
    amplitude: float = 1.0

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        if len(c) != _DIM:
            raise ConfigurationError(f"momentum center must have {_DIM} components")
        if self.width <= 0.0 or self.radius <= 0.0:
            raise ConfigurationError("width and support radius must be > 0")
        if self.classification not in (SPACELIKE, TIMELIKE, GENERIC):
            raise ConfigurationError(f"unknown classification {self.classification!r}")
        if self.classification == SPACELIKE and not _spacelike_ball(c, self.radius):
            raise ClassificationError(
                "support ball is not certifiably space-like; refusing the label")
        object.__setattr__(self, "center", c)

    def __call__(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        dsq = np.sum((k - np.asarray(self.center)) ** 2, axis=-1)
        return self.amplitude * np.exp(-dsq / (2.0 * self.width**2)) * (dsq <= self.radius**2)

    def scaled(self, c: float) -> "MomentumTestFunction":
        return MomentumTestFunction(self.center, self.width, self.radius,
                                    self.classification, self.amplitude * c)


def _spacelike_ball(center, radius) -> bool:
    """True iff sup of k^2 over the Euclidean R-ball around the center is < 0.

    Bound: (|c0| + R)^2 < (|cvec| - R)^2 with |cvec| > R.
    """
    c0 = abs(center[0])
    cs = float(np.linalg.norm(center[1:]))
    return cs > radius and (c0 + radius) ** 2 < (cs - radius) ** 2


def make_spacelike_test(k_c, w: float, R: float) -> MomentumTestFunction:
    """Bump with a hard, analytically certified space-like support."""
    return MomentumTestFunction(tuple(k_c), w, R, SPACELIKE)


def make_test(k_c, w: float, R: float,
              classification: str = GENERIC) -> MomentumTestFunction:
    return MomentumTestFunction(tuple(k_c), w, R, classification)


@dataclass(frozen=True)
class ShellRegularization:
    """Gaussian surrogate for the shell deltas and the PV kernel at scale eps."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ConfigurationError("epsilon must be > 0")

    def delta(self, q: np.ndarray) -> np.ndarray:
        e = self.epsilon
        return np.exp(-(q / e) ** 2) / (e * np.sqrt(np.pi))

    def pv(self, q: np.ndarray) -> np.ndarray:
        e = self.epsilon
        return q / (q**2 + e**2)


@dataclass(frozen=True)
class MassAssignment:
    """Per-leg mass-shell content: tuples of (m^2, weight) quadrature nodes.

    Fixed-mass mode has a single unit-weight node per leg; the superposed mode
    carries the mass-density quadrature (at most 8 nodes per leg).
    """

    legs: tuple

    def __post_init__(self):
        legs = tuple(tuple((float(m2), float(w)) for m2, w in leg) for leg in self.legs)
        for leg in legs:
            if not leg:
                raise ConfigurationError("every leg needs at least one mass node")
            for m2, w in leg:
                if m2 <= 0.0:
                    raise ConfigurationError("mass nodes must have m^2 > 0")
                if w <= 0.0:
                    raise ConfigurationError("mass node weights must be > 0")
        object.__setattr__(self, "legs", legs)

    @classmethod
    def fixed(cls, masses) -> "MassAssignment":
        if any(float(m) <= 0.0 for m in masses):
            raise ConfigurationError("fixed masses must be > 0")
        return cls(tuple(((float(m) ** 2, 1.0),) for m in masses))

    @classmethod
    def superposed(cls, alpha: float, m0: float, n_legs: int = 4,
                   n_nodes: int = 8, s_span: float = 25.0) -> "MassAssignment":
        """Gauss-Legendre nodes of the mass density (analytic normalization).

        The endpoint singularity is absorbed by u = (s - m0^2)^(1-alpha); the
        density integrated to s = m0^2 + s_span.
        """
        if not 0.0 < alpha < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if n_nodes < 1 or n_nodes > 8:
            raise ConfigurationError("superposed mode supports 1..8 nodes per leg")
        u_max = s_span ** (1.0 - alpha)
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        u = 0.5 * u_max * (x + 1.0)
        du = 0.5 * u_max * w
        const = np.sin(np.pi * alpha) / np.pi / (1.0 - alpha)
        nodes = tuple((float(m0**2 + ui ** (1.0 / (1.0 - alpha))), float(const * dui))
                      for ui, dui in zip(u, du))
        return cls((nodes,) * n_legs)

    @property
    def n_legs(self) -> int:
        return len(self.legs)


@dataclass(frozen=True)
class IntegratorSpec:
    """Stratified Monte-Carlo budget: n_strata^2 radial strata, fixed seed."""

    n_samples: int = 1_000_000
    n_strata: int = 8
    seed: int = 0
    max_rel_error: float | None = None

    def __post_init__(self):
        if self.n_samples < self.n_strata**2:
            raise ConfigurationError("need at least one sample per stratum")
        if self.n_strata < 1:
            raise ConfigurationError("n_strata must be >= 1")


@dataclass(frozen=True)
class WightmanEstimate:
    value: float
    stderr: float
    n_samples: int

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def _leg_factors(k: np.ndarray, leg_nodes, reg: ShellRegularization):
    """(delta+, delta-, PV) node-weighted factors for one leg, vectorized."""
    ksq = minkowski_sq(k)
    pos = k[..., 0] > 0.0
    neg = k[..., 0] < 0.0
    dp = np.zeros(ksq.shape)
    dm = np.zeros(ksq.shape)
    pv = np.zeros(ksq.shape)
    for m2, w in leg_nodes:
        d = reg.delta(ksq - m2)
        dp += w * d
        dm += w * d
        pv += w * reg.pv(ksq - m2)
    return dp * pos, dm * neg, pv


def truncated_kernel(ks, masses: MassAssignment, reg: ShellRegularization) -> np.ndarray:
    """The j-sum kernel for a list of n per-leg momentum arrays."""
    n = len(ks)
    facs = [_leg_factors(k, masses.legs[l], reg) for l, k in enumerate(ks)]
    total = np.zeros_like(facs[0][0])
    for j in range(n):
        term = facs[j][2].copy()
        for l in range(n):
            if l < j:
                term = term * facs[l][0]
            elif l > j:
                term = term * facs[l][1]
        total = total + term
    return total


def _sample_ball(test: MomentumTestFunction, nodes, rng, n: int, u_lo: float,
                 u_hi: float, shell_sd_floor: float, extra_peak_fn=None):
    """Sample n momenta from the support ball of a test function.

    Spatial part: exact uniform-in-ball marginal, with the radial CDF variable
    restricted to [u_lo, u_hi) (stratification).  Energy: mixture of the
    uniform slab and truncated normals at the +/- shell energies of every mass
    node (importance sampling); returns (k, weight) with weight the uniform
    density over the proposal density, so that vol * mean(weight * f) is
    unbiased for the ball integral of f.
    """
    c = np.asarray(test.center)
    R = test.radius
    u = rng.uniform(u_lo, u_hi, size=n)
    rho = R * np.sqrt(np.maximum(0.0, 1.0 - (1.0 - u) ** (2.0 / 3.0)))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    spatial = np.stack([c[1] + rho * np.cos(phi), c[2] + rho * np.sin(phi)], axis=1)
    half = np.sqrt(np.maximum(R**2 - rho**2, 1e-300))
    lo, hi = c[0] - half, c[0] + half

    # energy proposal: mixture of the uniform slab and truncated normals at
    # the +/- shell energies of every mass node
    ssq = np.sum(spatial**2, axis=1)
    peaks = [sign * np.sqrt(ssq + m2) for m2, _ in nodes for sign in (1.0, -1.0)]
    if extra_peak_fn is not None:
        peaks = peaks + list(extra_peak_fn(spatial))
    p_uniform = 0.4
    p_peak = (1.0 - p_uniform) / len(peaks)
    sd = max(shell_sd_floor, 1e-9)

    comp = rng.uniform(size=n)
    u_slab = rng.uniform(size=n)
    u_norm = rng.uniform(size=n)
    k0 = lo + (hi - lo) * u_slab  # uniform component by default
    trunc = []
    for mu in peaks:
        a = ndtr((lo - mu) / sd)
        b = ndtr((hi - mu) / sd)
        trunc.append((a, np.maximum(b - a, 1e-300)))
    for i, mu in enumerate(peaks):
        a, mass = trunc[i]
        in_comp = (comp >= p_uniform + i * p_peak) & (comp < p_uniform + (i + 1) * p_peak)
        if np.any(in_comp):
            draw = mu + sd * ndtri(np.clip(a + mass * u_norm, 1e-300, 1.0 - 1e-16))
            k0 = np.where(in_comp, np.clip(draw, lo, hi), k0)
    dens = np.full(n, p_uniform) / (hi - lo)
    for mu, (a, mass) in zip(peaks, trunc):
        pdf = np.exp(-0.5 * ((k0 - mu) / sd) ** 2) / (sd * np.sqrt(2.0 * np.pi))
        dens = dens + p_peak * pdf / mass
    weight = (1.0 / (hi - lo)) / dens
    k = np.concatenate([k0[:, None], spatial], axis=1)
    return k, weight


def wightman_n_regularized(tests, masses: MassAssignment, reg: ShellRegularization,
                           integrator: IntegratorSpec) -> WightmanEstimate:
    """Regularized pairing of the truncated 4-point kernel with test functions.

    tests = (f, h1, h2, g); momentum conservation removes leg 2 analytically
    (k2 = -(k1 + k3 + k4)).  The result carries an overall positive constant
    (mass-density normalization) that cancels in every ratio reported here.
    """
    if len(tests) != 4 or masses.n_legs != 4:
        raise ConfigurationError("the integrator supports exactly n = 4 legs")
    f, h1, h2, g = tests
    S = integrator.n_strata
    per = integrator.n_samples // (S * S)
    vol = 1.0
    for t in (f, h2, g):
        vol *= 4.0 / 3.0 * np.pi * t.radius**3
    sd_floor = reg.epsilon / 2.0

    means = np.empty((S, S))
    variances = np.empty((S, S))
    for s3 in range(S):
        for s4 in range(S):
            rng = substream(integrator.seed, s3, s4)
            k3, w3 = _sample_ball(h2, masses.legs[2], rng, per,
                                  s3 / S, (s3 + 1) / S, sd_floor)
            k4, w4 = _sample_ball(g, masses.legs[3], rng, per,
                                  s4 / S, (s4 + 1) / S, sd_floor)

            def conserved_leg_peaks(spatial1, _a0=k3[:, 0] + k4[:, 0],
                                    _as=k3[:, 1:] + k4[:, 1:]):
                # energies making the conserved leg 2 hit its mass shells
                s2 = np.sum((spatial1 + _as) ** 2, axis=1)
                out = []
                for m2, _ in masses.legs[1]:
                    root = np.sqrt(s2 + m2)
                    out += [-_a0 + root, -_a0 - root]
                return out

            k1, w1 = _sample_ball(f, masses.legs[0], rng, per, 0.0, 1.0, sd_floor,
                                  extra_peak_fn=conserved_leg_peaks)
            k2 = -(k1 + k3 + k4)
            vals = (w1 * w3 * w4 * f(k1) * h1(k2) * h2(k3) * g(k4)
                    * truncated_kernel([k1, k2, k3, k4], masses, reg))
            means[s3, s4] = vals.mean()
            variances[s3, s4] = vals.var(ddof=1) / per
    value = float(vol * means.mean())
    stderr = float(vol * np.sqrt(variances.sum()) / (S * S))
    if integrator.max_rel_error is not None and abs(value) > 0:
        if stderr > integrator.max_rel_error * abs(value):
            raise NumericalError(
                f"integrator error {stderr} exceeds requested tolerance "
                f"({integrator.max_rel_error} relative) at value {value}")
    return WightmanEstimate(value, stderr, per * S * S)


def shell_control_tests(m: float, width: float = 0.4, radius: float = 0.6):
    """Time-like control with bumps centered on the mass shells.

    Kinematics: k1 at rest on the + shell, k3 and k4 on the - shell with
    opposite spatial momenta p = m, so the conserved leg 2 is centered at
    energy (2*sqrt(2)-1)*m with k2^2 = (2*sqrt(2)-1)^2 m^2, time-like but a
    bounded distance from the shell.  Only the j = 2 term survives: its PV
    factor stays smooth over the support, so the epsilon -> 0 limit is a
    plain three-shell integral of order one and the Monte-Carlo variance
    stays bounded as the shells sharpen.
    """
    e = float(m)
    e2 = float(np.sqrt(2.0) * m)
    f = make_test((e, 0.0, 0.0), width, radius, TIMELIKE)
    h1 = make_test((2.0 * e2 - e, 0.0, 0.0), width, radius, TIMELIKE)
    h2 = make_test((-e2, e, 0.0), width, radius, TIMELIKE)
    g = make_test((-e2, -e, 0.0), width, radius, TIMELIKE)
    return f, h1, h2, g


@dataclass(frozen=True)
class BaumannReport:
    epsilons: tuple
    spacelike: tuple          # (value, stderr) per epsilon
    control: tuple            # (value, stderr) per epsilon
    verdict: str              # PASS | FAIL | INCONCLUSIVE
    control_vanishes: bool    # the control must NOT pass the vanishing test
    details: dict

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "spacelike": [{"value": v, "stderr": s} for v, s in self.spacelike],
            "control": [{"value": v, "stderr": s} for v, s in self.control],
            "verdict": self.verdict,
            "control_vanishes": self.control_vanishes,
            "details": self.details,
        }


DECAY_PER_DECADE = 100.0
SMALLNESS_FACTOR = 1e-3


def _decays(effective, epsilons, floor):
    for (v0, e0), (v1, e1) in zip(zip(effective, epsilons), zip(effective[1:], epsilons[1:])):
        if v1 <= floor:
            continue
        required = v0 * (e1 / e0) ** 2  # factor 100 per decade
        if v1 > required:
            return False
    return True


def baumann_check(masses: MassAssignment, h1: MomentumTestFunction,
                  h2: MomentumTestFunction, f: MomentumTestFunction,
                  g: MomentumTestFunction, epsilons,
                  integrator: IntegratorSpec) -> BaumannReport:
    """Vanishing check for space-like smearing against a time-like control.

    PASS requires: decreasing epsilon sequence of length >= 3; space-like
    magnitudes decaying at >= 100x per epsilon decade; the smallest-epsilon
    space-like magnitude below 1e-3 of the matched control; and statistical
    errors small enough to resolve both thresholds (otherwise INCONCLUSIVE).
    """
    if h1.classification != SPACELIKE or h2.classification != SPACELIKE:
        raise ClassificationError("h1 and h2 must be certified space-like")
    eps = [float(e) for e in epsilons]
    details: dict = {}
    space = []
    ctrl = []
    m_ctrl = float(np.sqrt(masses.legs[0][0][0]))
    ctests = shell_control_tests(m_ctrl)
    for i, e in enumerate(eps):
        reg = ShellRegularization(e)
        ispec_s = IntegratorSpec(integrator.n_samples, integrator.n_strata,
                                 substream_seed(integrator.seed, 0, i))
        ispec_c = IntegratorSpec(integrator.n_samples, integrator.n_strata,
                                 substream_seed(integrator.seed, 1, i))
        es = wightman_n_regularized((f, h1, h2, g), masses, reg, ispec_s)
        ec = wightman_n_regularized(ctests, masses, reg, ispec_c)
        space.append((es.value, es.stderr))
        ctrl.append((ec.value, ec.stderr))

    if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])):
        return BaumannReport(tuple(eps), tuple(space), tuple(ctrl), "INCONCLUSIVE",
                             False, {"reason": "need >= 3 strictly decreasing epsilons"})

    c_val, c_err = abs(ctrl[-1][0]), ctrl[-1][1]
    if c_val <= 10.0 * c_err:
        return BaumannReport(tuple(eps), tuple(space), tuple(ctrl), "INCONCLUSIVE",
                             False, {"reason": "control scale not statistically resolved"})
    eff = [abs(v) + 4.0 * s for v, s in space]
    floor = 1e-12 * c_val
    decay_ok = _decays(eff, eps, floor)
    small_ok = eff[-1] <= SMALLNESS_FACTOR * c_val
    ctrl_eff = [abs(v) + 4.0 * s for v, s in ctrl]
    control_vanishes = (_decays(ctrl_eff, eps, floor)
                        and ctrl_eff[-1] <= SMALLNESS_FACTOR * c_val)
    verdict = "PASS" if (decay_ok and small_ok) else "FAIL"
    details.update({
        "control_scale": c_val,
        "decay_ok": decay_ok,
        "smallness_ok": small_ok,
        "effective_spacelike": eff,
    })
    return BaumannReport(tuple(eps), tuple(space), tuple(ctrl), verdict,
                         control_vanishes, details)


def substream_seed(seed: int, *path: int) -> int:
    """Derive a 63-bit child seed for nested integrator runs."""
    ss = np.random.SeedSequence(entropy=[int(seed), *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
