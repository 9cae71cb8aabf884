"""Analytic secrecy outage probabilities.

The center vehicle's outage probability has a closed form in the scaled
exponential integral e^s E_n(s); the edge vehicle's is a finite-interval
Gauss-Legendre quadrature of (eavesdropper SINR density) x (legitimate-leg
survival). A semi-analytic adaptive integral and a legacy series variant
are kept alongside for cross-checks and the validation deviation report.

Disabled artificial noise is encoded as p_an_antenna_w = 0, which drives
the AN rate constant theta3 to infinity; the formulas then reduce to their
no-jamming limits without any branching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special

from . import kernels
from .channel import LinkGeometry
from .params import SystemParams

# Relative width of the removable-singularity zone of the direct density
# formula, and the slack band inside which probabilities are clamped to
# [0, 1] rather than rejected.
SINGULAR_RHO = 1e-3
CLAMP_SLACK = 1e-9

PHI_VARIANTS = ("exact", "simplified")
METHODS = ("closed_form", "semi_analytic", "monte_carlo")

_clamp_count = 0
_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_laguerre_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def clamp_count() -> int:
    """Number of probabilities clamped from the slack band since reset."""
    return _clamp_count


def reset_clamp_count() -> None:
    global _clamp_count
    _clamp_count = 0


def _clamp_probability(p: float, label: str) -> float:
    global _clamp_count
    if not math.isfinite(p) or p < -CLAMP_SLACK or p > 1.0 + CLAMP_SLACK:
        raise ValueError(f"{label}: probability {p} outside tolerance band")
    if p < 0.0 or p > 1.0:
        _clamp_count += 1
        return min(max(p, 0.0), 1.0)
    return p


@dataclass(frozen=True)
class SopInputs:
    """Everything the outage formulas need for one pair at one power split."""

    lam: float
    p_alpha_w: float
    p_beta_w: float
    p_an_antenna_w: float
    d_alpha_b: float
    d_alpha_e: float
    d_b_e: float
    d_beta_alpha: float
    d_beta_e: float
    gamma_alpha_b: float
    gamma_alpha_e: float
    gamma_be: float
    gamma_beta_alpha: float
    gamma_beta_e: float
    gamma_alpha_alpha: float
    noise_w: float
    p_si_w: float
    k_antennas: int
    rs: float
    quad_nodes: int
    path_loss_exp: float

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 0.5:
            raise ValueError(f"lam must lie in (0, 0.5), got {self.lam}")
        if self.k_antennas < 3:
            raise ValueError(f"k_antennas must be >= 3, got {self.k_antennas}")
        if self.quad_nodes < 2:
            raise ValueError(f"quad_nodes must be >= 2, got {self.quad_nodes}")
        if self.p_an_antenna_w < 0.0:
            raise ValueError("p_an_antenna_w must be nonnegative")
        for name in (
            "p_alpha_w", "p_beta_w", "d_alpha_b", "d_alpha_e", "d_b_e",
            "d_beta_alpha", "d_beta_e", "gamma_alpha_b", "gamma_alpha_e",
            "gamma_be", "gamma_beta_alpha", "gamma_beta_e",
            "gamma_alpha_alpha", "noise_w", "p_si_w", "rs", "path_loss_exp",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_params(
        cls,
        params: SystemParams,
        geometry: LinkGeometry,
        lam: float,
        an: bool = True,
    ) -> "SopInputs":
        return cls(
            lam=lam,
            p_alpha_w=params.p_center_w,
            p_beta_w=params.p_edge_w,
            p_an_antenna_w=params.p_an_antenna_w if an else 0.0,
            d_alpha_b=geometry.d_alpha_b,
            d_alpha_e=geometry.d_alpha_e,
            d_b_e=geometry.d_b_e,
            d_beta_alpha=geometry.d_beta_alpha,
            d_beta_e=geometry.d_beta_e,
            gamma_alpha_b=params.gamma("alpha_b"),
            gamma_alpha_e=params.gamma("alpha_e"),
            gamma_be=params.gamma("b_e"),
            gamma_beta_alpha=params.gamma("beta_alpha"),
            gamma_beta_e=params.gamma("beta_e"),
            gamma_alpha_alpha=params.gamma("alpha_alpha"),
            noise_w=params.noise_w,
            p_si_w=params.p_si_w,
            k_antennas=params.bs_antennas,
            rs=params.secrecy_rate_target,
            quad_nodes=params.quad_nodes,
            path_loss_exp=params.path_loss_exp,
        )

    @cached_property
    def z(self) -> float:
        return 2.0**self.rs

    @cached_property
    def tau1(self) -> float:
        return (1.0 - self.lam) / self.lam

    @cached_property
    def tau2(self) -> float:
        return (1.0 - self.z * self.lam) / (self.z * self.lam)

    # Center-vehicle constants: the BS leg SINR is exponential with rate a;
    # the eavesdropper leg conditioned on the AN gain is exponential with
    # rate b + g * (unit-rate Erlang variate).
    @cached_property
    def a(self) -> float:
        v = self.path_loss_exp
        return (
            self.gamma_alpha_b
            * self.noise_w
            / (self.lam * self.p_alpha_w * self.d_alpha_b ** (-v))
        )

    @cached_property
    def b(self) -> float:
        v = self.path_loss_exp
        return (
            self.gamma_alpha_e
            * self.noise_w
            / (self.lam * self.p_alpha_w * self.d_alpha_e ** (-v))
        )

    @cached_property
    def g(self) -> float:
        v = self.path_loss_exp
        return (
            self.gamma_alpha_e
            * self.p_an_antenna_w
            * self.d_b_e ** (-v)
            / (self.lam * self.p_alpha_w * self.d_alpha_e ** (-v) * self.gamma_be)
        )

    # Edge-vehicle constants: rate parameters of the normalized signal,
    # AN, and interference components of the eavesdropper SINR.
    @cached_property
    def theta2(self) -> float:
        v = self.path_loss_exp
        return self.noise_w * self.gamma_alpha_e / (self.p_alpha_w * self.d_alpha_e ** (-v))

    @cached_property
    def theta3(self) -> float:
        if self.p_an_antenna_w == 0.0:
            return math.inf
        v = self.path_loss_exp
        return self.noise_w * self.gamma_be / (self.p_an_antenna_w * self.d_b_e ** (-v))

    @cached_property
    def theta4(self) -> float:
        v = self.path_loss_exp
        return self.noise_w * self.gamma_beta_e / (self.p_beta_w * self.d_beta_e ** (-v))

    # Relay-leg survival constants.
    @cached_property
    def c_phi(self) -> float:
        v = self.path_loss_exp
        return self.gamma_alpha_alpha * self.p_beta_w * self.d_beta_alpha ** (-v)

    @cached_property
    def k_phi(self) -> float:
        v = self.path_loss_exp
        return (
            self.gamma_beta_alpha
            * self.noise_w
            / (self.p_beta_w * self.d_beta_alpha ** (-v))
        )

    @cached_property
    def si_coeff(self) -> float:
        return self.gamma_beta_alpha * self.p_si_w

    @cached_property
    def kappa(self) -> float:
        return self.a


@dataclass(frozen=True)
class SecrecyReport:
    """Outage probabilities of one pair plus the method that produced them."""

    p_sop_alpha: float
    p_sop_beta: float
    p_sops: float
    method: str

    def __post_init__(self) -> None:
        for name in ("p_sop_alpha", "p_sop_beta", "p_sops"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Abscissae and weights of the n-point Gauss-Legendre rule on (-1, 1).

    Tables are cached and returned read-only.
    """
    if nodes < 1 or int(nodes) != nodes:
        raise ValueError(f"nodes must be a positive integer, got {nodes}")
    n = int(nodes)
    if n not in _gl_cache:
        x, w = np.polynomial.legendre.leggauss(n)
        x.setflags(write=False)
        w.setflags(write=False)
        _gl_cache[n] = (x, w)
    return _gl_cache[n]


def exp_integral_e1(x: float) -> float:
    """E1(x) for x > 0; the principal-value Ei(x) for x < 0."""
    if x == 0.0:
        raise ValueError("exponential integral diverges at 0")
    if x > 0.0:
        return float(special.exp1(x))
    return float(special.expi(x))


def exp_integral_en(order: int, x: float) -> float:
    """Two-argument form E_n(x) = integral_1^inf exp(-x t) t^-n dt."""
    if order < 0 or int(order) != order:
        raise ValueError(f"order must be a nonnegative integer, got {order}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return float(special.expn(int(order), x))


def scaled_expn(order: int, s: float) -> float:
    """exp(s) * E_n(s), stable for all s > 0.

    Direct evaluation overflows once exp(s) does, so past s = 50 the value
    is computed from the Gauss-Laguerre form (1/s) sum w_i (1+x_i/s)^-n.
    """
    if s <= 0.0:
        raise ValueError(f"s must be positive, got {s}")
    if s <= 50.0:
        return float(math.exp(s) * special.expn(int(order), s))
    if 64 not in _laguerre_cache:
        _laguerre_cache[64] = np.polynomial.laguerre.laggauss(64)
    x, w = _laguerre_cache[64]
    return float(np.sum(w * (1.0 + x / s) ** (-float(order))) / s)


def sop_alpha_closed(inputs: SopInputs) -> float:
    """Closed-form outage probability of the center vehicle.

    With a = rate of the BS-leg SINR and the eavesdropper leg an
    exponential/Erlang mixture, the outage probability reduces to
    1 - exp(-psi1) [1 - (a z / g) e^s E_{K-1}(s)] at s = (a z + b)/g.
    Raises when the evaluation leaves the probability tolerance band.
    """
    a, b, g, z = inputs.a, inputs.b, inputs.g, inputs.z
    psi1 = a * (z - 1.0)
    if g == 0.0:
        inner = b / (b + a * z)
    else:
        s = (a * z + b) / g
        inner = 1.0 - (a * z / g) * scaled_expn(inputs.k_antennas - 1, s)
    return _clamp_probability(1.0 - math.exp(-psi1) * inner, "sop_alpha_closed")


def pdf_y_alpha(y, inputs: SopInputs):
    """Density of the center-vehicle eavesdropper SINR."""
    b, g, k = inputs.b, inputs.g, inputs.k_antennas
    y = np.asarray(y, dtype=float)
    base = 1.0 + g * y
    out = np.exp(-b * y) * (b * base ** (1.0 - k) + (k - 1.0) * g * base ** (-float(k)))
    return out if out.ndim else float(out)


def cdf_y_alpha(y, inputs: SopInputs):
    """CDF of the center-vehicle eavesdropper SINR."""
    b, g, k = inputs.b, inputs.g, inputs.k_antennas
    y = np.asarray(y, dtype=float)
    out = 1.0 - np.exp(-b * y) * (1.0 + g * y) ** (1.0 - k)
    return out if out.ndim else float(out)


def sop_alpha_semianalytic(inputs: SopInputs) -> float:
    """Adaptive-quadrature evaluation of the center-vehicle outage integral.

    Integrates exp(-a z y) against the eavesdropper SINR density to 1e-8
    absolute tolerance; the infinite interval is truncated where the
    exponential envelope falls 34 e-folds below its peak.
    """
    a, b, g, z, k = inputs.a, inputs.b, inputs.g, inputs.z, inputs.k_antennas
    psi1 = a * (z - 1.0)
    decay = 1.0 + a * z / b
    q = g / b

    def integrand(u: float) -> float:
        base = 1.0 + q * u
        return math.exp(-decay * u) * (
            base ** (1.0 - k) + (k - 1.0) * q * base ** (-float(k))
        )

    upper = 34.0 / decay
    # The jamming term concentrates the mass at u ~ 1/q, which can sit many
    # orders of magnitude below the interval scale; hint those breakpoints
    # so the subdivision finds the spike.
    breakpoints = None
    if q > 0.0:
        spike = 1.0 / q
        breakpoints = [s for s in (0.1 * spike, spike, 10.0 * spike, 100.0 * spike) if s < upper]
    value, _ = integrate.quad(
        integrand, 0.0, upper,
        epsabs=1e-8, epsrel=1e-10, limit=400, points=breakpoints or None,
    )
    return _clamp_probability(1.0 - math.exp(-psi1) * value, "sop_alpha_semianalytic")


def sop_alpha_series(
    inputs: SopInputs, ei_branch: str = "e1", prefactor: str = "psi1"
) -> float:
    """Legacy series form of the center outage, kept verbatim.

    Exists solely for the validation deviation report: the bracketed sums
    keep the legacy sign convention, ei_branch selects how the ambiguous
    Ei call on a positive argument is read ("e1" for E1(s), "expi" for the
    principal-value Ei(s)), and prefactor "psi3" swaps in the alternative
    exp(-psi3) headline factor in place of exp(-psi1). Returns the raw
    value without range checks; garbage outputs are the finding.
    """
    if ei_branch not in ("e1", "expi"):
        raise ValueError(f"unknown ei_branch: {ei_branch!r}")
    if prefactor not in ("psi1", "psi3"):
        raise ValueError(f"unknown prefactor: {prefactor!r}")
    if inputs.p_an_antenna_w == 0.0:
        raise ValueError("series form requires active artificial noise")
    v = inputs.path_loss_exp
    k = inputs.k_antennas
    z = inputs.z
    psi1 = inputs.a * (z - 1.0)
    psi2 = (
        -inputs.gamma_alpha_e / inputs.d_alpha_e ** (-v)
        - inputs.gamma_alpha_b * z / inputs.d_alpha_b ** (-v)
    )
    psi3 = (
        inputs.noise_w
        * inputs.d_alpha_e ** (-v)
        * inputs.gamma_be
        / (inputs.p_an_antenna_w * inputs.d_b_e ** (-v) * inputs.gamma_alpha_e)
    )
    s = -psi2 * psi3
    ei = float(special.exp1(s)) if ei_branch == "e1" else float(special.expi(s))
    ratio = inputs.lam * inputs.p_alpha_w / inputs.noise_w
    q = 1.0 / inputs.g

    def bracket(n: int) -> float:
        total = 0.0
        for i in range(1, n + 1):
            total += math.factorial(i - 1) * (-psi2) ** (n - i) * psi3 ** (-i)
        return total - psi2**n * math.exp(s) * ei

    with np.errstate(over="ignore", invalid="ignore"):
        e1 = ratio ** (1.0 - k) / math.factorial(k - 1) * bracket(k - 1)
        e2 = ratio ** (2.0 - k) / math.factorial(k - 2) * bracket(k - 2)
        head = math.exp(-psi1) if prefactor == "psi1" else math.exp(-psi3)
        value = 1.0 - (k - 1.0) * head * q ** (k - 1.0) * e1 - inputs.b * head * q ** (
            k - 1.0
        ) * e2
    return float(value)


def _beta_common(y: np.ndarray, inputs: SopInputs):
    lam = inputs.lam
    u = 1.0 - lam - lam * y
    r = inputs.theta4 * u / inputs.theta2
    rho = 1.0 - r
    t = inputs.theta4 * y
    one_k = 1.0 - inputs.k_antennas
    phi_t = np.exp(-t) * (1.0 + t / inputs.theta3) ** one_k
    return u, r, rho, t, one_k, phi_t


def cdf_y_beta(y, inputs: SopInputs):
    """CDF of the edge-vehicle eavesdropper SINR, stable on both sides of
    the power-ceiling breakpoint."""
    y_arr = np.asarray(y, dtype=float)
    th3 = inputs.theta3
    u, r, rho, t, one_k, phi_t = _beta_common(y_arr, inputs)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = rho * t / r
        dpsi = -w + one_k * np.log1p(w / (th3 + t))
        delta = phi_t * np.expm1(dpsi)
        low = 1.0 - phi_t + (r / rho) * delta
        high = 1.0 - phi_t / rho
    out = np.where(u > 0.0, low, high)
    out = np.where(y_arr <= 0.0, 0.0, out)
    return out if out.ndim else float(out)


def _pdf_y_beta_direct(y: np.ndarray, inputs: SopInputs):
    """Direct density formula; callers own the singular-zone fixup."""
    th2, th3, th4 = inputs.theta2, inputs.theta3, inputs.theta4
    lam = inputs.lam
    u, r, rho, t, one_k, phi_t = _beta_common(y, inputs)
    m_t = -1.0 + one_k / (th3 + t)
    r_prime = -lam * th4 / th2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = rho * t / r
        dpsi = -w + one_k * np.log1p(w / (th3 + t))
        growth = np.expm1(dpsi)
        delta = phi_t * growth
        phi_tr = phi_t * (1.0 + growth)
        m_tr = -1.0 + one_k / (th3 + t / r)
        tau_prime = th2 * (1.0 - lam) / (u * u)
        e1p = phi_t * m_t * th4
        e2p = phi_tr * m_tr * tau_prime
        low = (r_prime / (rho * rho)) * delta + (r / rho) * e2p - e1p / rho
        high = -(r_prime / (rho * rho)) * phi_t - e1p / rho
    return np.where(u > 0.0, low, high), rho


def pdf_y_beta(y, inputs: SopInputs):
    """Density of the edge-vehicle eavesdropper SINR.

    Inside the removable-singularity zone the direct formula cancels
    catastrophically, so the value is recovered there by a fourth-order
    Richardson difference of the stable CDF.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out, rho = _pdf_y_beta_direct(y_arr, inputs)
    mask = np.abs(rho) < SINGULAR_RHO
    if np.any(mask):
        out = np.array(out, copy=True)
        tau1 = inputs.tau1
        for idx in np.nonzero(mask)[0]:
            yi = float(y_arr[idx])
            h = min(1e-3 * (1.0 + yi), yi / 4.0, (tau1 - yi) / 8.0)
            f1 = cdf_y_beta(yi + h, inputs) - cdf_y_beta(yi - h, inputs)
            f2 = cdf_y_beta(yi + 2.0 * h, inputs) - cdf_y_beta(yi - 2.0 * h, inputs)
            out[idx] = (8.0 * f1 - f2) / (12.0 * h)
    return out if np.ndim(y) else float(out[0])


def _phi_hat(x, inputs: SopInputs, phi_variant: str, include_bs_fading: bool):
    """Survival probability of the edge vehicle's weaker legitimate leg."""
    x = np.asarray(x, dtype=float)
    if phi_variant == "simplified":
        amp = inputs.c_phi / (inputs.c_phi + inputs.si_coeff)
    else:
        amp = inputs.c_phi / (inputs.c_phi + inputs.si_coeff * x)
    out = amp * np.exp(-inputs.k_phi * x)
    if include_bs_fading:
        tau1 = inputs.tau1
        inside = x < tau1
        out = out * np.where(
            inside,
            np.exp(-inputs.kappa * x / np.where(inside, tau1 - x, 1.0)),
            0.0,
        )
    return out if out.ndim else float(out)


def _panel_edges(inputs: SopInputs, tau2: float) -> list[float]:
    """Integration panel boundaries covering every sharp scale of the
    integrand.

    The density and survival factors vary on y-scales that can sit many
    decades below tau2 (jamming structure, exponential decays, the
    self-interference rolloff), which defeats a single Gauss-Legendre rule.
    Panels are log-spaced from a tenth of the smallest in-range scale up to
    tau2 and depend only on the inputs, never on the node count.
    """
    th2, th3, th4 = inputs.theta2, inputs.theta3, inputs.theta4
    candidates = [1.0 / th4, (1.0 - inputs.lam) / th2]
    if math.isfinite(th3):
        candidates.append(th3 / th4)
        candidates.append(th3 * (1.0 - inputs.lam) / th2)
    if inputs.si_coeff > 0.0:
        candidates.append(inputs.c_phi / (inputs.si_coeff * inputs.z))
    candidates.append(1.0 / (inputs.k_phi * inputs.z))
    scales = [s for s in candidates if math.isfinite(s) and 0.0 < s < tau2]
    if not scales:
        return [0.0, tau2]
    y_lo = max(min(scales) * 0.1, tau2 * 1e-13)
    if y_lo >= tau2:
        return [0.0, tau2]
    panels = 12
    ratio = (tau2 / y_lo) ** (1.0 / panels)
    edges = [0.0, y_lo]
    for i in range(1, panels):
        edges.append(y_lo * ratio**i)
    edges.append(tau2)
    return edges


def sop_beta_quadrature(
    inputs: SopInputs,
    phi_variant: str = "exact",
    include_bs_fading: bool = False,
) -> float:
    """Gauss-Legendre evaluation of the edge vehicle's outage probability.

    Integrates survival x density over (0, tau2), the only region where the
    relayed superposition can still beat the target; tau2 <= 0 means the
    power-split ceiling sits below the target rate and outage is certain.
    The quad_nodes budget is split across scale-aware panels so that
    doubling it changes the result at far below probability resolution.
    phi_variant "simplified" selects the legacy survival factor that
    drops the SINR argument from the self-interference term.
    """
    if phi_variant not in PHI_VARIANTS:
        raise ValueError(f"phi_variant must be one of {PHI_VARIANTS}")
    tau2 = inputs.tau2
    if tau2 <= 0.0:
        return 1.0
    edges = _panel_edges(inputs, tau2)
    n_panels = len(edges) - 1
    total = inputs.quad_nodes
    if total < 4 * n_panels:
        edges = [0.0, tau2]
        n_panels = 1
    base, extra = divmod(total, n_panels)
    counts = [base + (1 if i >= n_panels - extra else 0) for i in range(n_panels)]
    y_parts = []
    w_parts = []
    for i, n_i in enumerate(counts):
        lo, hi = edges[i], edges[i + 1]
        nodes, weights = gauss_legendre(n_i)
        half = 0.5 * (hi - lo)
        y_parts.append(half * (nodes + 1.0) + lo)
        w_parts.append(half * weights)
    y = np.concatenate(y_parts)
    w = np.concatenate(w_parts)
    vals = kernels.beta_integrand(
        y,
        inputs.lam,
        inputs.theta2,
        inputs.theta3,
        inputs.theta4,
        float(inputs.k_antennas),
        inputs.z,
        inputs.c_phi,
        inputs.si_coeff,
        inputs.k_phi,
        inputs.kappa,
        inputs.tau1,
        phi_variant == "simplified",
        include_bs_fading,
    )
    u = 1.0 - inputs.lam - inputs.lam * y
    rho = 1.0 - inputs.theta4 * u / inputs.theta2
    mask = np.abs(rho) < SINGULAR_RHO
    if np.any(mask):
        vals = np.array(vals, copy=True)
        ys = y[mask]
        x = inputs.z * ys + inputs.z - 1.0
        vals[mask] = _phi_hat(x, inputs, phi_variant, include_bs_fading) * pdf_y_beta(
            ys, inputs
        )
    survive = float(np.dot(w, vals))
    return _clamp_probability(1.0 - survive, "sop_beta_quadrature")


def sops(p_alpha: float, p_beta: float) -> float:
    """System outage probability by inclusion-exclusion."""
    for name, p in (("p_alpha", p_alpha), ("p_beta", p_beta)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p_alpha + p_beta - p_alpha * p_beta


def sop_alpha_grid(params, geometry, lams, an: bool = True) -> np.ndarray:
    """Center-vehicle closed form over a whole grid of power splits.

    Agrees with sop_alpha_closed per split to rounding error; the scaled
    exponential integral depends on split-independent ratios, so it is
    evaluated once per distinct argument.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or not len(lams):
        raise ValueError("lams must be a nonempty 1-d array")
    if np.any(lams <= 0.0) or np.any(lams > 0.5):
        raise ValueError("every power split must lie in (0, 0.5]")
    v = params.path_loss_exp
    noise = params.noise_w
    p_a = params.p_center_w
    pan = params.p_an_antenna_w if an else 0.0
    z = 2.0**params.secrecy_rate_target
    a = params.gamma("alpha_b") * noise / (lams * p_a * geometry.d_alpha_b ** (-v))
    b = params.gamma("alpha_e") * noise / (lams * p_a * geometry.d_alpha_e ** (-v))
    psi1 = a * (z - 1.0)
    if pan == 0.0:
        inner = b / (b + a * z)
    else:
        g = (
            params.gamma("alpha_e")
            * pan
            * geometry.d_b_e ** (-v)
            / (lams * p_a * geometry.d_alpha_e ** (-v) * params.gamma("b_e"))
        )
        s = (a * z + b) / g
        order = params.bs_antennas - 1
        expn_by_s = {float(si): scaled_expn(order, float(si)) for si in np.unique(s)}
        inner = 1.0 - (a * z / g) * np.array([expn_by_s[float(si)] for si in s])
    raw = 1.0 - np.exp(-psi1) * inner
    return np.array([_clamp_probability(float(p), "sop_alpha_closed") for p in raw])


def sop_beta_grid(
    params,
    geometry,
    lams,
    an: bool = True,
    phi_variant: str = "exact",
    include_bs_fading: bool = False,
) -> np.ndarray:
    """Edge-vehicle quadrature over a whole grid of power splits.

    Builds every split's panel layout at once and evaluates the integrand
    in a single kernel call, which removes the per-split setup cost when an
    optimizer needs the entire grid. Agrees with sop_beta_quadrature per
    split to rounding error.
    """
    if phi_variant not in PHI_VARIANTS:
        raise ValueError(f"phi_variant must be one of {PHI_VARIANTS}")
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or not len(lams):
        raise ValueError("lams must be a nonempty 1-d array")
    if np.any(lams <= 0.0) or np.any(lams > 0.5):
        raise ValueError("every power split must lie in (0, 0.5]")
    v = params.path_loss_exp
    noise = params.noise_w
    p_a = params.p_center_w
    pan = params.p_an_antenna_w if an else 0.0
    z = 2.0**params.secrecy_rate_target
    k_antennas = params.bs_antennas
    theta2 = noise * params.gamma("alpha_e") / (p_a * geometry.d_alpha_e ** (-v))
    theta3 = (
        noise * params.gamma("b_e") / (pan * geometry.d_b_e ** (-v))
        if pan > 0.0
        else math.inf
    )
    theta4 = noise * params.gamma("beta_e") / (params.p_edge_w * geometry.d_beta_e ** (-v))
    c_phi = params.gamma("alpha_alpha") * params.p_edge_w * geometry.d_beta_alpha ** (-v)
    k_phi = (
        params.gamma("beta_alpha")
        * noise
        / (params.p_edge_w * geometry.d_beta_alpha ** (-v))
    )
    si_coeff = params.gamma("beta_alpha") * params.p_si_w
    kappa = params.gamma("alpha_b") * noise / (lams * p_a * geometry.d_alpha_b ** (-v))
    tau1 = (1.0 - lams) / lams
    tau2 = (1.0 - z * lams) / (z * lams)

    out = np.ones(len(lams))
    live = np.nonzero(tau2 > 0.0)[0]
    if not len(live):
        return out
    total = params.quad_nodes
    panels = 12

    # Panel layout per live split, mirroring _panel_edges: the smallest
    # in-range integrand scale fixes the start of a 12-decade-ish log span.
    cand_cols = [np.full(len(live), 1.0 / theta4), (1.0 - lams[live]) / theta2]
    if math.isfinite(theta3):
        cand_cols.append(np.full(len(live), theta3 / theta4))
        cand_cols.append(theta3 * (1.0 - lams[live]) / theta2)
    if si_coeff > 0.0:
        cand_cols.append(np.full(len(live), c_phi / (si_coeff * z)))
    cand_cols.append(np.full(len(live), 1.0 / (k_phi * z)))
    cands = np.column_stack(cand_cols)
    t2_live = tau2[live]
    in_range = np.isfinite(cands) & (cands > 0.0) & (cands < t2_live[:, None])
    min_scale = np.where(in_range, cands, np.inf).min(axis=1)
    y_lo = np.maximum(min_scale * 0.1, t2_live * 1e-13)
    multi = np.isfinite(min_scale) & (y_lo < t2_live) & (total >= 4 * (panels + 1))

    y_rows = np.empty((len(live), total))
    w_rows = np.empty((len(live), total))
    if np.any(~multi):
        rows = np.nonzero(~multi)[0]
        nodes, weights = gauss_legendre(total)
        half = 0.5 * t2_live[rows]
        y_rows[rows] = half[:, None] * (nodes[None, :] + 1.0)
        w_rows[rows] = half[:, None] * weights[None, :]
    if np.any(multi):
        rows = np.nonzero(multi)[0]
        n_panels = panels + 1
        lo_col = y_lo[rows]
        hi_col = t2_live[rows]
        ratio = (hi_col / lo_col) ** (1.0 / panels)
        edges = np.empty((len(rows), n_panels + 1))
        edges[:, 0] = 0.0
        edges[:, 1] = lo_col
        for i in range(1, panels):
            edges[:, 1 + i] = lo_col * ratio**i
        edges[:, n_panels] = hi_col
        base, extra = divmod(total, n_panels)
        col = 0
        for i in range(n_panels):
            n_i = base + (1 if i >= n_panels - extra else 0)
            nodes, weights = gauss_legendre(n_i)
            half = 0.5 * (edges[:, i + 1] - edges[:, i])
            y_rows[rows, col : col + n_i] = (
                half[:, None] * (nodes[None, :] + 1.0) + edges[:, i : i + 1]
            )
            w_rows[rows, col : col + n_i] = half[:, None] * weights[None, :]
            col += n_i

    lam_nodes = np.repeat(lams[live], total)
    theta2_nodes = np.full(len(live) * total, theta2)
    vals = kernels.beta_integrand_nodes(
        y_rows.ravel(),
        lam_nodes,
        theta2_nodes,
        theta3,
        theta4,
        float(k_antennas),
        z,
        c_phi,
        si_coeff,
        k_phi,
        np.repeat(kappa[live], total),
        np.repeat(tau1[live], total),
        phi_variant == "simplified",
        include_bs_fading,
    )
    y_nodes = y_rows.ravel()
    u = 1.0 - lam_nodes - lam_nodes * y_nodes
    rho = 1.0 - theta4 * u / theta2
    bad = np.nonzero(np.abs(rho) < SINGULAR_RHO)[0]
    if len(bad):
        vals = np.array(vals, copy=True)
        inputs_by_lam: dict[float, SopInputs] = {}
        for idx in bad:
            lam_i = float(lam_nodes[idx])
            inp = inputs_by_lam.get(lam_i)
            if inp is None:
                inp = SopInputs.from_params(params, geometry, lam_i, an=an)
                inputs_by_lam[lam_i] = inp
            yi = float(y_nodes[idx])
            x = z * yi + z - 1.0
            vals[idx] = _phi_hat(x, inp, phi_variant, include_bs_fading) * pdf_y_beta(
                yi, inp
            )
    survive = np.einsum("ij,ij->i", w_rows, vals.reshape(len(live), total))
    for pos, row in enumerate(live):
        out[row] = _clamp_probability(1.0 - float(survive[pos]), "sop_beta_quadrature")
    return out


def pair_secrecy(
    inputs: SopInputs,
    phi_variant: str = "exact",
    include_bs_fading: bool = False,
) -> SecrecyReport:
    """Analytic secrecy report for one pair.

    The center side prefers the closed form and falls back to the adaptive
    integral if that evaluation misbehaves numerically; the edge side is
    always the quadrature.
    """
    try:
        p_alpha = sop_alpha_closed(inputs)
        method = "closed_form"
    except (ValueError, OverflowError):
        p_alpha = sop_alpha_semianalytic(inputs)
        method = "semi_analytic"
    p_beta = sop_beta_quadrature(inputs, phi_variant, include_bs_fading)
    return SecrecyReport(
        p_sop_alpha=p_alpha,
        p_sop_beta=p_beta,
        p_sops=sops(p_alpha, p_beta),
        method=method,
    )
