"""Renormalisation (entropy) functions S and the quantities built from them.

Every map here is a vectorised scalar function of ``v``.  The compositional
definitions (S, S', S'' and the H-combinations derived from them) are the
primary route; :func:`explicit_pos_neg_forms` and
:func:`explicit_composition_forms` transcribe the closed piecewise formulas
for the positive/negative-part entropies so the two can be compared.

Conventions: v_+ = max(v, 0), v_- = min(v, 0); derivatives of the part
compositions carry the indicator 1{|v_pm| > 0}, so they vanish at v = 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kind",
    "EntropySpec",
    "s",
    "s_prime",
    "s_second",
    "h1",
    "h2",
    "h3",
    "antiderivative",
    "beta",
    "beta_prime",
    "beta_second",
    "power_alpha_bundle",
    "sell",
    "sell_prime",
    "sell_second",
    "sell_third",
    "explicit_pos_neg_forms",
    "explicit_composition_forms",
    "identity_report",
]


class Kind(str, enum.Enum):
    SQUARE = "square"
    SQUARE_POS = "square_pos"
    SQUARE_NEG = "square_neg"
    SELL = "sell"
    SELL_POS = "sell_pos"
    SELL_NEG = "sell_neg"
    POWER_ALPHA = "power_alpha"


_NEEDS_ELL = {Kind.SELL, Kind.SELL_POS, Kind.SELL_NEG}


@dataclass(frozen=True)
class EntropySpec:
    """Which entropy to use, plus its parameter (``ell`` or ``alpha``)."""

    kind: Kind
    ell: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ValueError(f"unknown entropy kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind in _NEEDS_ELL:
            if self.ell is None or not self.ell > 0:
                raise ValueError(f"{kind.value} needs ell > 0, got {self.ell!r}")
        if kind is Kind.POWER_ALPHA:
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError(f"power_alpha needs alpha in (0, 1), got {self.alpha!r}")

    @classmethod
    def square(cls):
        return cls(Kind.SQUARE)

    @classmethod
    def sell(cls, ell, part=None):
        kind = {None: Kind.SELL, "+": Kind.SELL_POS, "-": Kind.SELL_NEG}[part]
        return cls(kind, ell=ell)

    @classmethod
    def power(cls, alpha):
        return cls(Kind.POWER_ALPHA, alpha=alpha)


def _arr(v):
    return np.asarray(v, dtype=float)


def _out(x, like):
    return x if np.ndim(like) else float(x)


# --- S_ell and its derivatives --------------------------------------------

def sell(v, ell):
    """S_ell: v^2/2 for |v| <= ell, cubic blend up to 2 ell, then linear."""
    v = _arr(v)
    a = np.abs(v)
    out = np.select(
        [a <= ell, a < 2 * ell],
        [0.5 * v**2, -(a**3) / (6 * ell) + v**2 - 0.5 * ell * a + ell**2 / 6],
        default=1.5 * ell * a - 7.0 / 6.0 * ell**2,
    )
    return _out(out, v)


def sell_prime(v, ell):
    v = _arr(v)
    a = np.abs(v)
    sg = np.sign(v)
    out = np.select(
        [a <= ell, a < 2 * ell],
        [v, sg * (2 * a - v**2 / (2 * ell) - 0.5 * ell)],
        default=1.5 * sg * ell,
    )
    return _out(out, v)


def sell_second(v, ell):
    v = _arr(v)
    a = np.abs(v)
    out = np.select([a <= ell, a < 2 * ell], [np.ones_like(v), (2 * ell - a) / ell], default=0.0)
    return _out(out, v)


def sell_third(v, ell):
    """Weak third derivative (zero at the break points)."""
    v = _arr(v)
    a = np.abs(v)
    out = np.where((a > ell) & (a < 2 * ell), -np.sign(v) / ell, 0.0)
    return _out(out, v)


def _sell_antiderivative(v, ell):
    # odd in v since S_ell is even; integral from 0
    v = _arr(v)
    a = np.abs(v)
    lo = np.minimum(a, ell)
    mid = np.clip(a, ell, 2 * ell)
    hi = np.maximum(a, 2 * ell)
    part1 = lo**3 / 6
    part2 = (
        -(mid**4 - ell**4) / (24 * ell)
        + (mid**3 - ell**3) / 3
        - ell * (mid**2 - ell**2) / 4
        + ell**2 * (mid - ell) / 6
    )
    part3 = 0.75 * ell * (hi**2 - 4 * ell**2) - 7.0 / 6.0 * ell**2 * (hi - 2 * ell)
    return np.sign(v) * (part1 + part2 + part3)


# --- power-alpha entropy --------------------------------------------------

def power_alpha_bundle(alpha, v):
    """(S, S', S'') for S(v) = v (|v| + 1)^alpha, with sgn(0) = 0."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    v = _arr(v)
    a = np.abs(v)
    s0 = v * (a + 1) ** alpha
    s1 = (a + 1) ** alpha + alpha * a * (a + 1) ** (alpha - 1)
    s2 = alpha * np.sign(v) * (a + 1) ** (alpha - 2) * (2 + (alpha + 1) * a)
    return _out(s0, v), _out(s1, v), _out(s2, v)


def _power_antiderivative(v, alpha):
    # integrand is odd, so the primitive from 0 is even
    a = np.abs(_arr(v)) + 1.0
    return a ** (alpha + 2) / (alpha + 2) - a ** (alpha + 1) / (alpha + 1) - (
        1.0 / (alpha + 2) - 1.0 / (alpha + 1)
    )


# --- dispatch over EntropySpec ----------------------------------------------

def _part(kind, v):
    if kind in (Kind.SQUARE_POS, Kind.SELL_POS):
        return np.maximum(v, 0.0)
    if kind in (Kind.SQUARE_NEG, Kind.SELL_NEG):
        return np.minimum(v, 0.0)
    return v


def s(spec: EntropySpec, v):
    """Evaluate S(v) for the entropy described by ``spec``."""
    v = _arr(v)
    k = spec.kind
    if k is Kind.POWER_ALPHA:
        return power_alpha_bundle(spec.alpha, v)[0]
    w = _part(k, v)
    if k in _NEEDS_ELL:
        return _out(sell(w, spec.ell), v)
    return _out(0.5 * w**2, v)


def s_prime(spec: EntropySpec, v):
    v = _arr(v)
    k = spec.kind
    if k is Kind.POWER_ALPHA:
        return power_alpha_bundle(spec.alpha, v)[1]
    w = _part(k, v)
    if k in _NEEDS_ELL:
        return _out(sell_prime(w, spec.ell), v)
    return _out(w * 1.0, v)


def s_second(spec: EntropySpec, v):
    v = _arr(v)
    k = spec.kind
    if k is Kind.POWER_ALPHA:
        return power_alpha_bundle(spec.alpha, v)[2]
    if k is Kind.SQUARE:
        return _out(np.ones_like(v), v)
    w = _part(k, v)
    if k is Kind.SELL:
        return _out(sell_second(w, spec.ell), v)
    on = (np.abs(w) > 0).astype(float)
    if k in _NEEDS_ELL:
        return _out(sell_second(w, spec.ell) * on, v)
    return _out(on, v)


def h1(spec: EntropySpec, v):
    """3 S(v) - 2 S'(v) v."""
    v = _arr(v)
    return 3 * s(spec, v) - 2 * s_prime(spec, v) * v


def h2(spec: EntropySpec, v):
    """S(v) v - S'(v) v^2 / 2."""
    v = _arr(v)
    return s(spec, v) * v - 0.5 * s_prime(spec, v) * v**2


def h3(spec: EntropySpec, v):
    """S(v) - S'(v) v."""
    v = _arr(v)
    return s(spec, v) - s_prime(spec, v) * v


def antiderivative(spec: EntropySpec, v):
    """Primitive of S vanishing at 0, in closed form for every kind."""
    v = _arr(v)
    k = spec.kind
    if k is Kind.POWER_ALPHA:
        return _out(_power_antiderivative(v, spec.alpha), v)
    w = _part(k, v)
    if k in _NEEDS_ELL:
        return _out(_sell_antiderivative(w, spec.ell), v)
    return _out(w**3 / 6.0, v)


# --- beta(v) = S_ell(v_pm)' v ------------------------------------------------

def _sign_kind(sign):
    if sign in ("+", 1, +1.0):
        return Kind.SELL_POS
    if sign in ("-", -1, -1.0):
        return Kind.SELL_NEG
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def beta(ell, sign, v):
    """beta(v) = S_ell(v_pm)' v."""
    spec = EntropySpec(_sign_kind(sign), ell=ell)
    v = _arr(v)
    return _out(s_prime(spec, v) * v, v)


def beta_prime(ell, sign, v):
    """S''_ell(v_pm) 1{|v_pm|>0} v + S'_ell(v_pm)."""
    kind = _sign_kind(sign)
    v = _arr(v)
    w = _part(kind, v)
    on = (np.abs(w) > 0).astype(float)
    return _out(sell_second(w, ell) * on * v + sell_prime(w, ell), v)


def beta_second(ell, sign, v):
    """S'''_ell(v_pm) 1{|v_pm|>0} v + 2 S''_ell(v_pm) 1{|v_pm|>0}."""
    kind = _sign_kind(sign)
    v = _arr(v)
    w = _part(kind, v)
    on = (np.abs(w) > 0).astype(float)
    return _out(sell_third(w, ell) * on * v + 2 * sell_second(w, ell) * on, v)


# --- closed piecewise forms (independent transcription) ---------------------

def _ind(cond):
    return cond.astype(float)


def explicit_pos_neg_forms(ell, sign, v) -> dict[str, np.ndarray]:
    """Closed forms of S_ell(v_pm) and related maps, written with indicators.

    Keys: ``S``, ``dS``, ``d2S``, ``H3``, ``H1``, ``H2``, ``half_d2S_v2``.
    """
    v = _arr(v)
    L = float(ell)
    if _sign_kind(sign) is Kind.SELL_POS:
        vp = np.maximum(v, 0.0)
        mid = _ind((L < v) & (v < 2 * L))
        top = _ind(v >= 2 * L)
        return {
            "S": 0.5 * vp**2 - (v - L) ** 3 / (6 * L) * mid - (3 * v**2 - 9 * L * v + 7 * L**2) / 6 * top,
            "dS": vp - (v - L) ** 2 / (2 * L) * mid + 0.5 * (3 * L - 2 * v) * top,
            "d2S": _ind((0 < v) & (v < 2 * L)) - (v - L) / L * mid,
            "H3": -0.5 * vp**2 + (2 * v**3 - 3 * L * v**2 + L**3) / (6 * L) * mid
            + (3 * v**2 - 7 * L**2) / 6 * top,
            "H1": -0.5 * vp**2 + (v**3 - L * v**2 - L**2 * v + L**3) / (2 * L) * mid
            + 0.5 * (v**2 + 3 * L * v - 7 * L**2) * top,
            "H2": (v**4 - 3 * L**2 * v**2 + 2 * L**3 * v) / (12 * L) * mid
            + (9 * L * v**2 - 14 * L**2 * v) / 12 * top,
            "half_d2S_v2": 0.5 * vp**2 - v**2 * (v - L) / (2 * L) * mid - 0.5 * v**2 * top,
        }
    vm = np.minimum(v, 0.0)
    mid = _ind((-2 * L < v) & (v < -L))
    bot = _ind(v <= -2 * L)
    return {
        "S": 0.5 * vm**2 + (v + L) ** 3 / (6 * L) * mid - (3 * v**2 + 9 * L * v + 7 * L**2) / 6 * bot,
        "dS": vm + (v + L) ** 2 / (2 * L) * mid - 0.5 * (3 * L + 2 * v) * bot,
        "d2S": _ind((-2 * L < v) & (v < 0)) + (v + L) / L * mid,
        "H3": -0.5 * vm**2 + (-2 * v**3 - 3 * L * v**2 + L**3) / (6 * L) * mid
        + (3 * v**2 - 7 * L**2) / 6 * bot,
        "H1": -0.5 * vm**2 + (-(v**3) - L * v**2 + L**2 * v + L**3) / (2 * L) * mid
        + 0.5 * (v**2 - 3 * L * v - 7 * L**2) * bot,
        "H2": -(v**4 - 3 * L**2 * v**2 - 2 * L**3 * v) / (12 * L) * mid
        - (9 * L * v**2 + 14 * L**2 * v) / 12 * bot,
        "half_d2S_v2": 0.5 * vm**2 + v**2 * (v + L) / (2 * L) * mid - 0.5 * v**2 * bot,
    }


def explicit_composition_forms(ell, sign, v) -> dict[str, np.ndarray]:
    """Branch-on-|v_pm| forms of S(v_pm)', S(v_pm)'', H3, H1 and H2.

    The H-forms are written in terms of v_pm alone; they agree with the
    definitions in v because S_ell(v_pm)' v = S_ell(v_pm)' v_pm.
    """
    v = _arr(v)
    L = float(ell)
    w = np.maximum(v, 0.0) if _sign_kind(sign) is Kind.SELL_POS else np.minimum(v, 0.0)
    a = np.abs(w)
    lo, mid = a <= L, a < 2 * L
    return {
        "dS": sell_prime(w, L),
        "d2S": sell_second(w, L) * _ind(a > 0),
        "H3": np.select([lo, mid], [-0.5 * w**2, a**3 / (3 * L) - w**2 + L**2 / 6], default=-7.0 / 6.0 * L**2),
        "H1": np.select(
            [lo, mid],
            [-0.5 * w**2, a**3 / (2 * L) - w**2 - 0.5 * a * L + 0.5 * L**2],
            default=1.5 * L * a - 3.5 * L**2,
        ),
        "H2": np.select(
            [lo, mid],
            [np.zeros_like(w), a**3 * w / (12 * L) - 0.25 * a * w * L + w * L**2 / 6],
            default=0.75 * a * w * L - 7.0 / 6.0 * w * L**2,
        ),
    }


# --- identity report ----------------------------------------------------------

def identity_report(ells=(1.0, 2.0, 5.0, 10.0), step_fraction: float = 0.01) -> dict:
    """Compare every closed form with the compositional definitions.

    For each ell the v-grid is [-4 ell, 4 ell] with step ``step_fraction * ell``.
    Differences are scaled by max(1, |value|).  Returns, per ell, the largest
    scaled difference per formula plus the convexity and splitting checks.
    """
    out = {}
    for ell in ells:
        m = int(round(4.0 / step_fraction))
        v = np.arange(-m, m + 1) * (step_fraction * ell)
        errs = {}
        for sign in ("+", "-"):
            spec = EntropySpec.sell(ell, sign)
            comp = {
                "S": s(spec, v),
                "dS": s_prime(spec, v),
                "d2S": s_second(spec, v),
                "H3": h3(spec, v),
                "H1": h1(spec, v),
                "H2": h2(spec, v),
                "half_d2S_v2": 0.5 * s_second(spec, v) * v**2,
            }
            for label, forms in (("pos_neg", explicit_pos_neg_forms(ell, sign, v)),
                                 ("composition", explicit_composition_forms(ell, sign, v))):
                for key, val in forms.items():
                    ref = comp[key]
                    errs[f"{label}:{key}{sign}"] = float(np.max(np.abs(val - ref) / np.maximum(1.0, np.abs(ref))))
            b = beta(ell, sign, v)
            ref = comp["dS"] * v
            errs[f"beta{sign}"] = float(np.max(np.abs(b - ref) / np.maximum(1.0, np.abs(ref))))
        full = sell(v, ell)
        split = sell(np.maximum(v, 0), ell) + sell(np.minimum(v, 0), ell)
        out[float(ell)] = {
            "max_scaled_error": errs,
            "worst": max(errs.values()),
            "convex": bool(np.all(sell_second(v, ell) >= 0)),
            "splitting_exact": bool(np.array_equal(full, split)),
            "n_points": int(v.size),
        }
    return out
