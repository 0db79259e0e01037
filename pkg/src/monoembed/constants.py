"""The constant schedule driving the embedding argument.

Ratios of integers are kept as :class:`fractions.Fraction` so identities
such as ``xi * B == 1`` hold exactly. Only ``beta``, ``n0``, the ``C``
constants and edge probabilities are floats.

All logarithms are natural.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from .graphcore import ParameterError

DEFAULT_T0 = 64


class ScheduleError(ValueError):
    """An override or a derived value breaks a schedule invariant."""


def delta_bar(Delta: int) -> int:
    """Number of vertex classes allowed for the target: Delta^4 + Delta."""
    return Delta**4 + Delta


def cube_degree_bound(Delta: int) -> int:
    """Maximum degree of H^3 when H has maximum degree Delta."""
    return Delta**3 - Delta**2 + Delta


def beta_value(alpha: float, mu: float) -> float:
    """alpha^2 / (4 e^2) * e^(-8 / (alpha mu)); underflows to 0.0 for the theoretical mu."""
    return alpha**2 / (4 * math.e**2) * math.exp(-8.0 / (alpha * mu))


def beta_log(alpha: float, mu: float) -> float:
    """Natural log of :func:`beta_value`, finite even when beta underflows."""
    return 2 * math.log(alpha) - math.log(4) - 2 - 8.0 / (alpha * mu)


def _frac(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@dataclass(frozen=True)
class ConstantSchedule:
    Delta: int
    Delta_bar: int
    mu: Fraction
    alpha: Fraction
    eps_star: Fraction
    lam: int
    t0: int
    T0: int
    eps_chain: Tuple[Fraction, ...]
    eps: Fraction
    xi: Fraction
    gamma: Fraction
    B: Fraction
    beta: float
    beta_log: float
    C_congestion: Tuple[float, ...]
    C_dense: float
    n0: Optional[float] = None
    r: Optional[int] = None
    floor_frac: Fraction = Fraction(1)
    mode: str = "theoretical"
    flags: Tuple[str, ...] = ()
    deviations: Tuple[str, ...] = ()

    @property
    def eps0(self) -> Fraction:
        return self.eps_chain[0]

    def validate(self) -> None:
        chain = self.eps_chain
        if len(chain) != self.Delta_bar + 1:
            raise ScheduleError(f"eps_chain needs Delta_bar + 1 = {self.Delta_bar + 1} entries, got {len(chain)}")
        if not chain[0] > 0:
            raise ScheduleError("eps_0 must be positive")
        if any(a > b for a, b in zip(chain, chain[1:])):
            raise ScheduleError("eps_chain must be non-decreasing")
        if chain[-1] > self.eps_star:
            raise ScheduleError(f"eps_0 .. eps_Delta_bar must not exceed eps* = {self.eps_star} (got {chain[-1]})")
        if self.xi * self.B != 1:
            raise ScheduleError("xi * B must equal 1")
        if not 0 < self.floor_frac <= 1:
            raise ScheduleError("floor_frac must lie in (0, 1]")
        if self.t0 > self.T0:
            raise ScheduleError("t0 must not exceed T0")
        for name in ("mu", "alpha", "eps_star", "eps", "xi", "gamma", "B"):
            if not getattr(self, name) > 0:
                raise ScheduleError(f"{name} must be positive")
        if self.r is not None and self.r < 2:
            raise ScheduleError("r must be at least 2")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = [str(x) if isinstance(x, Fraction) else x for x in v]
            out[f.name] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ConstantSchedule":
        kw: Dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in d:
                continue
            v = d[f.name]
            if f.name in ("mu", "alpha", "eps_star", "eps", "xi", "gamma", "B", "floor_frac"):
                v = Fraction(v)
            elif f.name == "eps_chain":
                v = tuple(Fraction(x) for x in v)
            elif f.name in ("C_congestion", "flags", "deviations"):
                v = tuple(v)
            kw[f.name] = v
        sched = cls(**kw)
        sched.validate()
        return sched

    @classmethod
    def from_json(cls, text: str) -> "ConstantSchedule":
        return cls.from_dict(json.loads(text))


def _derived(Delta: int, T0: int, eps: Fraction) -> Dict[str, Any]:
    xi = Fraction(1, 6 * 4 ** (Delta + 1) * T0)
    gamma = (1 - eps) / (4 ** (Delta - 1) * T0)
    C_cong = tuple(((k + 2) / (3 * float(xi))) ** (1.0 / k) for k in range(1, Delta + 1))
    return dict(xi=xi, gamma=gamma, B=1 / xi, C_congestion=C_cong, C_dense=(4 / float(gamma)) ** (1.0 / Delta))


def _n0(N0: Optional[float], eta: Optional[float], B: Fraction, T0: int, eps: Fraction) -> Optional[float]:
    if N0 is None or eta is None:
        return None
    e = float(eps)
    return max(N0 / float(B), math.exp(1.0 / eta), math.exp(T0 / (e * (1 - e))))


def theoretical_schedule(Delta: int, T0: int = DEFAULT_T0, N0: Optional[float] = None,
                         eta: Optional[float] = None) -> ConstantSchedule:
    """Constants exactly as the embedding lemma fixes them.

    ``T0``, ``N0`` and ``eta`` come out of the regularity lemma, which does
    not give them explicitly, so the caller supplies them. The eps-chain is
    the constant chain eps_k = eps* (a valid but not recursively derived
    choice), flagged ``chain-unconstructible``.
    """
    if Delta < 2:
        raise ParameterError("Delta must be at least 2")
    if T0 < 1:
        raise ParameterError("T0 must be at least 1")
    if eta is not None and not 0 < eta <= 1:
        raise ParameterError("eta must lie in (0, 1]")
    mu = Fraction(1, 4 * Delta**2)
    alpha = Fraction(1, 3)
    eps_star = Fraction(1, 6 * Delta)
    Dbar = delta_bar(Delta)
    chain = tuple([eps_star] * (Dbar + 1))
    eps = chain[0] / 2
    d = _derived(Delta, T0, eps)
    flags = ["chain-unconstructible", "r-unknown"]
    if N0 is None or eta is None:
        flags.append("n0-needs-N0-eta")
    sched = ConstantSchedule(
        Delta=Delta, Delta_bar=Dbar, mu=mu, alpha=alpha, eps_star=eps_star, lam=2, t0=1, T0=T0,
        eps_chain=chain, eps=eps, beta=beta_value(float(alpha), float(mu)),
        beta_log=beta_log(float(alpha), float(mu)), n0=_n0(N0, eta, d["B"], T0, eps),
        flags=tuple(flags), **d,
    )
    sched.validate()
    return sched


OVERRIDABLE = ("T0", "t0", "eps0", "eps_star", "eps_chain", "mu", "Delta_bar", "r", "floor_frac", "N0", "eta")


def practical_schedule(Delta: int, overrides: Optional[Dict[str, Any]] = None) -> ConstantSchedule:
    """Theoretical schedule with desk-scale overrides applied.

    When ``eps0`` is overridden without an explicit ``eps_chain``, the chain
    interpolates linearly from eps0 to eps*. Every overridden key is listed
    in ``deviations``.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(OVERRIDABLE)
    if unknown:
        raise ScheduleError(f"cannot override {sorted(unknown)}; allowed: {OVERRIDABLE}")
    T0 = int(overrides.get("T0", DEFAULT_T0))
    base = theoretical_schedule(Delta, T0, overrides.get("N0"), overrides.get("eta"))
    deviations: List[str] = []
    for key in sorted(overrides):
        deviations.append(f"{key}={overrides[key]}")

    Dbar = int(overrides.get("Delta_bar", base.Delta_bar))
    eps_star = _frac(overrides.get("eps_star", base.eps_star))
    mu = _frac(overrides.get("mu", base.mu))
    if "eps_chain" in overrides:
        chain = tuple(_frac(x) for x in overrides["eps_chain"])
    else:
        eps0 = _frac(overrides.get("eps0", eps_star if "eps_star" in overrides else base.eps0))
        chain = tuple(eps0 + (eps_star - eps0) * Fraction(k, Dbar) for k in range(Dbar + 1))
    eps = chain[0] / 2
    d = _derived(Delta, T0, eps)
    flags = [f for f in base.flags if f != "r-unknown" or "r" not in overrides]
    sched = replace(
        base, Delta_bar=Dbar, eps_star=eps_star, mu=mu, eps_chain=chain, eps=eps,
        t0=int(overrides.get("t0", base.t0)), r=overrides.get("r"),
        floor_frac=_frac(overrides.get("floor_frac", base.floor_frac)),
        beta=beta_value(float(base.alpha), float(mu)), beta_log=beta_log(float(base.alpha), float(mu)),
        n0=_n0(overrides.get("N0"), overrides.get("eta"), d["B"], T0, eps),
        mode="practical", flags=tuple(flags), deviations=tuple(deviations), **d,
    )
    try:
        sched.validate()
    except ScheduleError as exc:
        raise ScheduleError(f"override rejected: {exc}") from None
    return sched


def load_schedule(spec: str) -> ConstantSchedule:
    """Resolve ``practical:<Delta>[,key=value...]``, ``theoretical:<Delta>`` or a JSON file path."""
    if spec.startswith(("practical:", "theoretical:")):
        kind, rest = spec.split(":", 1)
        head, *pairs = rest.split(",")
        Delta = int(head)
        if kind == "theoretical":
            return theoretical_schedule(Delta)
        ov: Dict[str, Any] = {}
        for pair in pairs:
            k, v = pair.split("=", 1)
            ov[k.strip()] = _parse_number(v.strip())
        return practical_schedule(Delta, ov)
    with open(spec) as fh:
        return ConstantSchedule.from_json(fh.read())


def _parse_number(v: str) -> Any:
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return Fraction(v)
    except ValueError:
        return float(v)


def edge_probability(N: int, C: float, Delta: int) -> Tuple[float, bool]:
    """p = C (ln N / N)^(1/Delta), clamped at 1. Returns ``(p, clamped)``."""
    if C <= 0:
        raise ParameterError("C must be positive")
    if N < 3:
        raise ParameterError("N must be at least 3")
    if Delta < 1:
        raise ParameterError("Delta must be at least 1")
    p = C * (math.log(N) / N) ** (1.0 / Delta)
    if p > 1:
        return 1.0, True
    return p, False
