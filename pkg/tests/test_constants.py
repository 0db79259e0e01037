import json
import math
from fractions import Fraction

import pytest

from monoembed.constants import (ConstantSchedule, ScheduleError, beta_log, cube_degree_bound, delta_bar,
                                 edge_probability, load_schedule, practical_schedule, theoretical_schedule)
from monoembed.graphcore import ParameterError


def test_theoretical_delta_two():
    s = theoretical_schedule(2, 64)
    assert s.mu == Fraction(1, 16) and s.alpha == Fraction(1, 3) and s.eps_star == Fraction(1, 12)
    assert s.Delta_bar == 18
    assert s.xi == Fraction(1, 24576) and s.B == 24576
    assert s.lam == 2 and s.t0 == 1
    assert "chain-unconstructible" in s.flags
    assert all(e == s.eps_star for e in s.eps_chain) and s.eps == s.eps_star / 2
    assert s.n0 is None


def test_beta_exponent():
    s = theoretical_schedule(2, 64)
    assert 8 / (s.alpha * s.mu) == 384
    expected = math.log((1 / 9) / (4 * math.e**2)) - 384
    assert s.beta_log == pytest.approx(expected)
    assert s.beta == 0.0 or math.log(s.beta) == pytest.approx(expected)
    assert beta_log(0.5, 0.5) == pytest.approx(math.log(0.25 / (4 * math.e**2)) - 32)


def test_theoretical_delta_three():
    s = theoretical_schedule(3, 64)
    assert s.Delta_bar == 84 and s.xi == Fraction(1, 98304)


@pytest.mark.parametrize("Delta", [2, 3, 4])
@pytest.mark.parametrize("T0", [8, 64])
def test_exact_identities(Delta, T0):
    s = theoretical_schedule(Delta, T0)
    assert s.xi * s.B == 1
    assert s.gamma * 4 ** (Delta - 1) * T0 == 1 - s.eps
    assert isinstance(s.gamma, Fraction)


@pytest.mark.parametrize("Delta", range(2, 11))
def test_delta_bar_identity(Delta):
    assert delta_bar(Delta) == cube_degree_bound(Delta) * (Delta + 1)


def test_derived_constants():
    s = theoretical_schedule(2, 8)
    for k, C in enumerate(s.C_congestion, 1):
        assert C**k == pytest.approx((k + 2) / (3 * float(s.xi)))
    assert s.C_dense == pytest.approx((4 / float(s.gamma)) ** 0.5)
    t = theoretical_schedule(2, 8, N0=1e6, eta=0.5)
    e = float(t.eps)
    assert t.n0 == pytest.approx(max(1e6 / float(t.B), math.exp(2), math.exp(8 / (e * (1 - e)))))


def test_theoretical_errors():
    with pytest.raises(ParameterError):
        theoretical_schedule(1)
    with pytest.raises(ParameterError):
        theoretical_schedule(2, 0)
    with pytest.raises(ParameterError):
        theoretical_schedule(2, 8, N0=10, eta=1.5)


def test_practical_without_overrides_matches_theory():
    a, b = practical_schedule(2), theoretical_schedule(2)
    for name in ConstantSchedule.__dataclass_fields__:
        if name not in ("mode",):
            assert getattr(a, name) == getattr(b, name), name
    assert a.mode == "practical" and b.mode == "theoretical"


def test_practical_overrides():
    s = practical_schedule(2, {"T0": 8, "eps0": Fraction(1, 5), "eps_star": Fraction(3, 10)})
    assert s.xi == Fraction(1, 3072) and s.B == 3072
    assert s.eps0 == Fraction(1, 5) and s.eps_chain[-1] == Fraction(3, 10) and s.eps == Fraction(1, 10)
    assert list(s.eps_chain) == sorted(s.eps_chain)
    assert "T0=8" in s.deviations and s.mode == "practical"


def test_practical_rejections():
    with pytest.raises(ScheduleError):
        practical_schedule(2, {"eps0": 0.25})
    assert practical_schedule(2, {"eps0": 0.25, "eps_star": 0.25}).eps0 == Fraction(1, 4)
    with pytest.raises(ScheduleError):
        practical_schedule(2, {"eps_chain": [0.05] + [0.04] * 18})
    with pytest.raises(ScheduleError):
        practical_schedule(2, {"floor_frac": 0})
    with pytest.raises(ScheduleError):
        practical_schedule(2, {"lam": 3})


def test_serialization_round_trip(tmp_path):
    for s in (theoretical_schedule(3, 8), practical_schedule(2, {"T0": 8, "eps0": 0.2, "eps_star": 0.3, "r": 5})):
        back = ConstantSchedule.from_json(s.to_json())
        assert back == s
        assert json.loads(s.to_json())["xi"] == str(s.xi)
        path = tmp_path / "s.json"
        path.write_text(s.to_json())
        assert load_schedule(str(path)) == s


def test_load_schedule_specs():
    s = load_schedule("practical:2,T0=8,t0=4,eps0=0.8,eps_star=0.8,floor_frac=0.5")
    assert s.eps0 == Fraction(4, 5) and s.floor_frac == Fraction(1, 2) and s.t0 == 4
    assert load_schedule("theoretical:3") == theoretical_schedule(3)


def test_edge_probability():
    p, clamped = edge_probability(100, 1.0, 1)
    assert p == pytest.approx(0.04605, abs=5e-6) and not clamped
    p, clamped = edge_probability(1000, 1.0, 2)
    assert p == pytest.approx(0.08311, abs=5e-6)
    assert edge_probability(1000, 1e6, 2) == (1.0, True)
    with pytest.raises(ParameterError):
        edge_probability(100, 0.0, 2)
