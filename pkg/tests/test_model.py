import numpy as np
import pytest

from hlep.model import ModelError, ModeRate, TwoModeParams, make_system, two_mode_system, validate


def test_validate_enforces_hermitian_and_symmetric_parts():
    eps = np.array([[1.0, 0.5 + 1e-14j], [0.5, 2.0]])
    kap = np.array([[0.1, 0.2], [0.2 + 1e-14, 0.3]])
    s = make_system(eps, kap, [("damped", 1.0), ("amplified", 0.5)])
    assert np.array_equal(s.epsilon, s.epsilon.conj().T)
    assert np.array_equal(s.kappa, s.kappa.T)
    assert validate(s).epsilon.tolist() == s.epsilon.tolist()


@pytest.mark.parametrize(
    "eps,kap,msg",
    [
        ([[0, 1], [2, 0]], [[0, 0], [0, 0]], "Hermitian"),
        ([[0, 1], [1, 0]], [[0, 1], [0, 0]], "symmetric"),
        ([[0, 1, 0], [1, 0, 0], [0, 0, 0]], [[0, 0], [0, 0]], "2x2"),
    ],
)
def test_validate_rejects(eps, kap, msg):
    with pytest.raises(ModelError, match=msg):
        make_system(eps, kap, [("damped", 1.0), ("damped", 1.0)])


def test_rates():
    with pytest.raises(ModelError):
        ModeRate("lossy", 1.0)
    with pytest.raises(ModelError):
        ModeRate("damped", -1.0)
    s = make_system([[1.0]], [[0.0]], [{"kind": "amplified", "rate": 0.3}])
    assert not s.is_net_damped()
    assert s.amplification.tolist() == [0.3]


def test_system_is_readonly():
    s = make_system([[1.0]], [[0.0]], [("damped", 1.0)])
    with pytest.raises(ValueError):
        s.epsilon[0, 0] = 2.0


def test_two_mode_params():
    p = TwoModeParams(3.0, 1.0, 1.0, 0.75, 0.25)
    assert p.gamma_plus == 1.0 and p.gamma_minus == 0.5
    assert p.alpha == 1.25
    assert abs(p.beta - 0.75j) < 1e-15
    assert not p.balanced and TwoModeParams(1, 1, 1, 0, 0).balanced
    q, flipped = TwoModeParams(1, 0, 1, 0.3, -0.2).canonical()
    assert flipped and (q.kappa, q.g) == (-0.3, 0.2)
    with pytest.raises(ModelError):
        TwoModeParams(-1, 0, 1, 0, 0)
    with pytest.raises(ModelError):
        TwoModeParams(1, 0, float("nan"), 0, 0)


def test_two_mode_system_layout():
    s = two_mode_system(TwoModeParams(1.0, 0.5, 2.0, 0.4, 0.2))
    assert s.epsilon[0, 1] == 2.0 and s.epsilon[0, 0] == 0
    assert s.kappa[0, 1] == 0.2 and s.kappa[0, 0] == 0.1
    assert [r.kind for r in s.rates] == ["damped", "amplified"]
    d = s.to_dict()
    assert d["modes"] == 2 and d["rates"][1] == {"kind": "amplified", "rate": 0.5}
