import pytest

from tracethresh.dist import DistributionSpec as D
from tracethresh.errors import InvalidConfig
from tracethresh.params import MUTUAL, ModelParams


def test_round_trip():
    p = ModelParams(lam=2.0, p=0.5, pi_r=0.8, pi_t=0.3, latent=D.gamma(1.0, 2.0), delay=D.exponential(0.7), N=50, m=2,
                    delay_coupling=MUTUAL)
    assert ModelParams.from_dict(p.to_dict()) == p
    assert hash(p) == hash(ModelParams.from_dict(p.to_dict()))


@pytest.mark.parametrize(
    "kw",
    [dict(lam=-1.0), dict(lam=1.0, p=1.5), dict(lam=1.0, pi_r=-0.1), dict(lam=1.0, N=0), dict(lam=1.0, m=0),
     dict(lam=1.0, delay_coupling="shared")],
)
def test_validation(kw):
    with pytest.raises(InvalidConfig):
        ModelParams(**kw)


def test_unknown_and_missing_keys():
    with pytest.raises(InvalidConfig, match="unknown"):
        ModelParams.from_dict({"lambda": 1.0, "gamma": 2.0})
    with pytest.raises(InvalidConfig, match="lambda"):
        ModelParams.from_dict({"p": 0.5})
