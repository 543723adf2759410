import pytest

from levyfluct.model import ProcessSpec

# Canonical test family: a driftless Brownian spec (W_1 = sinh), the
# Cramer-Lundberg spec (c=2, unit-rate Exp jumps) and two mixture specs,
# one with positive and one with negative mean.
BM = ProcessSpec(drift=0.0, gaussian_sq=2.0)
CL = ProcessSpec(drift=2.0, gaussian_sq=0.0, jump_intensity=1.0,
                 jump_mixture=((1.0, 1.0),))
MIX_POS = ProcessSpec(drift=3.0, gaussian_sq=0.5, jump_intensity=1.0,
                      jump_mixture=((0.5, 1.0), (0.5, 3.0)))
MIX_NEG = ProcessSpec(drift=1.0, gaussian_sq=1.0, jump_intensity=2.0,
                      jump_mixture=((0.4, 2.0), (0.6, 0.5)))

TEST_FAMILY = [BM, CL, MIX_POS, MIX_NEG]


@pytest.fixture
def bm():
    return BM


@pytest.fixture
def cl():
    return CL
