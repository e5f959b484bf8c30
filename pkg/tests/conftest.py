import sys
from pathlib import Path

import pytest

from sqcontrol import NoiseParams

sys.path.insert(0, str(Path(__file__).parent))

# high-precision minimizer of the asymptotic cost, frozen as a reference
THETA_STAR = 1.5005479603305965
H_STAR = 1.254214386483525


@pytest.fixture
def fig1_params() -> NoiseParams:
    """The standard desk-scale parameter point used throughout."""
    return NoiseParams(gamma_up=1.0, gamma_down=1.0, kappa=0.2, big_k=20.0)
