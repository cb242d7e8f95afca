import math

import numpy as np
from hypothesis import strategies as st

from rspsim import BellLabel, BlochVector, PureQubit, make_qubit

ALL_BELL_LABELS = tuple(BellLabel)


def random_qubit(rng: np.random.Generator) -> PureQubit:
    """Uniform pure state on the sphere (area-uniform polar angle)."""
    theta = math.acos(1.0 - 2.0 * rng.random())
    phi = 2.0 * math.pi * rng.random()
    return make_qubit(theta, phi)


def random_direction(rng: np.random.Generator) -> BlochVector:
    z = 1.0 - 2.0 * rng.random()
    phi = 2.0 * math.pi * rng.random()
    s = math.sqrt(max(0.0, 1.0 - z * z))
    return BlochVector(s * math.cos(phi), s * math.sin(phi), z)


thetas = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False)
phis = st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True,
                 allow_nan=False)
qubits = st.builds(make_qubit, thetas, phis)
