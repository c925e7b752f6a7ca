"""Shared parameter sets for the test suite.

Two scatter configurations (one per bath model), the valve grid setup, and
the boost window setup. Kept as plain dicts so tests can override fields.
"""

from triqubit import ModelParams

# weak-damping harmonic setup: random fields drawn from (0, 1)
GLOBAL_SCATTER = dict(
    J=(5.49e-4, 2.960e-4, 4.963e-4),
    Delta=(7.93e-4, 9.67e-4, 1.69e-4),
    gamma=(8.71e-7, 5.76e-7, 7.56e-7),
    T=(1.0, 2.0, 3.0),
)

# strong-coupling repeated-interaction setup: random fields and rates
LOCAL_SCATTER = dict(
    J=(0.981, 0.775, 0.757),
    Delta=(0.124, 0.256, 0.611),
    T=(1.0, 2.0, 3.0),
)

# heat-valve grid: B2 is the knob, everything else pinned
VALVE = dict(
    J=(0.407, 0.322, 0.243),
    Delta=(0.631, 0.705, 0.476),
    B1=0.4,
    B3=1.6,
    gamma=(1e-6, 1e-6, 1e-6),
    T=(1.0, 2.0, 3.0),
)

# composite-refrigerator window scan
BOOST = dict(
    J=LOCAL_SCATTER["J"],
    Delta=LOCAL_SCATTER["Delta"],
    B1=1.31,
    B3=3.57,
    gamma=(0.645, 0.780, 0.934),
    T=(1.0, 2.0, 3.0),
)

# pinned master seed for every deterministic sweep in the suite
MASTER_SEED = 20260819


def local_point(B, gamma=(0.5, 0.5, 0.5), **overrides) -> ModelParams:
    kw = dict(LOCAL_SCATTER, B=B, gamma=gamma, bath_model="repeated_interaction")
    kw.update(overrides)
    return ModelParams(**kw)


def global_point(B, **overrides) -> ModelParams:
    kw = dict(GLOBAL_SCATTER, B=B, bath_model="harmonic")
    kw.update(overrides)
    return ModelParams(**kw)
