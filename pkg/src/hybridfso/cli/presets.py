"""Sweeps that regenerate the four published performance figures.

All presets use equal RF and FSO average SNRs on a 0..30 dB grid in 5 dB
steps, eta = 1, C = 1, kappa = 1 and a 10 dB outage threshold. The user
counts {1, 2, 4} of the multiuser figures are a preset choice.
"""

from __future__ import annotations

from ..analytic import Scheme, SystemConfig
from ..errors import ConfigError
from .config import REGIMES, Base, Metric, Mode, SweepSpec, SweepVariable

__all__ = ["PRESETS", "figure_preset", "PRESET_GRID_DB"]

PRESET_GRID_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
PRESET_TRIALS = 10 ** 6
GAMMA_TH_DB = 10.0
MULTIUSER = (1, 2, 4)

# name -> (metric, regimes, user counts, description)
PRESETS = {
    "fig2": (Metric.OUTAGE, ("moderate", "strong"), (2,), "outage vs average SNR, both regimes, N = 2"),
    "fig3": (Metric.OUTAGE, ("moderate",), MULTIUSER, "outage vs average SNR, moderate regime, several N"),
    "fig4": (Metric.BER, ("moderate",), MULTIUSER, "DPSK BER vs average SNR, moderate regime, several N"),
    "fig5": (Metric.BER, ("moderate", "strong"), (2,), "DPSK BER vs average SNR, both regimes, N = 2"),
}


def figure_preset(name: str) -> SweepSpec:
    """The fully populated SweepSpec of a figure preset."""
    key = str(name).lower()
    if key not in PRESETS:
        raise ConfigError(f"unknown figure preset {name!r} (expected one of {', '.join(PRESETS)})")
    metric, regimes, users, description = PRESETS[key]
    th = 10.0 ** (GAMMA_TH_DB / 10.0)
    bases = []
    for scheme in (Scheme.KNOWN_CSI_DF, Scheme.UNKNOWN_CSI_AF):
        for regime in regimes:
            for n in users:
                cfg = SystemConfig(scheme, n, 1.0, 1.0, th, REGIMES[regime])
                bases.append(Base(cfg, 0.0, GAMMA_TH_DB, regime))
    notes = [f"preset {key}: {description}"]
    if len(users) > 1:
        notes.append("user counts N = 1, 2, 4 are a preset choice")
    return SweepSpec(
        bases=tuple(bases),
        sweep_variable=SweepVariable.GAMMA_AVG_DB,
        sweep_values=PRESET_GRID_DB,
        metrics=(metric,),
        mode=Mode.BOTH,
        trials=PRESET_TRIALS,
        seed=0,
        preset=key,
        notes=tuple(notes),
    )
