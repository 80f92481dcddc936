"""NV-centre nuclear polarisation simulator: sweeps, Floquet spectra and closed-form estimates."""

from ._core import (
    EffectiveSpinParams,
    Error,
    NuclearSpin,
    NumericalError,
    SpinRegister,
    ValidationError,
    blockade_shift,
    effective_params,
    flip_flop_rate,
    khz_to_rad_per_us,
    load_register,
    load_register_file,
    period_unitary,
    precession_frequency,
    reference_register,
    schedule,
    side_dips,
    single_spin_polarisation,
    spectrum,
    sweep,
)

__all__ = [
    "EffectiveSpinParams",
    "Error",
    "NuclearSpin",
    "NumericalError",
    "SpinRegister",
    "ValidationError",
    "blockade_shift",
    "effective_params",
    "flip_flop_rate",
    "khz_to_rad_per_us",
    "load_register",
    "load_register_file",
    "period_unitary",
    "precession_frequency",
    "reference_register",
    "schedule",
    "side_dips",
    "single_spin_polarisation",
    "spectrum",
    "sweep",
]
