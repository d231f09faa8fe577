"""Coupled double-cavity resonator that mimics electromagnetically induced
transparency: scattering matrix, intracavity fields, pulses, losses and the
cross-phase shift obtainable with a four-level EIT medium."""

from .device import (BeamSplitterSpec, DeviceParams, GeometrySpec, MirrorSpec, PRESETS,
                     load_config, preset, save_config, thin_plate_reflectivity, validate)
from .errors import (ConfigError, DegenerateWarning, NoSplitResonanceError,
                     NumericalGuardError, SingularityWarning, ValidationError, ValidityWarning)
from .spectral import (GMatrix, SpectralGrid, b_factor, delay_length, delay_time,
                       find_transmission_zeros, g_matrix, response_sweep,
                       single_cavity_response, splitting_estimate)
from .intracavity import SegmentAmplitudes, segment_amplitudes
from .pulse import (FieldRecord, PulseSpec, TimeGrid, energy_fractions,
                    gaussian_response_approx, output_centroid_delay, propagate_pulse)
from .loss import (absorption_expansion, ifm_fractions, loss_negligibility,
                   monochromatic_absorption, wavepacket_absorption)
from .xpm import (EitMediumParams, XpmReport, feasibility_report, phase_shift,
                  phase_shift_numeric, rubidium_medium, two_photon_probability)

__version__ = "0.1.0"
