"""Localization error bounds for a bistatic underwater sensor pair that
senses with its communication waveforms.

The package computes Fisher information and square-root Cramer-Rao bounds
for the position and Doppler scaling of a moving target observed by two
ULA sensor nodes: passively (covariance-form information through a
fractional-delay operator) and through the target-reflected communication
signal (mean-form information), fused per measurement-availability case.
"""

from .scenario import (DegenerateGeometryError, ParamVector, Position2D, Scenario,
                       SensorNode, TargetState, bistatic_delay, doppler_scale,
                       intersensor_delay, k_derivatives, signal_param_gradients,
                       target_range)
from .noise import NoiseModel, ar1_covariance, ar1_precision, spatial_block_covariance
from .sonar import (Environment, active_snr_db, noise_level_db, passive_snr_db,
                    snr_db_to_signal_power, source_level_passive_db,
                    transmission_loss_db)
from .waveforms import (SampledWaveform, WaveformConfig, WbafResult, derivative,
                        evaluate_scaled_delayed, generate, load_waveform,
                        pcmfsk_like_config, save_waveform, spfsk_like_config, wbaf)
from .passive_fim import (ConditioningError, DelayOperator, PassiveCovariance,
                          build_delay_operator, delay_operator_derivative,
                          fim_passive, passive_covariance)
from .bistatic_fim import (BistaticJacobian, bistatic_jacobian, bistatic_mean,
                           fim_bistatic, received_amplitude)
from .crlb import CrlbResult, crlb, fuse, validate_fim
from .config import ConfigError, GridSpec, SweepConfig, load_config, parse_config
from .sweep import SweepResult, compare_waveforms, run_sweep
from .montecarlo import McInstance, McReport, mc_crlb_check, simulate_measurements

__version__ = "0.1.0"
