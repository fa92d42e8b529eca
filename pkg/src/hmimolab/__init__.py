"""Coupling-aware multi-user MIMO downlink laboratory.

Builds sinc-coupled array models, composes random multipath channels with the
deterministic coupling/excitation chain, evaluates closed-form throughput
approximations for matched-filter precoding under three CSI levels, solves
max-min SINR beamforming through uplink-downlink duality, and cross-validates
everything against quadrature and Monte Carlo twins.
"""

from .config import (ArrayGeometry, SystemConfig, UserLayout,
                     build_array_geometry, equal_distance_layout,
                     place_users)
from .coupling import (CouplingModel, Spectrum, build_coupling_model,
                       correlation_matrix, coupling_matrix, excitation_phases,
                       hermitian_evd, spectral_sum, variance_sum)
from .channel import (ChannelRealization, corrupt_csi, draw_channel,
                      effective_channel, realize_channel)
from .throughput import (ExpApproxParams, GammaApproxParams, ThroughputResult,
                         bivariate_gamma_pdf, expected_sinr_full_csi,
                         expected_sinr_full_csi_quadrature,
                         fit_beam_gain_exponential, moment_match_gamma,
                         throughput_full_csi, throughput_no_csi,
                         throughput_partial_csi)
from .precoding import (Precoder, mf_precoder_full, mf_precoder_no_csi,
                        mf_precoder_partial, sample_equivalent_sinr,
                        sinr_per_user)
from .maxmin import BeamformerSolution, feasibility_check, maxmin_beamforming
from .mc import (McEstimate, empirical_moments, estimate_throughput_mc,
                 ks_two_sample, trial_rng)
from .specfun import (SeriesControl, SeriesError, exponential_integral_ei,
                      kummer_1f1, log_gamma, log_pochhammer,
                      signed_log_pochhammer, upper_incomplete_gamma_scaled)

__version__ = "0.1.0"
