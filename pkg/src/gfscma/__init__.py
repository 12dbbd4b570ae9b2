"""Link-level simulator for uplink grant-free SCMA.

Receiver chains: one-step (activity detection then decoding, optionally with
joint zero-codeword activity testing) and two-step (adds a norm-threshold
refinement of the candidate list between channel estimation and decoding).
"""

from .channel import TdlProfile, add_awgn, freq_response, get_profile, sample_realization
from .codebooks import (Codebook, CodewordStream, FactorGraph, build_factor_graph,
                        default_codebooks, encode, load_codebook_file)
from .config import SimConfig
from .decoder import DecodeResult, DecoderInput, Survivor, complexity_count, jmpa_decode, mpa_decode
from .detection import ActivityEstimate, FocussParams, detect_activity, focuss, threshold_aud
from .chanest import build_freq_prior, estimate_channels, extrapolate_data_gains
from .metrics import TrialMetrics, compute_metrics
from .pilots import PilotPool, build_pilot_pool, pilot_matrix, zc_sequence
from .refine import RefinedList, ThresholdCurve, calibrate_threshold, f_value, raud_filter
from .simulate import (build_setup, experiment_false_alarm_injection, experiment_histograms,
                       run_sweep, run_trial)
from .uplink import ReceivedFrame, Scenario, draw_scenario, synth_data_rx, synth_pilot_rx

__version__ = "0.1.0"
