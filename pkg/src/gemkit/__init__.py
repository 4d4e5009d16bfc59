"""Duration, frequency and energy analysis of singleton and geminate consonants."""
from .classify import (ClassificationReport, GaussianModel, ThresholdResult, error_curve,
                       error_rate, fit_gaussian, heuristic_threshold, mlc_classify,
                       pep_threshold)
from .corpus_io import (SignalBuffer, TokenMeta, load_wav, parse_token_name, save_wav,
                        scan_corpus)
from .energy import EnergyParams, energy_params, frame_energy, segment_energy
from .errors import BadConfig, DataError, GemkitError
from .records import ParameterRecord, extract_token, read_records, write_records
from .segmentation import (Annotation, TimeParams, load_annotations, reference_frames,
                           save_annotations, time_params)
from .spectral import estimate_f0, estimate_formants, lpc_fit
from .stats import (anova_factorial, anova_oneway, anova_repeated, f_p_value, pearson,
                    spearman)
from .synth import (SynthSpec, generate_param_corpus, load_moments, synth_token_waveform,
                    write_synthetic_corpus)

__version__ = "0.1.0"
