"""pulsekit: multi-site vital-sign signal processing.

Pipelines for camera and contact measurements of the cardiovascular pulse:
rPPG waveform extraction (CHROM/POS), multi-sensor contact-PPG fusion,
spectral pulse-rate estimation, pulse transit time via sliding
cross-correlation, respiration from PPG or chest motion, the accompanying
error metrics and hypothesis tests, and a seeded synthetic subject
generator for end-to-end verification.
"""

__version__ = "0.1.0"

from .core import (
    ChannelSet,
    HrSeries,
    LagSeries,
    TimeSeries,
    Window,
    align_pair,
    resample,
    sliding_windows,
    znormalize,
)
from .dsp import (
    BandpassSpec,
    FilterCoefficients,
    band_snr,
    bandpass,
    butterworth_bandpass,
    estimate_hr_series,
    filtfilt,
    hilbert_envelope,
)
from .errors import (
    AllChannelsDeadError,
    AllRejectedError,
    AllTiedError,
    DegenerateWindowError,
    FrameSizeMismatchError,
    GuideGapError,
    InsufficientDataError,
    InvalidBandError,
    MisalignedSeriesError,
    SampleTooSmallError,
    SignalTooShortError,
    ToolkitError,
    ValidationError,
    WidthExceedsLengthError,
    ZeroVarianceError,
)
from .flow import motion_from_frames
from .fusion import FusionConfig, GuideRate, fuse, fused_hr
from .metrics import HrErrorReport, hr_error_report, hr_errors, mxcorr, pearson, waveform_corr
from .ptt import PttConfig, PttSummary, ptt_site_analysis, ptt_summary, sliding_xcorr_lag
from .respiration import (
    MotionMatrix,
    RespConfig,
    ZcaResult,
    estimate_resp_rate,
    resp_from_motion,
    resp_from_ppg,
    zca_whiten,
)
from .rppg import RgbTrace, RppgConfig, chrom, extract, pos
from .stats import (
    TestResult,
    bartlett,
    bonferroni,
    kruskal_wallis,
    shapiro_wilk,
    wilcoxon_signed_rank,
)
from .synth import (
    AttackSpec,
    HEMOGLOBIN_RGB,
    NoiseSpec,
    RateProfile,
    SiteSpec,
    SubjectSpec,
    gen_contact_channels,
    gen_frame_sequence,
    gen_motion_matrix,
    gen_rgb_trace,
    truth_rate_series,
)
