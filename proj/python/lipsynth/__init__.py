"""Lip-to-speech synthesis toolkit: DSP front-end, speech units, vocoder, metrics.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    AudioWaveform,
    LossBreakdown,
    LossWeights,
    MelSpectrogram,
    PitchConfig,
    ProsodyTrack,
    SpectrogramConfig,
    SpeechUnits,
    UnitCodebook,
    dtw_alignment,
    estoi,
    extract_f0,
    griffin_lim,
    load_codebook,
    mae_f0,
    mae_rmse,
    mcd_dtw_sl,
    mel_cepstra,
    mel_filterbank,
    mel_spectrogram,
    peak_normalize,
    quantization_distortion,
    quantize_units,
    read_wav,
    resample,
    rtf,
    save_codebook,
    secs,
    train_unit_quantizer,
    wer,
    weighted_total,
    write_wav,
)

__all__ = [
    "AudioWaveform",
    "LossBreakdown",
    "LossWeights",
    "MelSpectrogram",
    "PitchConfig",
    "ProsodyTrack",
    "SpectrogramConfig",
    "SpeechUnits",
    "UnitCodebook",
    "dtw_alignment",
    "estoi",
    "extract_f0",
    "griffin_lim",
    "load_codebook",
    "mae_f0",
    "mae_rmse",
    "mcd_dtw_sl",
    "mel_cepstra",
    "mel_filterbank",
    "mel_spectrogram",
    "peak_normalize",
    "quantization_distortion",
    "quantize_units",
    "read_wav",
    "resample",
    "rtf",
    "save_codebook",
    "secs",
    "train_unit_quantizer",
    "wer",
    "weighted_total",
    "write_wav",
]

__version__ = "0.1.0"
