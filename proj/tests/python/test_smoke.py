import math

import numpy as np
import pytest

import lipsynth as ls


def make_sine(freq=220.0, seconds=1.0, rate=16000, amp=0.6):
    t = np.arange(int(seconds * rate)) / rate
    return ls.AudioWaveform(amp * np.sin(2 * math.pi * freq * t), rate)


def test_loss_identity():
    b = ls.weighted_total(1.0, 1.0, 1.0, 1.0, ls.LossWeights())
    assert b.l_total == pytest.approx(100.21, abs=1e-12)
    w = ls.LossWeights()
    w.lambda_m, w.lambda_p, w.lambda_e, w.lambda_u = 2.0, 3.0, 5.0, 7.0
    assert ls.weighted_total(1.0, 1.0, 1.0, 1.0, w).l_total == pytest.approx(17.0)


def test_wer_and_rtf():
    assert ls.wer(["a", "b", "c"], ["a", "x", "c"]) == pytest.approx(1 / 3)
    assert ls.rtf(2.0, 0.126) == pytest.approx(0.063)
    with pytest.raises(RuntimeError, match="empty reference"):
        ls.wer([], ["a"])


def test_waveform_roundtrip(tmp_path):
    wav = make_sine()
    assert wav.duration_seconds() == pytest.approx(1.0)
    ls.peak_normalize(wav, 0.8)
    assert np.abs(wav.samples).max() == pytest.approx(0.8)

    path = str(tmp_path / "tone.wav")
    ls.write_wav(path, wav)
    back = ls.read_wav(path)
    assert back.rate == 16000
    assert len(back) == len(wav)
    assert np.abs(back.samples - wav.samples).max() < 1e-3  # 16-bit quantization


def test_mel_and_f0():
    wav = make_sine(freq=220.0)
    mel = ls.mel_spectrogram(wav)
    assert mel.frames.shape == (101, 80)  # 1 s at 10 ms hop, centered
    assert mel.num_bands() == 80

    track = ls.extract_f0(wav)
    voiced = track.f0_hz[track.voiced]
    assert voiced.size > track.num_frames() / 2
    assert np.all(np.abs(voiced - 220.0) < 220.0 * 0.05)


def test_griffin_lim_recovers_pitch():
    wav = make_sine(freq=220.0)
    mel = ls.mel_spectrogram(wav)
    out = ls.griffin_lim(mel.frames, iterations=30, seed=7)
    assert out.rate == 16000
    track = ls.extract_f0(out)
    voiced = track.f0_hz[track.voiced]
    assert voiced.size > 0
    assert abs(np.median(voiced) - 220.0) < 220.0 * 0.1


def test_metrics_identity():
    wav = make_sine(freq=180.0, seconds=1.2)
    assert ls.estoi(wav, wav) == pytest.approx(1.0, abs=1e-6)
    assert ls.mcd_dtw_sl(wav, wav) <= 1e-12
    assert ls.mae_f0(wav, wav) == pytest.approx(0.0, abs=1e-9)
    assert ls.mae_rmse(wav, wav) == pytest.approx(0.0, abs=1e-12)
    assert ls.secs(wav, wav, seed=3, dim=64) == pytest.approx(1.0, abs=1e-9)


def test_dtw_hand_case():
    total, steps = ls.dtw_alignment(np.array([[0.0, 10.0], [10.0, 1.0]]))
    assert total == pytest.approx(1.0)
    assert steps == 2


def test_unit_quantizer(tmp_path):
    rng = np.random.default_rng(11)
    blob_a = rng.normal(0.0, 0.05, size=(40, 3))
    blob_b = rng.normal(4.0, 0.05, size=(40, 3))
    feats = np.vstack([blob_a, blob_b])

    book = ls.train_unit_quantizer([feats], k=2, seed=5)
    assert book.clusters() == 2
    assert book.feature_dim() == 3

    units = ls.quantize_units(feats, book)
    ids = np.asarray(units.ids)
    assert units.rate == pytest.approx(50.0)
    assert len(set(ids[:40])) == 1 and len(set(ids[40:])) == 1
    assert ids[0] != ids[40]
    assert ls.quantization_distortion(feats, book) < 0.1

    path = str(tmp_path / "units.codebook")
    ls.save_codebook(path, book)
    loaded = ls.load_codebook(path)
    assert np.array_equal(loaded.centroids, book.centroids)

    with pytest.raises(ValueError):
        ls.train_unit_quantizer([feats[:3]], k=5, seed=1)
