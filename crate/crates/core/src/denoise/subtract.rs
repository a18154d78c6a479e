//! Magnitude-domain spectral subtraction with overlap-add
//! reconstruction.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::fft::{hann_periodic, FftPlan};
use crate::signal::SampledSignal;

/// Subtracts the averaged magnitude spectrum of a silent (noise-only)
/// sample from a signal, frame by frame.
///
/// Frames are Hann-windowed with hop `frame_len*(1-overlap)`; the hop
/// must divide the frame length so windowed frames tile to a constant.
/// Per frame, `|Y| = max(|X| - over_subtraction*mu, floor*|X|)` with
/// `mu` the frame-averaged magnitude spectrum of `silent`; phases are
/// kept from `X`. With a zero silent sample the round trip reproduces
/// the input to within 1e-6 relative error.
pub fn spectral_subtract(
    signal: &SampledSignal,
    silent: &SampledSignal,
    frame_len: usize,
    overlap: f64,
    floor: f64,
    over_subtraction: f64,
) -> Result<SampledSignal> {
    if (signal.fs - silent.fs).abs() > f64::EPSILON * signal.fs {
        return Err(Error::parameter(
            "silent",
            format!("sampling rates differ: {} vs {}", signal.fs, silent.fs),
        ));
    }
    if frame_len < 4 || !frame_len.is_power_of_two() {
        return Err(Error::parameter(
            "frame_len",
            format!("must be a power of two >= 4, got {frame_len}"),
        ));
    }
    if silent.len() < frame_len {
        return Err(Error::InsufficientData(format!(
            "silent sample has {} samples but one frame needs {frame_len}",
            silent.len()
        )));
    }
    if !(floor > 0.0 && floor < 1.0) || !(over_subtraction >= 0.0) {
        return Err(Error::parameter(
            "spectral_subtract",
            format!("floor {floor} or over_subtraction {over_subtraction} out of range"),
        ));
    }
    let hop_real = frame_len as f64 * (1.0 - overlap);
    let hop = hop_real.round() as usize;
    if hop == 0 || (hop_real - hop as f64).abs() > 1e-9 || frame_len % hop != 0 || hop == frame_len
    {
        return Err(Error::parameter(
            "overlap",
            format!("hop {hop_real} must be an integer divisor of the frame length"),
        ));
    }

    let window = hann_periodic(frame_len);
    let plan = FftPlan::new(frame_len);

    // Frame-averaged magnitude spectrum of the silent sample.
    let mut mu = vec![0.0f64; frame_len];
    let mut silent_frames = 0usize;
    let mut start = 0usize;
    let mut buf = vec![0.0f64; frame_len];
    while start + frame_len <= silent.len() {
        for (i, w) in window.iter().enumerate() {
            buf[i] = silent.samples[start + i] * w;
        }
        for (m, c) in mu.iter_mut().zip(plan.forward_real(&buf)) {
            *m += c.norm();
        }
        silent_frames += 1;
        start += hop;
    }
    let scale = over_subtraction / silent_frames as f64;
    for m in &mut mu {
        *m *= scale;
    }

    // Pad so every input sample is covered by a full set of overlapping
    // frames, process, overlap-add, then trim the padding back off. Full
    // window tiling starts frame_len - hop samples into the padding.
    let n = signal.len();
    let lead = frame_len - hop;
    let n_frames = (lead + n - 1) / hop + 1;
    let padded_len = (n_frames - 1) * hop + frame_len;
    let mut padded = vec![0.0f64; padded_len];
    padded[lead..lead + n].copy_from_slice(&signal.samples);

    let mut out = vec![0.0f64; padded_len];
    for frame in 0..n_frames {
        let s0 = frame * hop;
        for (i, w) in window.iter().enumerate() {
            buf[i] = padded[s0 + i] * w;
        }
        let mut spec = plan.forward_real(&buf);
        for (x, &m) in spec.iter_mut().zip(&mu) {
            let mag = x.norm();
            let target = (mag - m).max(floor * mag);
            if mag > 0.0 {
                *x *= target / mag;
            } else {
                *x = Complex::new(0.0, 0.0);
            }
        }
        let frame_out = plan.inverse(&spec);
        for (i, c) in frame_out.iter().enumerate() {
            out[s0 + i] += c.re;
        }
    }

    // The analysis windows tile to frame_len/(2*hop) everywhere in the
    // covered interior.
    let cola_sum = frame_len as f64 / (2.0 * hop as f64);
    let samples: Vec<f64> = out[lead..lead + n].iter().map(|v| v / cola_sum).collect();
    SampledSignal::new(samples, signal.fs)
}
