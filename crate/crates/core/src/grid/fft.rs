//! Cached 1-d FFT plans plus strided line transforms.

use crate::C64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut map = PLANS.lock().unwrap();
    map.entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// In-place unnormalised forward DFT of one contiguous line.
pub fn forward(line: &mut [C64]) {
    plan(line.len(), true).process(line);
}

/// In-place inverse DFT of one contiguous line, normalised by `1/len`.
pub fn inverse(line: &mut [C64]) {
    let n = line.len();
    plan(n, false).process(line);
    let scale = 1.0 / n as f64;
    for v in line.iter_mut() {
        *v *= scale;
    }
}

/// Applies the 1-d transform along a strided axis of a flat buffer.
///
/// The axis has `len` entries at stride `stride`; `lines` enumerates the
/// base offsets of every line.
pub fn transform_strided(
    data: &mut [C64],
    bases: impl Iterator<Item = usize>,
    len: usize,
    stride: usize,
    fwd: bool,
) {
    let mut scratch = vec![C64::default(); len];
    for base in bases {
        for (i, s) in scratch.iter_mut().enumerate() {
            *s = data[base + i * stride];
        }
        if fwd {
            forward(&mut scratch);
        } else {
            inverse(&mut scratch);
        }
        for (i, s) in scratch.iter().enumerate() {
            data[base + i * stride] = *s;
        }
    }
}
