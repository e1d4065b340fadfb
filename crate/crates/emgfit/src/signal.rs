//! Signal containers and windowing.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite sequence of zero-mean signal samples with sampling-rate metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalWindow {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub label: String,
}

impl SignalWindow {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, label: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::domain(
                "SignalWindow",
                format!("sample rate must be positive and finite, got {sample_rate_hz}"),
            ));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::domain("SignalWindow", format!("non-finite sample {bad}")));
        }
        Ok(Self { samples, sample_rate_hz, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn all_zero(&self) -> bool {
        self.samples.iter().all(|&x| x == 0.0)
    }

    /// Subtracts the empirical mean in place.
    pub fn subtract_mean(&mut self) {
        let mean = self.samples.iter().sum::<f64>() / self.samples.len() as f64;
        for x in &mut self.samples {
            *x -= mean;
        }
    }
}

/// Windowing mode for [`window_signal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// One window containing the final `length_s` seconds of the signal.
    Trailing,
    /// Strided windows from the start; a final partial window is discarded.
    Sliding,
}

/// Splits a signal into analysis windows.
pub fn window_signal(
    signal: &SignalWindow,
    length_s: f64,
    stride_s: f64,
    mode: WindowMode,
) -> Result<Vec<SignalWindow>> {
    let len = (length_s * signal.sample_rate_hz).round() as usize;
    if len < 2 {
        return Err(Error::domain(
            "window_signal",
            format!("window length of {length_s} s spans fewer than 2 samples"),
        ));
    }
    if signal.len() < len {
        return Err(Error::ShortSignal { available: signal.len(), required: len });
    }
    match mode {
        WindowMode::Trailing => {
            let start = signal.len() - len;
            Ok(vec![SignalWindow {
                samples: signal.samples[start..].to_vec(),
                sample_rate_hz: signal.sample_rate_hz,
                label: format!("{}[trailing {length_s}s]", signal.label),
            }])
        }
        WindowMode::Sliding => {
            let stride = (stride_s * signal.sample_rate_hz).round() as usize;
            if stride == 0 {
                return Err(Error::domain("window_signal", "stride spans zero samples".to_string()));
            }
            let mut out = Vec::new();
            let mut start = 0;
            let mut idx = 0;
            while start + len <= signal.len() {
                out.push(SignalWindow {
                    samples: signal.samples[start..start + len].to_vec(),
                    sample_rate_hz: signal.sample_rate_hz,
                    label: format!("{}[w{idx}]", signal.label),
                });
                start += stride;
                idx += 1;
            }
            Ok(out)
        }
    }
}
