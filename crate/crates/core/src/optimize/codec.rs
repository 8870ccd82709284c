//! Real parameter vectors for superposition fits: interleaved `(re, im)`
//! amplitudes followed by `ln t`.

use num_complex::Complex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeCodec {
    amplitudes: usize,
}

impl AmplitudeCodec {
    pub fn new(amplitudes: usize) -> Result<Self> {
        if amplitudes == 0 {
            return Err(Error::usage("codec needs at least one amplitude"));
        }
        Ok(Self { amplitudes })
    }

    /// `⌊N/2⌋ + 1` amplitudes.
    pub fn fixed_n(n: u32) -> Self {
        Self { amplitudes: (n / 2 + 1) as usize }
    }

    /// `(⌊N/2⌋ + 1)²` amplitudes.
    pub fn two_d(n: u32) -> Self {
        let s = (n / 2 + 1) as usize;
        Self { amplitudes: s * s }
    }

    pub fn amplitudes(&self) -> usize {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        2 * self.amplitudes + 1
    }

    pub fn encode(&self, alpha: &[Complex<f64>], t: f64) -> Result<Vec<f64>> {
        if alpha.len() != self.amplitudes {
            return Err(Error::usage(format!("expected {} amplitudes, got {}", self.amplitudes, alpha.len())));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::usage("exposure time must be positive"));
        }
        let mut out: Vec<f64> = alpha.iter().flat_map(|a| [a.re, a.im]).collect();
        out.push(t.ln());
        Ok(out)
    }

    /// Unit-norm amplitudes and exposure time.
    pub fn decode(&self, params: &[f64]) -> Result<(Vec<Complex<f64>>, f64)> {
        let mut alpha = Vec::with_capacity(self.amplitudes);
        self.decode_into(params, &mut alpha).map(|t| (alpha, t))
    }

    /// Allocation-free variant of [`decode`](Self::decode) for hot loops.
    pub fn decode_into(&self, params: &[f64], alpha: &mut Vec<Complex<f64>>) -> Result<f64> {
        if params.len() != self.dim() {
            return Err(Error::usage(format!("expected {} parameters, got {}", self.dim(), params.len())));
        }
        alpha.clear();
        alpha.extend(params[..2 * self.amplitudes].chunks_exact(2).map(|p| Complex::new(p[0], p[1])));
        let norm = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::usage("amplitude block cannot be normalized"));
        }
        for a in alpha.iter_mut() {
            *a /= norm;
        }
        Ok(params[2 * self.amplitudes].exp())
    }

    /// Box with `[-amp, amp]` per real component and the given `ln t` range.
    pub fn bounds(&self, amp: f64, log_t: (f64, f64)) -> Vec<(f64, f64)> {
        let mut b = vec![(-amp, amp); 2 * self.amplitudes];
        b.push(log_t);
        b
    }
}
