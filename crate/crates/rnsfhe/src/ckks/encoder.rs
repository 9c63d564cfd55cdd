use std::f64::consts::PI;

use super::{CkksError, Result};

/// Canonical-embedding encoder for N/2 complex slots.
///
/// Slot `k` is the evaluation at `zeta^(5^k)` with `zeta = exp(i·pi/N)`.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    /// `5^k mod 2N` for each slot.
    rot_group: Vec<usize>,
    /// `exp(i·pi·t/N)` for `t` in `0..2N`.
    roots: Vec<(f64, f64)>,
}

impl Encoder {
    pub fn new(n: usize) -> Self {
        let two_n = 2 * n;
        let mut rot_group = Vec::with_capacity(n / 2);
        let mut g = 1usize;
        for _ in 0..n / 2 {
            rot_group.push(g);
            g = g * 5 % two_n;
        }
        let roots = (0..two_n).map(|t| {
            let a = PI * t as f64 / n as f64;
            (a.cos(), a.sin())
        });
        Self { n, rot_group, roots: roots.collect() }
    }

    pub fn slots(&self) -> usize {
        self.n / 2
    }

    /// Scaled, rounded integer coefficients of the polynomial whose slots are `values`.
    /// Missing slots are zero.
    pub fn encode(&self, values: &[(f64, f64)], scale: f64) -> Result<Vec<i64>> {
        if values.len() > self.slots() {
            return Err(CkksError::SlotOverflow { given: values.len(), capacity: self.slots() });
        }
        let two_n = 2 * self.n;
        let mut out = vec![0i64; self.n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &(re, im)) in values.iter().enumerate() {
                // Re(z · zeta_k^-j)
                let t = (two_n - (self.rot_group[k] * j) % two_n) % two_n;
                let (c, s) = self.roots[t];
                acc += re * c - im * s;
            }
            *o = (acc * 2.0 / self.n as f64 * scale).round() as i64;
        }
        Ok(out)
    }

    pub fn decode(&self, coeffs: &[f64], scale: f64) -> Vec<(f64, f64)> {
        let two_n = 2 * self.n;
        self.rot_group
            .iter()
            .map(|&g| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &m) in coeffs.iter().enumerate() {
                    let (c, s) = self.roots[(g * j) % two_n];
                    re += m * c;
                    im += m * s;
                }
                (re / scale, im / scale)
            })
            .collect()
    }
}
