//! Radix-2 complex FFT. Grid sizes are powers of two, so one iterative
//! Cooley–Tukey kernel covers every axis length we need.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

pub(crate) struct FftPlan {
    len: usize,
    // exp(-2πik/len) for k < len/2, each evaluated directly (no recurrence)
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl core::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish_non_exhaustive()
    }
}

impl FftPlan {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len.is_power_of_two() && len >= 2);
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * PI * (k as f64) / (len as f64);
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Unnormalized in-place transform. `inverse` flips the exponent sign.
    pub(crate) fn process(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len);
        for i in 0..self.len {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.len {
            let stride = self.len / (2 * half);
            for start in (0..self.len).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}
