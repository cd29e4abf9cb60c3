//! Complex transmission traces, the universal measurement record.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A frequency grid with complex S21 samples.
///
/// Frequencies are angular (rad/s) and strictly increasing. File formats
/// store Hz; conversion happens at the I/O boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    pub omega: Vec<f64>,
    pub s21: Vec<Complex64>,
}

impl ComplexTrace {
    pub fn new(omega: Vec<f64>, s21: Vec<Complex64>) -> Result<Self> {
        if omega.len() != s21.len() {
            return Err(Error::alignment(format!(
                "frequency grid has {} points but S21 has {}",
                omega.len(),
                s21.len()
            )));
        }
        if omega.is_empty() {
            return Err(Error::domain("empty trace"));
        }
        for w in omega.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(format!(
                    "frequency grid not strictly increasing at {:.6e} -> {:.6e}",
                    w[0], w[1]
                )));
            }
        }
        if omega.iter().any(|v| !v.is_finite())
            || s21.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::domain("trace contains non-finite values"));
        }
        Ok(Self { omega, s21 })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Index of the sample with minimal |S21|.
    pub fn argmin_magnitude(&self) -> usize {
        let mut best = 0;
        let mut best_mag = f64::INFINITY;
        for (i, s) in self.s21.iter().enumerate() {
            let m = s.norm();
            if m < best_mag {
                best_mag = m;
                best = i;
            }
        }
        best
    }

    /// Check that `other` shares this trace's frequency grid.
    pub fn same_grid(&self, other: &ComplexTrace) -> Result<()> {
        if self.omega.len() != other.omega.len()
            || self
                .omega
                .iter()
                .zip(&other.omega)
                .any(|(a, b)| (a - b).abs() > 1e-6 * a.abs().max(1.0))
        {
            return Err(Error::alignment(
                "reference trace grid does not match the measurement grid".to_string(),
            ));
        }
        Ok(())
    }

    /// Drop all samples within `half_width` of `center` (rad/s); used to cut
    /// a leaked pump tone out of a two-tone trace before fitting.
    pub fn without_band(&self, center: f64, half_width: f64) -> Result<ComplexTrace> {
        let (mut omega, mut s21) = (Vec::new(), Vec::new());
        for (&w, &s) in self.omega.iter().zip(&self.s21) {
            if (w - center).abs() > half_width {
                omega.push(w);
                s21.push(s);
            }
        }
        if omega.is_empty() {
            return Err(Error::domain(
                "guard band removed every sample of the trace".to_string(),
            ));
        }
        ComplexTrace::new(omega, s21)
    }

    /// Point-wise complex division, used for reference-background removal.
    pub fn divide(&self, reference: &ComplexTrace) -> Result<ComplexTrace> {
        self.same_grid(reference)?;
        let s21 = self
            .s21
            .iter()
            .zip(&reference.s21)
            .map(|(a, b)| a / b)
            .collect();
        ComplexTrace::new(self.omega.clone(), s21)
    }
}
