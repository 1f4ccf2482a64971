//! Symbol alphabets.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite constellation with Gray bit labels, scaled to a fixed average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    bits_per_symbol: u32,
}

impl Constellation {
    /// QPSK, `{(±1 ± j)/√2}`, unit average energy.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            name: "qpsk".into(),
            points: vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(-a, -a),
                Complex64::new(a, -a),
            ],
            labels: vec![0b00, 0b01, 0b11, 0b10],
            bits_per_symbol: 2,
        }
    }

    /// BPSK, `{±1}`.
    pub fn bpsk() -> Self {
        Self {
            name: "bpsk".into(),
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            labels: vec![0, 1],
            bits_per_symbol: 1,
        }
    }

    /// Square 16-QAM with unit average energy.
    pub fn qam16() -> Self {
        let gray = [0u32, 1, 3, 2];
        let norm = 1.0 / 10f64.sqrt();
        let mut points = Vec::with_capacity(16);
        let mut labels = Vec::with_capacity(16);
        for (i, gi) in gray.iter().enumerate() {
            for (q, gq) in gray.iter().enumerate() {
                points.push(Complex64::new(
                    (2.0 * i as f64 - 3.0) * norm,
                    (2.0 * q as f64 - 3.0) * norm,
                ));
                labels.push((gi << 2) | gq);
            }
        }
        Self {
            name: "16qam".into(),
            points,
            labels,
            bits_per_symbol: 4,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::qpsk()),
            "bpsk" => Ok(Self::bpsk()),
            "16qam" | "qam16" => Ok(Self::qam16()),
            _ => Err(Error::UnknownConstellation(name.to_string())),
        }
    }

    /// Rescales the alphabet so its average energy equals `energy`.
    pub fn with_energy(mut self, energy: f64) -> Self {
        let scale = (energy / self.average_energy()).sqrt();
        self.points.iter_mut().for_each(|p| *p *= scale);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Maps symbol indices to points.
    pub fn map(&self, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().map(|&i| self.points[i]).collect()
    }

    /// Index of the nearest point (lowest index on ties).
    pub fn slice(&self, value: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let dist = (value - p).norm_sqr();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        best
    }
}
