//! Tight-binding operators for the chain with a position-dependent mass.
//!
//! Sites are indexed `j = 1..=N` with lattice spacing and hopping energy set
//! to one. Three operators are built from a [`ChainSpec`]:
//!
//! * `H0`: the uniform chain, zero on-site energy and hopping `-1`.
//! * `H1`: the mass-gradient part, on-site `2γj` and hopping `γ(j + 1/2)`.
//! * `H`: the full operator. The canonical form has on-site `2γj` and hopping
//!   `-(1 + γ(j + 1/2))`, whose eigenproblem is the three-term recurrence
//!
//!   `(γ(j+½)+1) b_{j+1} + (γ(j−½)+1) b_{j−1} = (2γj − E) b_j`, `b_0 = b_{N+1} = 0`.
//!
//!   The literal entrywise sum `H0 + H1` (hopping `γ(j + 1/2) − 1`) is kept
//!   as [`Variant::LiteralSum`] for comparison only.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the full operator's hopping is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Hopping `-(1 + γ(j + 1/2))`, matching the recurrence above.
    #[default]
    Canonical,
    /// Entrywise sum of `H0` and `H1`: hopping `γ(j + 1/2) - 1`.
    LiteralSum,
}

/// `γ = c · N^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaScaling {
    pub c: f64,
    pub alpha: f64,
}

impl GammaScaling {
    pub fn gamma_for(&self, n_sites: usize) -> f64 {
        self.c * (n_sites as f64).powf(-self.alpha)
    }
}

/// A physical chain instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    gamma: f64,
    scaling: Option<GammaScaling>,
    variant: Variant,
}

impl ChainSpec {
    pub fn new(n_sites: usize, gamma: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSpec("n_sites must be at least 1".into()));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        Ok(Self {
            n_sites,
            gamma,
            scaling: None,
            variant: Variant::Canonical,
        })
    }

    /// Builds a spec with `γ = c · N^(-alpha)`, evaluated once here.
    pub fn scaled(n_sites: usize, c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSpec(format!("scaling c must be positive, got {c}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "scaling alpha must be non-negative, got {alpha}"
            )));
        }
        let scaling = GammaScaling { c, alpha };
        let mut spec = Self::new(n_sites, scaling.gamma_for(n_sites.max(1)))?;
        spec.scaling = Some(scaling);
        Ok(spec)
    }

    /// Builds a spec at fixed product `γN`.
    pub fn with_gamma_n(n_sites: usize, gamma_n: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSpec("n_sites must be at least 1".into()));
        }
        if gamma_n == 0.0 {
            return Self::new(n_sites, 0.0);
        }
        Self::scaled(n_sites, gamma_n, 1.0)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scaling(&self) -> Option<GammaScaling> {
        self.scaling
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma * self.n_sites as f64
    }
}

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
///
/// `off[j]` couples sites `j` and `j + 1` (zero-based) in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidOperator("diagonal must be non-empty".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::InvalidOperator(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidOperator("entries must be finite".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Leading `m × m` principal block.
    pub fn leading_block(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidArgument(format!(
                "block size {m} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            diag: self.diag[..m].to_vec(),
            off: self.off[..m - 1].to_vec(),
        })
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len(), "vector length mismatch");
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for j in 0..n - 1 {
            y[j] += self.off[j] * x[j + 1];
            y[j + 1] += self.off[j] * x[j];
        }
        y
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Negates every off-diagonal entry. This is the similarity by
    /// `diag(1, -1, 1, ...)`, so the spectrum is unchanged and eigenvector
    /// amplitudes only change sign.
    pub fn gauge_flip(&self) -> Self {
        Self {
            diag: self.diag.clone(),
            off: self.off.iter().map(|x| -x).collect(),
        }
    }

    /// Gershgorin enclosure `(lower, upper)` of the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for j in 0..n {
            let left = if j > 0 { self.off[j - 1].abs() } else { 0.0 };
            let right = if j + 1 < n { self.off[j].abs() } else { 0.0 };
            let radius = left + right;
            lower = lower.min(self.diag[j] - radius);
            upper = upper.max(self.diag[j] + radius);
        }
        (lower, upper)
    }

    /// Gershgorin upper minus lower bound; used as the scale for tolerances.
    pub fn spectral_width(&self) -> f64 {
        let (lo, hi) = self.gershgorin_bounds();
        hi - lo
    }

    /// Debug dump: one line per site, `j,diag,off`, with `off` empty on the
    /// last line. Sites are numbered from 1.
    pub fn dump(&self) -> String {
        let mut out = String::from("j,diag,off\n");
        for (j, d) in self.diag.iter().enumerate() {
            match self.off.get(j) {
                Some(o) => writeln!(out, "{},{},{}", j + 1, fmt_num(*d), fmt_num(*o)),
                None => writeln!(out, "{},{},", j + 1, fmt_num(*d)),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_dump<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.dump().as_bytes())
    }
}

fn fmt_num(x: f64) -> String {
    crate::format::sig17(x)
}

/// `H0`: zero on-site energy, hopping `-1`.
pub fn build_h0(spec: &ChainSpec) -> TridiagonalOperator {
    let n = spec.n_sites();
    TridiagonalOperator {
        diag: vec![0.0; n],
        off: vec![-1.0; n - 1],
    }
}

/// `H1`: on-site `2γj`, hopping `γ(j + 1/2)`.
pub fn build_h1(spec: &ChainSpec) -> TridiagonalOperator {
    let n = spec.n_sites();
    let g = spec.gamma();
    TridiagonalOperator {
        diag: (1..=n).map(|j| 2.0 * g * j as f64).collect(),
        off: (1..n).map(|j| g * (j as f64 + 0.5)).collect(),
    }
}

/// Full operator according to the spec's [`Variant`].
pub fn build_full(spec: &ChainSpec) -> TridiagonalOperator {
    let n = spec.n_sites();
    let g = spec.gamma();
    let off = match spec.variant() {
        Variant::Canonical => (1..n).map(|j| -(1.0 + g * (j as f64 + 0.5))).collect(),
        Variant::LiteralSum => (1..n).map(|j| g * (j as f64 + 0.5) - 1.0).collect(),
    };
    TridiagonalOperator {
        diag: (1..=n).map(|j| 2.0 * g * j as f64).collect(),
        off,
    }
}

/// Relative residual of the three-term recurrence `H b = E b` with
/// `b_0 = b_{N+1} = 0`:
///
/// `max_j |off[j-1] b_{j-1} + diag[j] b_j + off[j] b_{j+1} - E b_j|`
/// divided by `(|E| + max|entry|) · max|b|`.
pub fn recurrence_residual(op: &TridiagonalOperator, energy: f64, coeffs: &[f64]) -> Result<f64> {
    if coeffs.len() != op.len() {
        return Err(Error::InvalidArgument(format!(
            "coefficient length {} does not match operator size {}",
            coeffs.len(),
            op.len()
        )));
    }
    let bmax = coeffs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if bmax == 0.0 {
        return Err(Error::ZeroVector);
    }
    let hb = op.apply(coeffs);
    let worst = hb
        .iter()
        .zip(coeffs)
        .fold(0.0_f64, |m, (h, b)| m.max((h - energy * b).abs()));
    let scale = (energy.abs() + op.max_abs_entry()) * bmax;
    if scale == 0.0 {
        // zero operator and zero energy: any vector is exact
        return Ok(0.0);
    }
    Ok(worst / scale)
}
