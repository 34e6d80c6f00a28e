//! Symmetric mollifiers `J` on `[−1, 1]` and their distribution functions.

use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::quadrature::gk15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelShape {
    /// `exp(−1/(1−x²))` normalized to unit mass; C^∞.
    Bump,
    /// `(15/16)(1−x²)²`; C¹ with a closed-form distribution function.
    Quartic,
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelShape::Bump => "bump",
            KernelShape::Quartic => "quartic",
        })
    }
}

impl FromStr for KernelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bump" => Ok(KernelShape::Bump),
            "quartic" => Ok(KernelShape::Quartic),
            other => Err(Error::Parse(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Number of nodes in the tabulated bump distribution function.
pub const CDF_NODES: usize = 4096;

fn bump_raw(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

struct CdfTable {
    norm: f64,
    h: f64,
    k: Vec<f64>,
    j: Vec<f64>,
}

impl CdfTable {
    fn build() -> Self {
        let n = CDF_NODES;
        let h = 2.0 / (n - 1) as f64;
        let node = |i: usize| if i == n - 1 { 1.0 } else { -1.0 + h * i as f64 };
        let mut k = Vec::with_capacity(n);
        let mut acc = 0.0;
        k.push(0.0);
        for i in 1..n {
            acc += gk15(&bump_raw, node(i - 1), node(i)).0;
            k.push(acc);
        }
        let norm = acc;
        k.iter_mut().for_each(|v| *v /= norm);
        k[n - 1] = 1.0;
        let j = (0..n).map(|i| bump_raw(node(i)) / norm).collect();
        CdfTable { norm, h, k, j }
    }

    /// Piecewise cubic Hermite interpolation with exact nodal slopes, limited
    /// per interval so the interpolant stays monotone.
    fn eval(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let pos = (s + 1.0) / self.h;
        let i = (pos.floor() as usize).min(CDF_NODES - 2);
        let t = pos - i as f64;
        let (y0, y1) = (self.k[i], self.k[i + 1]);
        let delta = (y1 - y0) / self.h;
        let (mut m0, mut m1) = (self.j[i], self.j[i + 1]);
        if delta <= 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else {
            let (a, b) = (m0 / delta, m1 / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m0 *= tau;
                m1 *= tau;
            }
        }
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * self.h * m0 + h01 * y1 + h11 * self.h * m1
    }
}

static BUMP_TABLE: Lazy<CdfTable> = Lazy::new(CdfTable::build);

/// A mollifier `J` with support in `[−1, 1]`, `J(−x) = J(x)`, `∫J = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MollifierKernel {
    shape: KernelShape,
}

impl Default for MollifierKernel {
    fn default() -> Self {
        MollifierKernel::bump()
    }
}

impl MollifierKernel {
    pub fn new(shape: KernelShape) -> Self {
        MollifierKernel { shape }
    }

    pub fn bump() -> Self {
        Self::new(KernelShape::Bump)
    }

    pub fn quartic() -> Self {
        Self::new(KernelShape::Quartic)
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    /// The constant dividing the raw profile so that it has unit mass.
    pub fn normalization(&self) -> f64 {
        match self.shape {
            KernelShape::Bump => BUMP_TABLE.norm,
            KernelShape::Quartic => 16.0 / 15.0,
        }
    }

    /// `J(x)`.
    pub fn density(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::Bump => bump_raw(x) / BUMP_TABLE.norm,
            KernelShape::Quartic => {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    let w = 1.0 - x * x;
                    15.0 / 16.0 * w * w
                }
            }
        }
    }

    /// `K(s) = ∫₋₁ˢ J`.
    pub fn cdf(&self, s: f64) -> f64 {
        match self.shape {
            KernelShape::Bump => BUMP_TABLE.eval(s),
            KernelShape::Quartic => {
                if s <= -1.0 {
                    0.0
                } else if s >= 1.0 {
                    1.0
                } else {
                    let s2 = s * s;
                    15.0 / 16.0 * s * (1.0 - 2.0 * s2 / 3.0 + s2 * s2 / 5.0) + 0.5
                }
            }
        }
    }

    /// `J_ε(x) = J(x/ε)/ε`.
    pub fn density_eps(&self, x: f64, eps: f64) -> f64 {
        self.density(x / eps) / eps
    }

    /// `K_ε(s) = K(s/ε)`.
    pub fn cdf_eps(&self, s: f64, eps: f64) -> f64 {
        self.cdf(s / eps)
    }
}
