use std::fmt;
use std::sync::Arc;

type Fun = dyn Fn(f64) -> f64 + Send + Sync;

/// User-supplied function with its derivative.
pub struct CustomFn {
    pub name: String,
    pub eval: Box<Fun>,
    pub deriv: Box<Fun>,
    /// Points where `eval` is not differentiable.
    pub kinks: Vec<f64>,
}

/// A real function of one variable together with its derivative.
///
/// The closed-form variants cover every flux and diffusion the catalog and
/// the CLI can build; they evaluate without dynamic dispatch, which matters
/// inside the stencil loop. [`ScalarFn::custom`] accepts anything else.
#[derive(Clone)]
pub enum ScalarFn {
    Const(f64),
    /// `a·u`
    Linear(f64),
    /// `u²/2`
    HalfSquare,
    /// `max(u, 0)²/2`
    PosHalfSquare,
    /// `min(u, 0)²/2`
    NegHalfSquare,
    /// `k·u³`
    Cubic(f64),
    /// `k·u·|u|`
    SignedSquare(f64),
    /// `scale·max(u − threshold, 0)`
    Ramp { scale: f64, threshold: f64 },
    Sin,
    Sum(Arc<ScalarFn>, Arc<ScalarFn>),
    Scaled(f64, Arc<ScalarFn>),
    Custom(Arc<CustomFn>),
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Const(c) => write!(f, "{c}"),
            ScalarFn::Linear(a) => write!(f, "{a}·u"),
            ScalarFn::HalfSquare => f.write_str("u²/2"),
            ScalarFn::PosHalfSquare => f.write_str("max(u,0)²/2"),
            ScalarFn::NegHalfSquare => f.write_str("min(u,0)²/2"),
            ScalarFn::Cubic(k) => write!(f, "{k}·u³"),
            ScalarFn::SignedSquare(k) => write!(f, "{k}·u|u|"),
            ScalarFn::Ramp { scale, threshold } => write!(f, "{scale}·max(u−{threshold},0)"),
            ScalarFn::Sin => f.write_str("sin(u)"),
            ScalarFn::Sum(a, b) => write!(f, "({a:?} + {b:?})"),
            ScalarFn::Scaled(k, a) => write!(f, "{k}·({a:?})"),
            ScalarFn::Custom(c) => f.write_str(&c.name),
        }
    }
}

impl ScalarFn {
    pub fn zero() -> Self {
        ScalarFn::Const(0.0)
    }

    pub fn identity() -> Self {
        ScalarFn::Linear(1.0)
    }

    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarFn::Custom(Arc::new(CustomFn {
            name: name.into(),
            eval: Box::new(eval),
            deriv: Box::new(deriv),
            kinks: Vec::new(),
        }))
    }

    pub fn plus(self, other: ScalarFn) -> Self {
        ScalarFn::Sum(Arc::new(self), Arc::new(other))
    }

    pub fn scaled(self, k: f64) -> Self {
        ScalarFn::Scaled(k, Arc::new(self))
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ScalarFn::Const(c) => *c,
            ScalarFn::Linear(a) => a * u,
            ScalarFn::HalfSquare => 0.5 * u * u,
            ScalarFn::PosHalfSquare => {
                let p = u.max(0.0);
                0.5 * p * p
            }
            ScalarFn::NegHalfSquare => {
                let m = u.min(0.0);
                0.5 * m * m
            }
            ScalarFn::Cubic(k) => k * u * u * u,
            ScalarFn::SignedSquare(k) => k * u * u.abs(),
            ScalarFn::Ramp { scale, threshold } => scale * (u - threshold).max(0.0),
            ScalarFn::Sin => u.sin(),
            ScalarFn::Sum(a, b) => a.eval(u) + b.eval(u),
            ScalarFn::Scaled(k, a) => k * a.eval(u),
            ScalarFn::Custom(c) => (c.eval)(u),
        }
    }

    /// Derivative; at a kink the right derivative is returned.
    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        match self {
            ScalarFn::Const(_) => 0.0,
            ScalarFn::Linear(a) => *a,
            ScalarFn::HalfSquare => u,
            ScalarFn::PosHalfSquare => u.max(0.0),
            ScalarFn::NegHalfSquare => u.min(0.0),
            ScalarFn::Cubic(k) => 3.0 * k * u * u,
            ScalarFn::SignedSquare(k) => 2.0 * k * u.abs(),
            ScalarFn::Ramp { scale, threshold } => {
                if u >= *threshold {
                    *scale
                } else {
                    0.0
                }
            }
            ScalarFn::Sin => u.cos(),
            ScalarFn::Sum(a, b) => a.deriv(u) + b.deriv(u),
            ScalarFn::Scaled(k, a) => k * a.deriv(u),
            ScalarFn::Custom(c) => (c.deriv)(u),
        }
    }

    pub fn kinks(&self) -> Vec<f64> {
        match self {
            ScalarFn::Ramp { threshold, .. } => vec![*threshold],
            ScalarFn::Sum(a, b) => {
                let mut k = a.kinks();
                k.extend(b.kinks());
                k
            }
            ScalarFn::Scaled(_, a) => a.kinks(),
            ScalarFn::Custom(c) => c.kinks.clone(),
            _ => Vec::new(),
        }
    }

    /// Upper bound on `sup |f'|` over `[lo, hi]`.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let m = lo.abs().max(hi.abs());
        match self {
            ScalarFn::Const(_) => 0.0,
            ScalarFn::Linear(a) => a.abs(),
            ScalarFn::HalfSquare => m,
            ScalarFn::PosHalfSquare => hi.max(0.0),
            ScalarFn::NegHalfSquare => (-lo).max(0.0),
            ScalarFn::Cubic(k) => 3.0 * k.abs() * m * m,
            ScalarFn::SignedSquare(k) => 2.0 * k.abs() * m,
            ScalarFn::Ramp { scale, threshold } => {
                if hi >= *threshold {
                    scale.abs()
                } else {
                    0.0
                }
            }
            ScalarFn::Sin => {
                // |cos| peaks at multiples of π and is monotone in between.
                let pi = std::f64::consts::PI;
                if (hi / pi).floor() >= (lo / pi).ceil() {
                    1.0
                } else {
                    lo.cos().abs().max(hi.cos().abs())
                }
            }
            ScalarFn::Sum(a, b) => a.lipschitz_on(lo, hi) + b.lipschitz_on(lo, hi),
            ScalarFn::Scaled(k, a) => k.abs() * a.lipschitz_on(lo, hi),
            ScalarFn::Custom(_) => self.sampled_abs_deriv_max(lo, hi),
        }
    }

    fn sampled_abs_deriv_max(&self, lo: f64, hi: f64) -> f64 {
        const N: usize = 1024;
        let mut m = self.deriv(lo).abs().max(self.deriv(hi).abs());
        for k in 1..N {
            let u = lo + (hi - lo) * k as f64 / N as f64;
            m = m.max(self.deriv(u).abs());
        }
        for k in self.kinks() {
            if k >= lo && k <= hi {
                m = m.max(self.deriv(k).abs());
            }
        }
        m
    }

    /// Largest relative mismatch between `deriv` and a central difference of
    /// `eval` over `n` samples of `[lo, hi]`, skipping samples next to kinks.
    pub fn derivative_mismatch(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let kinks = self.kinks();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let u = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
            let h = 1e-6 * (1.0 + u.abs());
            if kinks.iter().any(|&p| (p - u).abs() <= 2.0 * h) {
                continue;
            }
            let fd = (self.eval(u + h) - self.eval(u - h)) / (2.0 * h);
            let d = self.deriv(u);
            let rel = (fd - d).abs() / (1.0 + d.abs());
            worst = worst.max(rel);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_variants() -> Vec<ScalarFn> {
        vec![
            ScalarFn::Const(1.5),
            ScalarFn::Linear(-2.0),
            ScalarFn::HalfSquare,
            ScalarFn::PosHalfSquare,
            ScalarFn::NegHalfSquare,
            ScalarFn::Cubic(1.0 / 3.0),
            ScalarFn::SignedSquare(1.0),
            ScalarFn::Ramp {
                scale: 0.1,
                threshold: 0.5,
            },
            ScalarFn::Sin,
            ScalarFn::Cubic(1.0 / 3.0).plus(ScalarFn::Linear(0.1)),
            ScalarFn::HalfSquare.scaled(3.0),
            ScalarFn::custom("exp", f64::exp, f64::exp),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for f in all_variants() {
            let m = f.derivative_mismatch(-2.0, 2.0, 400);
            assert!(m < 1e-6, "{f:?}: {m}");
        }
    }

    #[test]
    fn lipschitz_bounds_dominate_samples() {
        for f in all_variants() {
            let lip = f.lipschitz_on(-1.3, 0.7);
            for k in 0..=200 {
                let u = -1.3 + 2.0 * k as f64 / 200.0;
                assert!(f.deriv(u).abs() <= lip + 1e-12, "{f:?} at {u}");
            }
        }
    }

    #[test]
    fn ramp_is_flat_below_threshold() {
        let a = ScalarFn::Ramp {
            scale: 0.1,
            threshold: 0.5,
        };
        assert_eq!(a.eval(0.3), 0.0);
        assert_eq!(a.deriv(0.49), 0.0);
        assert!((a.eval(1.0) - 0.05).abs() < 1e-16);
        assert_eq!(a.lipschitz_on(-1.0, 0.4), 0.0);
    }
}
