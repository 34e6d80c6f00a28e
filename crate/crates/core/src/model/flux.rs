//! Split monotone two-point numerical fluxes `F(u, v) = F₁(u) + F₂(v)`.

use std::sync::Arc;

use super::scalar_fn::ScalarFn;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadTol};

/// A numerical flux that splits into a nondecreasing part `f1` and a
/// nonincreasing part `f2`.
#[derive(Debug, Clone)]
pub struct SplitFlux {
    /// The physical flux the splitting is consistent with.
    pub flux: ScalarFn,
    pub f1: ScalarFn,
    pub f2: ScalarFn,
}

impl SplitFlux {
    /// Wraps an explicit splitting without checking it; see [`monotonicity_check`].
    pub fn from_parts(flux: ScalarFn, f1: ScalarFn, f2: ScalarFn) -> Self {
        SplitFlux { flux, f1, f2 }
    }

    /// `F(u, v)`.
    #[inline]
    pub fn numerical(&self, u: f64, v: f64) -> f64 {
        self.f1.eval(u) + self.f2.eval(v)
    }

    /// `Lip(F) = sup|F₁'| + sup|F₂'|` on `[lo, hi]`.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> f64 {
        self.f1.lipschitz_on(lo, hi) + self.f2.lipschitz_on(lo, hi)
    }

    /// `max |F(u, u) − f(u)|` over `n` samples of `[lo, hi]`.
    pub fn consistency_defect(&self, lo: f64, hi: f64, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let u = lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64;
                (self.numerical(u, u) - self.flux.eval(u)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Engquist–Osher splitting of `f`:
/// `F₁(u) = f(0) + ∫₀ᵘ max(f', 0)`, `F₂(v) = ∫₀ᵛ min(f', 0)`.
///
/// Closed forms are used for the linear and Burgers fluxes. Otherwise the
/// sign changes of `f'` on `[lo, hi]` (extended to contain 0) are located,
/// and each part is the sum of `f`-increments over the pieces where `f'`
/// has the matching sign. That construction is checked against adaptive
/// quadrature of `max(f', 0)` at sample points before it is returned.
pub fn eo_split(f: &ScalarFn, lo: f64, hi: f64) -> Result<SplitFlux> {
    match f {
        ScalarFn::Const(c) => Ok(SplitFlux::from_parts(f.clone(), ScalarFn::Const(*c), ScalarFn::zero())),
        ScalarFn::Linear(a) => Ok(SplitFlux::from_parts(
            f.clone(),
            ScalarFn::Linear(a.max(0.0)),
            ScalarFn::Linear(a.min(0.0)),
        )),
        ScalarFn::HalfSquare => Ok(SplitFlux::from_parts(
            f.clone(),
            ScalarFn::PosHalfSquare,
            ScalarFn::NegHalfSquare,
        )),
        _ => piecewise_eo_split(f, lo, hi),
    }
}

fn piecewise_eo_split(f: &ScalarFn, lo: f64, hi: f64) -> Result<SplitFlux> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Splitting(format!("bad interval [{lo}, {hi}]")));
    }
    let lo = lo.min(0.0);
    let hi = hi.max(0.0);
    const SAMPLES: usize = 4096;
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=SAMPLES)
        .map(|k| lo + (hi - lo) * k as f64 / SAMPLES as f64)
        .collect();
    let ds: Vec<f64> = xs.iter().map(|&x| f.deriv(x)).collect();
    for k in 0..SAMPLES {
        let (a, b) = (ds[k], ds[k + 1]);
        if a == 0.0 || a.signum() == b.signum() || b == 0.0 {
            if b == 0.0 && k + 1 < SAMPLES {
                roots.push(xs[k + 1]);
            }
            continue;
        }
        let (mut l, mut r) = (xs[k], xs[k + 1]);
        let sl = a.signum();
        for _ in 0..200 {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            if f.deriv(m).signum() == sl {
                l = m;
            } else {
                r = m;
            }
        }
        roots.push(0.5 * (l + r));
    }
    roots.dedup();

    // Pieces (-inf, r0], [r0, r1], ..., [rm, inf) with the sign of f' inside.
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&roots);
    edges.push(f64::INFINITY);
    let pieces: Vec<(f64, f64, bool)> = edges
        .windows(2)
        .map(|w| {
            let probe = match (w[0].is_finite(), w[1].is_finite()) {
                (true, true) => 0.5 * (w[0] + w[1]),
                (false, true) => w[1].min(hi) - 1e-3 * (hi - lo),
                (true, false) => w[0].max(lo) + 1e-3 * (hi - lo),
                (false, false) => 0.5 * (lo + hi),
            };
            let up = if w[0].is_finite() && w[1].is_finite() {
                f.eval(w[1]) >= f.eval(w[0])
            } else {
                f.deriv(probe) >= 0.0
            };
            (w[0], w[1], up)
        })
        .collect();
    let pieces = Arc::new(pieces);

    let f0 = f.eval(0.0);
    let make = |increasing: bool, offset: f64| {
        let pf = pieces.clone();
        let pd = pieces.clone();
        let fe = f.clone();
        let fd = f.clone();
        ScalarFn::Custom(Arc::new(super::scalar_fn::CustomFn {
            name: format!("EO{}({f:?})", if increasing { "+" } else { "-" }),
            eval: Box::new(move |u: f64| {
                offset
                    + pf.iter()
                        .filter(|p| p.2 == increasing)
                        .map(|&(a, b, _)| fe.eval(u.clamp(a, b)) - fe.eval(0.0f64.clamp(a, b)))
                        .sum::<f64>()
            }),
            deriv: Box::new(move |u: f64| {
                let d = fd.deriv(u);
                let inside = pd.iter().any(|&(a, b, up)| up == increasing && u >= a && u <= b);
                if inside {
                    if increasing {
                        d.max(0.0)
                    } else {
                        d.min(0.0)
                    }
                } else {
                    0.0
                }
            }),
            kinks: roots.clone(),
        }))
    };
    let f1 = make(true, f0);
    let f2 = make(false, 0.0);

    // Independent check: F₁(u) − f(0) against quadrature of max(f', 0).
    for k in 0..=16 {
        let u = lo + (hi - lo) * k as f64 / 16.0;
        let q = integrate(|s| f.deriv(s).max(0.0), 0.0, u, &roots, QuadTol::with_rel(1e-12))
            .map_err(|e| Error::Splitting(format!("quadrature check failed: {e}")))?;
        let got = f1.eval(u) - f0;
        if (got - q.value).abs() > 1e-9 * (1.0 + q.value.abs()) {
            return Err(Error::Splitting(format!(
                "piecewise EO part disagrees with quadrature at u = {u}: {got} vs {}",
                q.value
            )));
        }
    }
    Ok(SplitFlux::from_parts(f.clone(), f1, f2))
}

/// Lax–Friedrichs splitting `F₁ = (f(u) + λu)/2`, `F₂ = (f(v) − λv)/2`
/// with `λ = max|f'|` on `[lo, hi]` unless given.
pub fn lax_friedrichs_split(f: &ScalarFn, lo: f64, hi: f64, lambda: Option<f64>) -> SplitFlux {
    let lambda = lambda.unwrap_or_else(|| f.lipschitz_on(lo, hi));
    SplitFlux::from_parts(
        f.clone(),
        f.clone().plus(ScalarFn::Linear(lambda)).scaled(0.5),
        f.clone().plus(ScalarFn::Linear(-lambda)).scaled(0.5),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub min_f1_deriv: f64,
    pub max_f2_deriv: f64,
    pub pass: bool,
}

/// Samples `F₁'` and `F₂'` on `n_samples` points of `[lo, hi]`; passes iff
/// `min F₁' ≥ −1e-12` and `max F₂' ≤ 1e-12`.
pub fn monotonicity_check(flux: &SplitFlux, lo: f64, hi: f64, n_samples: usize) -> Result<MonotonicityReport> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("monotonicity check needs at least 2 samples".into()));
    }
    let mut min_f1 = f64::INFINITY;
    let mut max_f2 = f64::NEG_INFINITY;
    for k in 0..n_samples {
        let u = lo + (hi - lo) * k as f64 / (n_samples - 1) as f64;
        min_f1 = min_f1.min(flux.f1.deriv(u));
        max_f2 = max_f2.max(flux.f2.deriv(u));
    }
    Ok(MonotonicityReport {
        min_f1_deriv: min_f1,
        max_f2_deriv: max_f2,
        pass: min_f1 >= -1e-12 && max_f2 <= 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_flux_is_pure_upwind() {
        let s = eo_split(&ScalarFn::identity(), -1.0, 1.0).unwrap();
        for u in [-2.0, 0.0, 0.7, 3.0] {
            assert_eq!(s.f1.eval(u), u);
            assert_eq!(s.f2.eval(u), 0.0);
        }
    }

    #[test]
    fn burgers_eo_values() {
        let s = eo_split(&ScalarFn::HalfSquare, -2.0, 2.0).unwrap();
        // ∫₀¹ max(s,0) ds + ∫₀⁻¹ min(s,0) ds = 1/2 + 1/2
        assert!((s.numerical(1.0, -1.0) - 1.0).abs() < 1e-15);
        for u in [-1.0, 0.3, 2.0] {
            assert!((s.numerical(u, u) - 0.5 * u * u).abs() < 1e-15);
        }
    }

    #[test]
    fn monotonicity_examples() {
        let s = eo_split(&ScalarFn::HalfSquare, -2.0, 2.0).unwrap();
        assert!(monotonicity_check(&s, -2.0, 2.0, 101).unwrap().pass);

        let bad = SplitFlux::from_parts(ScalarFn::zero(), ScalarFn::Linear(-1.0), ScalarFn::Linear(1.0));
        let r = monotonicity_check(&bad, -1.0, 1.0, 11).unwrap();
        assert!(!r.pass);
        assert_eq!(r.min_f1_deriv, -1.0);

        let up = SplitFlux::from_parts(ScalarFn::identity(), ScalarFn::identity(), ScalarFn::zero());
        assert!(monotonicity_check(&up, -1.0, 1.0, 2).unwrap().pass);
        assert!(monotonicity_check(&up, -1.0, 1.0, 1).is_err());
    }

    #[test]
    fn piecewise_split_of_sine_matches_quadrature() {
        let s = eo_split(&ScalarFn::Sin, -4.0, 5.0).unwrap();
        assert!(monotonicity_check(&s, -4.0, 5.0, 2001).unwrap().pass);
        assert!(s.consistency_defect(-4.0, 5.0, 1000) < 1e-10);
        // f' = cos has zeros at ±π/2 and 3π/2 inside the interval.
        let half_pi = std::f64::consts::FRAC_PI_2;
        // F₁(π) = ∫₀^π max(cos, 0) = 1
        assert!((s.f1.eval(std::f64::consts::PI) - 1.0).abs() < 1e-12);
        assert!((s.f2.eval(std::f64::consts::PI) + 1.0).abs() < 1e-12);
        assert!((s.f1.eval(half_pi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_split_of_nonzero_offset_flux() {
        let f = ScalarFn::custom("u³−u+2", |u| u * u * u - u + 2.0, |u| 3.0 * u * u - 1.0);
        let s = eo_split(&f, -2.0, 2.0).unwrap();
        assert!((s.f1.eval(0.0) - 2.0).abs() < 1e-15);
        assert!(s.consistency_defect(-2.0, 2.0, 1000) < 1e-10);
        assert!(monotonicity_check(&s, -2.0, 2.0, 1001).unwrap().pass);
    }

    #[test]
    fn lax_friedrichs_is_monotone_and_consistent() {
        let s = lax_friedrichs_split(&ScalarFn::HalfSquare, -1.5, 1.5, None);
        assert!(monotonicity_check(&s, -1.5, 1.5, 301).unwrap().pass);
        assert!(s.consistency_defect(-1.5, 1.5, 1000) < 1e-14);
    }
}
