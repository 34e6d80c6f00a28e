use crate::error::{Error, Result};
use crate::grid::{l1_norm, Boundary, Field, GridSpec};
use crate::model::{effective_diffusion, Model, ScalarFn};

/// The semi-discrete operator
/// `𝒜(u)_α = Σᵢ D₋ⁱ[Fⁱ(u_α, u_{α+eᵢ}) − D₊ⁱ A^η(u_α)]`, so that `du/dt = −𝒜(u)`.
#[derive(Debug, Clone)]
pub struct SemiDiscreteOp {
    model: Model,
    spec: GridSpec,
    diffusion: ScalarFn,
}

/// Scratch buffers reused across right-hand-side evaluations.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    f1: Vec<Vec<f64>>,
    f2: Vec<Vec<f64>>,
    a: Vec<f64>,
    faces: Vec<f64>,
}

impl SemiDiscreteOp {
    pub fn new(model: Model, spec: GridSpec) -> Result<Self> {
        if model.dim() != spec.dim() {
            return Err(Error::Mismatch(format!(
                "model has {} flux components, grid has dimension {}",
                model.dim(),
                spec.dim()
            )));
        }
        let diffusion = effective_diffusion(&model);
        Ok(SemiDiscreteOp {
            model,
            spec,
            diffusion,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// `A^η`.
    pub fn diffusion(&self) -> &ScalarFn {
        &self.diffusion
    }

    /// Value range the stencil reads for data in `[lo, hi]` (ghost cells read 0).
    pub fn read_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self.spec.boundary() {
            Boundary::ZeroExtension => (lo.min(0.0), hi.max(0.0)),
            Boundary::Periodic => (lo, hi),
        }
    }

    /// Upper bound on the ℓ¹ Lipschitz constant of `𝒜` for data in `[lo, hi]`:
    /// `2 Σᵢ Lip(Fⁱ)/Δx + 4d Lip(A^η)/Δx²`.
    pub fn lipschitz_bound(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = self.read_range(lo, hi);
        let dx = self.spec.dx();
        let conv: f64 = self.model.fluxes().iter().map(|s| s.lipschitz_on(lo, hi)).sum();
        2.0 * conv / dx + 4.0 * self.spec.dim() as f64 * self.diffusion.lipschitz_on(lo, hi) / (dx * dx)
    }

    /// `du/dt = −Σᵢ D₋ⁱFⁱ(u_α, u_{α+eᵢ}) + Σᵢ D₋ⁱD₊ⁱ A^η(u_α)`.
    pub fn rhs(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let mut out = vec![0.0; u.len()];
        let mut ws = Workspace::default();
        self.rhs_into(u.values(), &mut out, &mut ws)?;
        Ok(Field::from_parts_unchecked(self.spec.clone(), out, u.time()))
    }

    /// `𝒜(u) = −rhs(u)`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        Ok(self.rhs(u)?.map(|v| -v))
    }

    pub(crate) fn check(&self, u: &Field) -> Result<()> {
        if u.spec() != &self.spec {
            return Err(Error::Mismatch("field is not on the operator's grid".into()));
        }
        Ok(())
    }

    /// Slice form of [`SemiDiscreteOp::rhs`] for the time loops.
    pub fn rhs_into(&self, u: &[f64], out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let spec = &self.spec;
        let d = spec.dim();
        let n_cells = u.len();
        let dx = spec.dx();
        let inv_dx = 1.0 / dx;
        let inv_dx2 = inv_dx * inv_dx;

        ws.f1.resize(d, Vec::new());
        ws.f2.resize(d, Vec::new());
        for (i, split) in self.model.fluxes().iter().enumerate() {
            ws.f1[i].clear();
            ws.f1[i].extend(u.iter().map(|&v| split.f1.eval(v)));
            ws.f2[i].clear();
            ws.f2[i].extend(u.iter().map(|&v| split.f2.eval(v)));
        }
        ws.a.clear();
        ws.a.extend(u.iter().map(|&v| self.diffusion.eval(v)));

        out.iter_mut().for_each(|o| *o = 0.0);
        let periodic = spec.boundary() == Boundary::Periodic;
        let a_ghost = self.diffusion.eval(0.0);
        for axis in 0..d {
            let n = spec.extents()[axis];
            let split = &self.model.fluxes()[axis];
            let (p_ghost, m_ghost) = (split.f1.eval(0.0), split.f2.eval(0.0));
            let p = &ws.f1[axis];
            let m = &ws.f2[axis];
            let a = &ws.a;
            ws.faces.resize(n + 1, 0.0);
            for (start, stride) in spec.lines(axis) {
                let at = |j: usize| start + j * stride;
                let last = at(n - 1);
                // faces[j] is the flux through the face between cells j-1 and j.
                ws.faces[0] = if periodic {
                    p[last] + m[start]
                } else {
                    p_ghost + m[start]
                };
                for j in 1..n {
                    ws.faces[j] = p[at(j - 1)] + m[at(j)];
                }
                ws.faces[n] = if periodic {
                    ws.faces[0]
                } else {
                    p[last] + m_ghost
                };
                for j in 0..n {
                    let c = at(j);
                    let left = if j > 0 {
                        a[at(j - 1)]
                    } else if periodic {
                        a[last]
                    } else {
                        a_ghost
                    };
                    let right = if j + 1 < n {
                        a[at(j + 1)]
                    } else if periodic {
                        a[start]
                    } else {
                        a_ghost
                    };
                    let conv = (ws.faces[j + 1] - ws.faces[j]) * inv_dx;
                    let diff = ((right - a[c]) - (a[c] - left)) * inv_dx2;
                    out[c] += diff - conv;
                }
            }
        }
        if let Some(bad) = (0..n_cells).find(|&i| !out[i].is_finite()) {
            return Err(Error::Blowup {
                index: spec.multi_index(bad),
                time: f64::NAN,
            });
        }
        Ok(())
    }

    /// `Δt = c / (Σᵢ Lip(Fⁱ)/Δx + 2d·max A^η'/Δx²)` over `[lo, hi]`, or `horizon`
    /// when the denominator vanishes.
    pub fn stable_dt_range(&self, lo: f64, hi: f64, c: f64, horizon: f64) -> Result<f64> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl safety must lie in (0, 1], got {c}")));
        }
        let (lo, hi) = self.read_range(lo, hi);
        let dx = self.spec.dx();
        let conv: f64 = self.model.fluxes().iter().map(|s| s.lipschitz_on(lo, hi)).sum();
        let denom = conv / dx + 2.0 * self.spec.dim() as f64 * self.diffusion.lipschitz_on(lo, hi) / (dx * dx);
        if denom <= 0.0 {
            Ok(horizon)
        } else {
            Ok(c / denom)
        }
    }

    pub fn stable_dt(&self, u: &Field, c: f64, horizon: f64) -> Result<f64> {
        self.stable_dt_range(u.min(), u.max(), c, horizon)
    }

    /// `Σ_α sign(u_α − v_α)(𝒜(u) − 𝒜(v))_α` with `sign(0) = 0`.
    pub fn accretivity_probe(&self, u: &Field, v: &Field) -> Result<AccretivityProbe> {
        self.check(u)?;
        self.check(v)?;
        let au = self.apply(u)?;
        let av = self.apply(v)?;
        let value = u
            .values()
            .iter()
            .zip(v.values())
            .zip(au.values().iter().zip(av.values()))
            .map(|((a, b), (x, y))| {
                let s = if a > b {
                    1.0
                } else if a < b {
                    -1.0
                } else {
                    0.0
                };
                s * (x - y)
            })
            .sum();
        let scale = l1_norm(&au) + l1_norm(&av) + 1.0;
        Ok(AccretivityProbe { value, scale })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccretivityProbe {
    pub value: f64,
    pub scale: f64,
}

impl AccretivityProbe {
    pub const REL_TOL: f64 = 1e-12;

    pub fn pass(&self) -> bool {
        self.value >= -Self::REL_TOL * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::discrete_laplacian;
    use crate::model::{eo_split, SplitFlux};

    fn line(values: &[f64], boundary: Boundary) -> Field {
        let spec = GridSpec::new(&[values.len()], 1.0, &[0.0], boundary).unwrap();
        Field::new(spec, values.to_vec(), 0.0).unwrap()
    }

    fn heat_op(spec: &GridSpec) -> SemiDiscreteOp {
        let m = Model::isotropic_eo(spec.dim(), &ScalarFn::zero(), ScalarFn::identity(), 0.0, 0.0, 1.0).unwrap();
        SemiDiscreteOp::new(m, spec.clone()).unwrap()
    }

    #[test]
    fn constant_field_has_zero_rhs() {
        let spec = GridSpec::new(&[5, 4], 0.3, &[0.0, 0.0], Boundary::Periodic).unwrap();
        let m = Model::isotropic_eo(2, &ScalarFn::HalfSquare, ScalarFn::Cubic(1.0), 0.2, -1.0, 1.0).unwrap();
        let op = SemiDiscreteOp::new(m, spec.clone()).unwrap();
        let r = op.rhs(&Field::constant(&spec, 0.7)).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_diffusion_is_laplacian() {
        let u = line(&[0.0, 1.0, 0.0], Boundary::ZeroExtension);
        let r = heat_op(u.spec()).rhs(&u).unwrap();
        assert_eq!(r.values(), &[1.0, -2.0, 1.0]);
        assert_eq!(r.values(), discrete_laplacian(&u).values());
    }

    #[test]
    fn pure_upwind_advection() {
        let u = line(&[0.0, 1.0, 0.0], Boundary::ZeroExtension);
        let split = SplitFlux::from_parts(ScalarFn::identity(), ScalarFn::identity(), ScalarFn::zero());
        let m = Model::new(vec![split], ScalarFn::zero(), 0.0).unwrap();
        let op = SemiDiscreteOp::new(m, u.spec().clone()).unwrap();
        assert_eq!(op.rhs(&u).unwrap().values(), &[0.0, -1.0, 1.0]);
    }

    #[test]
    fn periodic_rhs_sums_to_zero() {
        let spec = GridSpec::new(&[7, 5], 0.1, &[0.0, 0.0], Boundary::Periodic).unwrap();
        let m = Model::isotropic_eo(
            2,
            &ScalarFn::HalfSquare,
            ScalarFn::Ramp {
                scale: 0.1,
                threshold: 0.5,
            },
            0.0,
            -1.0,
            1.0,
        )
        .unwrap();
        let op = SemiDiscreteOp::new(m, spec.clone()).unwrap();
        let u = Field::from_centers(&spec, |x| (7.0 * x[0]).sin() + (3.0 * x[1]).cos()).unwrap();
        let r = op.rhs(&u).unwrap();
        let s: f64 = r.values().iter().sum();
        let scale: f64 = r.values().iter().map(|v| v.abs()).sum();
        assert!(s.abs() <= 1e-13 * scale, "{s} vs {scale}");
    }

    #[test]
    fn stable_dt_examples() {
        let spec = GridSpec::new(&[8], 0.1, &[0.0], Boundary::ZeroExtension).unwrap();
        let u = Field::from_centers(&spec, |x| x[0]).unwrap();
        let dt = heat_op(&spec).stable_dt(&u, 0.5, 1.0).unwrap();
        assert!((dt - 0.25 * 0.01).abs() < 1e-16);

        let m = Model::isotropic_eo(1, &ScalarFn::zero(), ScalarFn::zero(), 0.0, 0.0, 1.0).unwrap();
        let op = SemiDiscreteOp::new(m, spec.clone()).unwrap();
        assert_eq!(op.stable_dt(&u, 0.45, 3.5).unwrap(), 3.5);

        let m = Model::isotropic_eo(1, &ScalarFn::HalfSquare, ScalarFn::zero(), 0.0, 0.0, 1.0).unwrap();
        let op = SemiDiscreteOp::new(m, spec.clone()).unwrap();
        let data = Field::from_centers(&spec, |x| x[0] / 0.8).unwrap();
        assert!(data.min() >= 0.0 && data.max() <= 1.0);
        let dt = op.stable_dt_range(0.0, 1.0, 0.45, 1.0).unwrap();
        assert!((dt - 0.45 * 0.1).abs() < 1e-16);
        assert!(op.stable_dt(&data, 0.0, 1.0).is_err());
    }

    #[test]
    fn accretivity_hand_example() {
        let u = line(&[0.0, 1.0, 0.0], Boundary::ZeroExtension);
        let v = Field::zeros(u.spec());
        let p = heat_op(u.spec()).accretivity_probe(&u, &v).unwrap();
        assert_eq!(p.value, 2.0);
        assert!(p.pass());
        let same = heat_op(u.spec()).accretivity_probe(&u, &u).unwrap();
        assert_eq!(same.value, 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = GridSpec::new(&[4, 4], 1.0, &[0.0, 0.0], Boundary::Periodic).unwrap();
        let s = eo_split(&ScalarFn::identity(), 0.0, 1.0).unwrap();
        let m = Model::new(vec![s], ScalarFn::zero(), 0.0).unwrap();
        assert!(SemiDiscreteOp::new(m, spec).is_err());
    }

    #[test]
    fn blowup_reports_cell() {
        let spec = GridSpec::new(&[4], 1.0, &[0.0], Boundary::ZeroExtension).unwrap();
        let s = eo_split(&ScalarFn::zero(), 0.0, 1.0).unwrap();
        let m = Model::new(vec![s], ScalarFn::Cubic(1e300), 0.0).unwrap();
        let op = SemiDiscreteOp::new(m, spec.clone()).unwrap();
        let u = Field::new(spec, vec![0.0, 1e10, 0.0, 0.0], 0.0).unwrap();
        assert!(matches!(op.rhs(&u), Err(Error::Blowup { .. })));
    }
}
