//! Uniform d-dimensional grids, cell-averaged fields, difference stencils
//! and discrete norms.
//!
//! Cells are addressed by multi-indices `α ∈ [0, n_0) × … × [0, n_{d-1})`
//! stored row-major (last axis fastest). Cell `α` covers the half-open box
//! `origin + [α_i Δx, (α_i + 1) Δx)` on every axis.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{GAUSS3_NODES, GAUSS3_WEIGHTS};

/// How reads outside the grid are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Ghost cells read zero.
    ZeroExtension,
    /// Indices wrap around.
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::ZeroExtension => f.write_str("zero"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zero-extension" | "zeroextension" => Ok(Boundary::ZeroExtension),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Parse(format!("unknown boundary `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    extents: Vec<usize>,
    strides: Vec<usize>,
    dx: f64,
    origin: Vec<f64>,
    boundary: Boundary,
}

impl GridSpec {
    pub fn new(extents: &[usize], dx: f64, origin: &[f64], boundary: Boundary) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if origin.len() != extents.len() {
            return Err(Error::InvalidGrid(format!(
                "origin has {} coordinates for a {}-dimensional grid",
                origin.len(),
                extents.len()
            )));
        }
        if let Some(n) = extents.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidGrid(format!("every extent must be >= 3, got {n}")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let mut strides = vec![1; extents.len()];
        for k in (0..extents.len() - 1).rev() {
            strides[k] = strides[k + 1] * extents[k + 1];
        }
        Ok(GridSpec {
            extents: extents.to_vec(),
            strides,
            dx,
            origin: origin.to_vec(),
            boundary,
        })
    }

    /// Grid covering the box `[lower, upper]` with `cells` cells per axis.
    ///
    /// The box must produce the same cell width on every axis.
    pub fn from_box(lower: &[f64], upper: &[f64], cells: &[usize], boundary: Boundary) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != cells.len() {
            return Err(Error::InvalidGrid("box corners and cell counts disagree in dimension".into()));
        }
        let widths: Vec<f64> = lower
            .iter()
            .zip(upper)
            .zip(cells)
            .map(|((l, u), &n)| (u - l) / n as f64)
            .collect();
        let dx = widths[0];
        if widths.iter().any(|w| (w - dx).abs() > 1e-12 * dx.abs()) {
            return Err(Error::InvalidGrid(format!(
                "anisotropic cell widths {widths:?}; all axes must share dx"
            )));
        }
        Self::new(cells, dx, lower, boundary)
    }

    /// Cubic grid `[lower, upper]^dim` with `n` cells per axis.
    pub fn cube(dim: usize, lower: f64, upper: f64, n: usize, boundary: Boundary) -> Result<Self> {
        Self::from_box(&vec![lower; dim], &vec![upper; dim], &vec![n; dim], boundary)
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(&self, boundary: Boundary) -> GridSpec {
        GridSpec {
            boundary,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Δx^d.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim() as i32)
    }

    pub fn upper(&self) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.extents)
            .map(|(o, &n)| o + n as f64 * self.dx)
            .collect()
    }

    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut alpha = vec![0; self.dim()];
        for (k, s) in self.strides.iter().enumerate() {
            alpha[k] = lin / s;
            lin %= s;
        }
        alpha
    }

    pub fn linear_index(&self, alpha: &[usize]) -> usize {
        alpha.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn cell_center(&self, lin: usize) -> Vec<f64> {
        self.multi_index(lin)
            .iter()
            .zip(&self.origin)
            .map(|(&a, o)| o + (a as f64 + 0.5) * self.dx)
            .collect()
    }

    /// Neighbor of `lin` one cell along `axis` in direction `step` (±1);
    /// `None` means the read falls on a zero ghost cell.
    pub fn neighbor(&self, lin: usize, axis: usize, step: isize) -> Option<usize> {
        let n = self.extents[axis];
        let s = self.strides[axis];
        let a = (lin / s) % n;
        let next = a as isize + step;
        if next >= 0 && (next as usize) < n {
            Some((lin as isize + step * s as isize) as usize)
        } else {
            match self.boundary {
                Boundary::ZeroExtension => None,
                Boundary::Periodic => {
                    let wrapped = next.rem_euclid(n as isize) as usize;
                    Some(lin - a * s + wrapped * s)
                }
            }
        }
    }

    /// All lines along `axis` as `(first index, stride)`; each has `extents[axis]` cells.
    pub fn lines(&self, axis: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.extents[axis];
        let s = self.strides[axis];
        let outer = self.len() / (n * s);
        (0..outer).flat_map(move |o| (0..s).map(move |r| (o * n * s + r, s)))
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for a {}-dimensional grid",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Whether two specs describe the same cells (boundary may differ).
    pub fn same_cells(&self, other: &GridSpec) -> bool {
        self.extents == other.extents && self.dx == other.dx && self.origin == other.origin
    }
}

/// Cell-averaged values on a grid at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: GridSpec,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(spec: GridSpec, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid with {} cells",
                values.len(),
                spec.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InputData(format!(
                "non-finite value at cell {:?}",
                spec.multi_index(i)
            )));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InputData(format!("time must be finite and >= 0, got {time}")));
        }
        Ok(Field { spec, values, time })
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Field::constant(spec, 0.0)
    }

    pub fn constant(spec: &GridSpec, c: f64) -> Self {
        Field {
            values: vec![c; spec.len()],
            spec: spec.clone(),
            time: 0.0,
        }
    }

    /// Builds a field from cell-center samples of `g`.
    pub fn from_centers(spec: &GridSpec, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|i| g(&spec.cell_center(i))).collect();
        Field::new(spec.clone(), values, 0.0)
    }

    pub(crate) fn from_parts_unchecked(spec: GridSpec, values: Vec<f64>, time: f64) -> Self {
        Field { spec, values, time }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value read at `neighbor(lin, axis, step)`, with ghost cells reading 0.
    #[inline]
    pub fn read(&self, lin: usize, axis: usize, step: isize) -> f64 {
        self.spec.neighbor(lin, axis, step).map_or(0.0, |j| self.values[j])
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Field {
        Field {
            spec: self.spec.clone(),
            values: self.values.iter().map(|&v| g(v)).collect(),
            time: self.time,
        }
    }

    pub fn zip_with(&self, other: &Field, g: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same(other)?;
        Ok(Field {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| g(a, b))
                .collect(),
            time: self.time,
        })
    }

    pub fn check_same(&self, other: &Field) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `S_{±Δx_i}`: the field whose value at `α` is this field's value at `α ± e_axis`.
    pub fn shift(&self, axis: usize, step: isize) -> Result<Field> {
        self.spec.check_axis(axis)?;
        let values = (0..self.len()).map(|i| self.read(i, axis, step)).collect();
        Ok(Field::from_parts_unchecked(self.spec.clone(), values, self.time))
    }

    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let join_f = |xs: &[f64]| xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
        let extents = self
            .spec
            .extents
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            w,
            "degencd-field v1; {}; {}; {:.16e}; {}; {:.16e}; {}",
            self.spec.dim(),
            extents,
            self.spec.dx,
            join_f(&self.spec.origin),
            self.time,
            self.spec.boundary
        )?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Field> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty snapshot".into()))??;
        let parts: Vec<&str> = header.split(';').map(str::trim).collect();
        if parts.len() != 7 || parts[0] != "degencd-field v1" {
            return Err(Error::Parse(format!("bad snapshot header `{header}`")));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
        };
        let dim: usize = parts[1]
            .parse()
            .map_err(|e| Error::Parse(format!("dim `{}`: {e}", parts[1])))?;
        let extents = parts[2]
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("extent `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let dx = num(parts[3])?;
        let origin = parts[4].split(',').map(num).collect::<Result<Vec<_>>>()?;
        let time = num(parts[5])?;
        let boundary: Boundary = parts[6].parse()?;
        if extents.len() != dim {
            return Err(Error::Parse(format!("dim {dim} but {} extents", extents.len())));
        }
        let spec = GridSpec::new(&extents, dx, &origin, boundary)?;
        let mut values = Vec::with_capacity(spec.len());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(num(&line)?);
        }
        Field::new(spec, values, time)
    }
}

/// Cell averages of `u0` by tensor-product 3-point Gauss quadrature.
pub fn cell_average_init(u0: impl Fn(&[f64]) -> f64, spec: &GridSpec) -> Result<Field> {
    let values = cell_averages(&u0, spec)?;
    Field::new(spec.clone(), values, 0.0)
}

pub(crate) fn cell_averages(u0: &impl Fn(&[f64]) -> f64, spec: &GridSpec) -> Result<Vec<f64>> {
    let d = spec.dim();
    let h = 0.5 * spec.dx;
    let npts = 3usize.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut out = Vec::with_capacity(spec.len());
    for lin in 0..spec.len() {
        let center = spec.cell_center(lin);
        let mut acc = 0.0;
        for q in 0..npts {
            let mut w = 1.0;
            let mut code = q;
            for k in 0..d {
                let j = code % 3;
                code /= 3;
                x[k] = center[k] + h * GAUSS3_NODES[j];
                w *= GAUSS3_WEIGHTS[j];
            }
            acc += w * u0(&x);
        }
        let avg = acc / 2f64.powi(d as i32);
        if !avg.is_finite() {
            return Err(Error::InputData(format!(
                "non-finite cell average at cell {:?}",
                spec.multi_index(lin)
            )));
        }
        out.push(avg);
    }
    Ok(out)
}

/// `D_+^axis`.
pub fn forward_diff(f: &Field, axis: usize) -> Result<Field> {
    f.spec.check_axis(axis)?;
    let dx = f.spec.dx;
    let values = (0..f.len())
        .map(|i| (f.read(i, axis, 1) - f.values[i]) / dx)
        .collect();
    Ok(Field::from_parts_unchecked(f.spec.clone(), values, f.time))
}

/// `D_-^axis`.
pub fn backward_diff(f: &Field, axis: usize) -> Result<Field> {
    f.spec.check_axis(axis)?;
    let dx = f.spec.dx;
    let values = (0..f.len())
        .map(|i| (f.values[i] - f.read(i, axis, -1)) / dx)
        .collect();
    Ok(Field::from_parts_unchecked(f.spec.clone(), values, f.time))
}

/// `Σ_i D_-^i D_+^i f`, the (2d+1)-point Laplacian.
pub fn discrete_laplacian(f: &Field) -> Field {
    let dx2 = f.spec.dx * f.spec.dx;
    let d = f.spec.dim();
    let values = (0..f.len())
        .map(|i| {
            let c = f.values[i];
            (0..d)
                .map(|k| ((f.read(i, k, 1) - c) - (c - f.read(i, k, -1))) / dx2)
                .sum()
        })
        .collect();
    Field::from_parts_unchecked(f.spec.clone(), values, f.time)
}

/// `Δx^d Σ |f_α|`.
pub fn l1_norm(f: &Field) -> f64 {
    f.spec.cell_volume() * f.values.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn linf_norm(f: &Field) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `Σ_α Σ_i |f_{α+e_i} − f_α|`.
///
/// With zero extension the sum runs over the zero-extended field on ℤ^d,
/// so the jumps into the ghost layer on both ends of every line count.
pub fn bv_seminorm(f: &Field) -> f64 {
    let spec = &f.spec;
    let mut total = 0.0;
    for axis in 0..spec.dim() {
        let n = spec.extents[axis];
        for (start, stride) in spec.lines(axis) {
            let at = |j: usize| f.values[start + j * stride];
            for j in 0..n - 1 {
                total += (at(j + 1) - at(j)).abs();
            }
            match spec.boundary {
                Boundary::Periodic => total += (at(0) - at(n - 1)).abs(),
                Boundary::ZeroExtension => total += at(0).abs() + at(n - 1).abs(),
            }
        }
    }
    total
}

/// Reference against which [`l1_error_on_ball`] measures.
pub enum Reference<'a> {
    /// Compared through its cell averages.
    Function(&'a dyn Fn(&[f64]) -> f64),
    Field(&'a Field),
}

/// `Δx^d Σ_{α: center ∈ B(center, radius)} |f_α − ref_α|`.
pub fn l1_error_on_ball(f: &Field, reference: Reference<'_>, radius: f64, center: &[f64]) -> Result<f64> {
    let spec = &f.spec;
    if center.len() != spec.dim() {
        return Err(Error::InvalidArgument("ball center has wrong dimension".into()));
    }
    let inside: Vec<usize> = (0..spec.len())
        .filter(|&i| {
            let c = spec.cell_center(i);
            c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
        })
        .collect();
    if inside.is_empty() {
        return Err(Error::Domain(format!(
            "ball of radius {radius} around {center:?} contains no cell centers"
        )));
    }
    let refs: Vec<f64> = match reference {
        Reference::Field(r) => {
            f.check_same(r)?;
            inside.iter().map(|&i| r.values[i]).collect()
        }
        Reference::Function(g) => {
            let all = cell_averages(&|x: &[f64]| g(x), spec)?;
            inside.iter().map(|&i| all[i]).collect()
        }
    };
    let sum: f64 = inside
        .iter()
        .zip(&refs)
        .map(|(&i, r)| (f.values[i] - r).abs())
        .sum();
    Ok(spec.cell_volume() * sum)
}

/// Averages a fine field onto the grid `coarse`, whose cells are unions of
/// `factor^d` fine cells.
pub fn restrict_average(fine: &Field, coarse: &GridSpec) -> Result<Field> {
    let fs = &fine.spec;
    if fs.dim() != coarse.dim() || fs.origin != coarse.origin {
        return Err(Error::Mismatch("restriction needs grids with a common origin".into()));
    }
    let ratio = coarse.dx / fs.dx;
    let factor = ratio.round() as usize;
    if factor == 0 || (ratio - factor as f64).abs() > 1e-9 * ratio {
        return Err(Error::Mismatch(format!("grid ratio {ratio} is not an integer")));
    }
    if fs.extents.iter().zip(&coarse.extents).any(|(&nf, &nc)| nf != nc * factor) {
        return Err(Error::Mismatch("fine grid does not tile the coarse grid".into()));
    }
    let mut sums = vec![0.0; coarse.len()];
    for (lin, v) in fine.values.iter().enumerate() {
        let alpha = fs.multi_index(lin);
        let target: usize = alpha
            .iter()
            .zip(&coarse.strides)
            .map(|(a, s)| (a / factor) * s)
            .sum();
        sums[target] += v;
    }
    let norm = (factor as f64).powi(fs.dim() as i32);
    let values = sums.into_iter().map(|s| s / norm).collect();
    Ok(Field::from_parts_unchecked(coarse.clone(), values, fine.time))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64], dx: f64, boundary: Boundary) -> Field {
        let spec = GridSpec::new(&[values.len()], dx, &[0.0], boundary).unwrap();
        Field::new(spec, values.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(&[2], 1.0, &[0.0], Boundary::Periodic).is_err());
        assert!(GridSpec::new(&[4], 0.0, &[0.0], Boundary::Periodic).is_err());
        assert!(GridSpec::new(&[4, 4], 1.0, &[0.0], Boundary::Periodic).is_err());
        assert!(GridSpec::from_box(&[0.0, 0.0], &[1.0, 2.0], &[4, 4], Boundary::Periodic).is_err());
    }

    #[test]
    fn cell_average_of_constant_linear_and_quadratic() {
        let spec = GridSpec::new(&[3], 1.0, &[0.0], Boundary::ZeroExtension).unwrap();
        let c = cell_average_init(|_| 2.5, &spec).unwrap();
        assert!(c.values().iter().all(|&v| v == 2.5));
        let lin = cell_average_init(|x| x[0], &spec).unwrap();
        assert!((lin.values()[0] - 0.5).abs() < 1e-15);
        let sq = cell_average_init(|x| x[0] * x[0], &spec).unwrap();
        assert!((sq.values()[0] - 1.0 / 3.0).abs() < 1e-12);
        // ∫_1^2 x² = 7/3
        assert!((sq.values()[1] - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cell_average_rejects_non_finite() {
        let spec = GridSpec::new(&[3], 1.0, &[0.0], Boundary::ZeroExtension).unwrap();
        assert!(matches!(
            cell_average_init(|x| 1.0 / (x[0] - x[0]), &spec),
            Err(Error::InputData(_))
        ));
    }

    #[test]
    fn forward_diff_examples() {
        let z = line(&[0.0, 1.0, 0.0], 1.0, Boundary::ZeroExtension);
        assert_eq!(forward_diff(&z, 0).unwrap().values(), &[1.0, -1.0, 0.0]);
        assert_eq!(backward_diff(&z, 0).unwrap().values(), &[0.0, 1.0, -1.0]);
        let p = line(&[0.0, 1.0, 0.0], 1.0, Boundary::Periodic);
        assert_eq!(forward_diff(&p, 0).unwrap().values(), &[1.0, -1.0, 0.0]);
        let c = line(&[3.0; 5], 0.1, Boundary::Periodic);
        assert!(forward_diff(&c, 0).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(forward_diff(&c, 1).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let z = line(&[0.0, 1.0, 0.0], 1.0, Boundary::ZeroExtension);
        assert_eq!(discrete_laplacian(&z).values(), &[1.0, -2.0, 1.0]);
        let c = line(&[2.0; 4], 0.5, Boundary::Periodic);
        assert!(discrete_laplacian(&c).values().iter().all(|&v| v == 0.0));

        let spec = GridSpec::new(&[3, 3], 1.0, &[0.0, 0.0], Boundary::ZeroExtension).unwrap();
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let f = Field::new(spec, v, 0.0).unwrap();
        let lap = discrete_laplacian(&f);
        assert_eq!(lap.values(), &[0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn norms() {
        let f = line(&[2.0, -2.0, 0.0], 0.5, Boundary::ZeroExtension);
        assert_eq!(l1_norm(&f), 2.0);
        assert_eq!(linf_norm(&f), 2.0);
        let g = line(&[0.0, 1.0, 0.0], 1.0, Boundary::ZeroExtension);
        assert_eq!(bv_seminorm(&g), 2.0);
        let z = line(&[0.0; 3], 1.0, Boundary::ZeroExtension);
        assert_eq!((l1_norm(&z), linf_norm(&z), bv_seminorm(&z)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bv_of_constant_periodic_is_zero() {
        let c = line(&[1.5; 6], 1.0, Boundary::Periodic);
        assert_eq!(bv_seminorm(&c), 0.0);
    }

    #[test]
    fn l1_error_examples() {
        let f = line(&[1.0, 1.0, 1.0], 1.0, Boundary::ZeroExtension);
        assert_eq!(l1_error_on_ball(&f, Reference::Field(&f), 10.0, &[0.0]).unwrap(), 0.0);
        let zero = |_: &[f64]| 0.0;
        // cell centers 0.5, 1.5, 2.5; R = 2 picks the first two.
        assert_eq!(l1_error_on_ball(&f, Reference::Function(&zero), 2.0, &[0.0]).unwrap(), 2.0);
        assert!(matches!(
            l1_error_on_ball(&f, Reference::Function(&zero), 1.0, &[100.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn neighbor_wraps_and_ghosts() {
        let spec = GridSpec::new(&[3, 4], 1.0, &[0.0, 0.0], Boundary::Periodic).unwrap();
        assert_eq!(spec.neighbor(0, 0, -1), Some(8));
        assert_eq!(spec.neighbor(3, 1, 1), Some(0));
        let z = spec.with_boundary(Boundary::ZeroExtension);
        assert_eq!(z.neighbor(0, 0, -1), None);
        assert_eq!(z.neighbor(5, 1, 1), Some(6));
    }

    #[test]
    fn lines_cover_every_cell_once() {
        let spec = GridSpec::new(&[3, 4, 5], 1.0, &[0.0; 3], Boundary::Periodic).unwrap();
        for axis in 0..3 {
            let mut seen = vec![0; spec.len()];
            for (start, stride) in spec.lines(axis) {
                for j in 0..spec.extents()[axis] {
                    seen[start + j * stride] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn restriction_is_conservative() {
        let fine = GridSpec::new(&[8, 8], 0.25, &[0.0, 0.0], Boundary::ZeroExtension).unwrap();
        let coarse = GridSpec::new(&[4, 4], 0.5, &[0.0, 0.0], Boundary::ZeroExtension).unwrap();
        let f = Field::from_centers(&fine, |x| (x[0] * 3.0).sin() + x[1] * x[1]).unwrap();
        let r = restrict_average(&f, &coarse).unwrap();
        let total_f: f64 = f.values().iter().sum::<f64>() * fine.cell_volume();
        let total_r: f64 = r.values().iter().sum::<f64>() * coarse.cell_volume();
        assert!((total_f - total_r).abs() < 1e-13);
    }

    #[test]
    fn snapshot_round_trip() {
        let spec = GridSpec::new(&[3, 4], 0.1, &[-0.2, 0.3], Boundary::Periodic).unwrap();
        let f = Field::from_centers(&spec, |x| x[0].exp() - x[1] / 3.0).unwrap().with_time(0.125);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("degencd-field v1; 2; 3,4; "));
        let g = Field::read_snapshot(&buf[..]).unwrap();
        assert_eq!(f, g);
    }
}
