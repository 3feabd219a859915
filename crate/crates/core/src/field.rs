//! Uniform grids on V ≅ ℝ^{2g} and blade-valued sampled fields.
//!
//! Real coordinates are interleaved, `(x₁, y₁, …, x_g, y_g)` with `z_j = x_j + i y_j`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exterior::{Blade, Family, GradedValue};
use crate::math::{C64, I, PI, ZERO};

/// Box `[-R, R]^n` sampled with spacing `h` in every real direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub radius: f64,
    pub h: f64,
    pub n: usize,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(dim: usize, radius: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(radius > 0.0) || dim == 0 {
            return Err(Error::Config(format!("grid needs dim > 0, R > 0, h > 0 (got {dim}, {radius}, {h})")));
        }
        let steps = 2.0 * radius / h;
        let k = libm::round(steps);
        if (steps - k).abs() > 1e-9 * steps.max(1.0) || k < 2.0 {
            return Err(Error::Config(format!("2R/h = {steps} must be an integer >= 2")));
        }
        let n = k as usize + 1;
        let mut strides = Vec::with_capacity(dim);
        let mut s = 1usize;
        for _ in 0..dim {
            strides.push(s);
            s = s
                .checked_mul(n)
                .ok_or_else(|| Error::Config(format!("grid with {n}^{dim} points overflows")))?;
        }
        Ok(Grid { dim, radius, h, n, strides, len: s })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Grid with spacing halved on the same box.
    pub fn refined(&self) -> Result<Grid> {
        Grid::new(self.dim, self.radius, self.h / 2.0)
    }

    #[inline]
    pub fn axis_coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.n
    }

    #[inline]
    pub fn coord_value(&self, k: usize) -> f64 {
        -self.radius + k as f64 * self.h
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.coord_value(self.axis_coord(idx, a));
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.point_into(idx, &mut v);
        v
    }

    /// Neighbour `k` steps along `axis`, if inside the box.
    #[inline]
    pub fn step(&self, idx: usize, axis: usize, k: i64) -> Option<usize> {
        let c = self.axis_coord(idx, axis) as i64 + k;
        if c < 0 || c >= self.n as i64 {
            None
        } else {
            Some((idx as i64 + k * self.strides[axis] as i64) as usize)
        }
    }

    /// Neighbour displaced by an integer vector of grid steps.
    pub fn shift(&self, idx: usize, steps: &[i64]) -> Option<usize> {
        let mut j = idx;
        for (a, &k) in steps.iter().enumerate() {
            j = self.step(j, a, k)?;
        }
        Some(j)
    }

    /// Express a vector of V in whole grid steps (error if not grid-aligned).
    pub fn steps_of(&self, v: &[f64]) -> Result<Vec<i64>> {
        v.iter()
            .map(|&x| {
                let s = x / self.h;
                let k = libm::round(s);
                if (s - k).abs() > 1e-8 {
                    Err(Error::Config(format!("shift {x} is not a multiple of h = {}", self.h)))
                } else {
                    Ok(k as i64)
                }
            })
            .collect()
    }

    /// Index of the grid point nearest to `v` (must lie on the grid).
    pub fn index_of(&self, v: &[f64]) -> Result<usize> {
        let mut idx = 0;
        for (a, &x) in v.iter().enumerate() {
            let s = (x + self.radius) / self.h;
            let k = libm::round(s);
            if (s - k).abs() > 1e-8 || k < 0.0 || k >= self.n as f64 {
                return Err(Error::Config(format!("point coordinate {x} is not on the grid")));
            }
            idx += k as usize * self.strides[a];
        }
        Ok(idx)
    }

    /// Points whose every coordinate index lies in `[margin, n - 1 - margin]`.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        (0..self.dim).all(|a| {
            let c = self.axis_coord(idx, a);
            c >= margin && c + margin < self.n
        })
    }

    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.h, self.dim as f64)
    }
}

/// How `∂/∂z̄_j` and `∂/∂z_j` are discretised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivScheme {
    /// Second-order central differences `½(D_x + i D_y)` with zero extension
    /// outside the box.
    Central,
    /// Periodic Fourier differentiation on the box of period `n·h`.
    Fourier,
}

/// Dense periodic Fourier differentiation matrix on `n` points of spacing `h`
/// (row-major). The Nyquist mode is dropped for even `n`.
pub fn fourier_diff_matrix(n: usize, h: f64) -> Vec<f64> {
    let period = n as f64 * h;
    let kmax = (n as i64 - 1) / 2;
    let mut d = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let dx = (r as f64 - c as f64) * h;
            let mut s = 0.0;
            for m in 1..=kmax {
                let k = 2.0 * PI * m as f64 / period;
                // i k e^{ik dx} + (-ik) e^{-ik dx} = -2 k sin(k dx)
                s += -2.0 * k * libm::sin(k * dx);
            }
            d[r * n + c] = s / n as f64;
        }
    }
    d
}

/// Scalar derivative operators on a grid.
#[derive(Clone, Debug)]
pub struct Deriv {
    pub grid: Grid,
    pub scheme: DerivScheme,
    fourier: Vec<f64>,
}

impl Deriv {
    pub fn new(grid: &Grid, scheme: DerivScheme) -> Self {
        let fourier = if scheme == DerivScheme::Fourier { fourier_diff_matrix(grid.n, grid.h) } else { Vec::new() };
        Deriv { grid: grid.clone(), scheme, fourier }
    }

    fn central_axis(&self, f: &[C64], axis: usize) -> Vec<C64> {
        let g = &self.grid;
        let inv = 0.5 / g.h;
        (0..f.len())
            .map(|i| {
                let p = g.step(i, axis, 1).map(|k| f[k]).unwrap_or(ZERO);
                let m = g.step(i, axis, -1).map(|k| f[k]).unwrap_or(ZERO);
                (p - m) * inv
            })
            .collect()
    }

    fn fourier_axis(&self, f: &[C64], axis: usize) -> Vec<C64> {
        let g = &self.grid;
        let n = g.n;
        let stride = g.strides[axis];
        let mut out = vec![ZERO; f.len()];
        let mut line = vec![ZERO; n];
        for base in 0..f.len() {
            if g.axis_coord(base, axis) != 0 {
                continue;
            }
            for (k, l) in line.iter_mut().enumerate() {
                *l = f[base + k * stride];
            }
            for r in 0..n {
                let row = &self.fourier[r * n..(r + 1) * n];
                let mut s = ZERO;
                for (dv, &lv) in row.iter().zip(&line) {
                    s += lv * *dv;
                }
                out[base + r * stride] = s;
            }
        }
        out
    }

    /// Partial derivative along one real axis.
    pub fn partial(&self, f: &[C64], axis: usize) -> Vec<C64> {
        match self.scheme {
            DerivScheme::Fourier => self.fourier_axis(f, axis),
            DerivScheme::Central => self.central_axis(f, axis),
        }
    }

    /// Real partials `(∂_x f, ∂_y f)` in the complex plane `j`.
    fn partials(&self, f: &[C64], j: usize) -> (Vec<C64>, Vec<C64>) {
        let (ax, ay) = (2 * j, 2 * j + 1);
        match self.scheme {
            DerivScheme::Fourier => (self.fourier_axis(f, ax), self.fourier_axis(f, ay)),
            DerivScheme::Central => (self.central_axis(f, ax), self.central_axis(f, ay)),
        }
    }

    /// Discrete `∂/∂z̄_j`.
    pub fn dbar(&self, f: &[C64], j: usize) -> Vec<C64> {
        let (dx, dy) = self.partials(f, j);
        dx.iter().zip(&dy).map(|(&a, &b)| (a + I * b) * 0.5).collect()
    }

    /// Discrete `∂/∂z_j`. Equals `-(dbar)^*` in the grid l² inner product.
    pub fn dholo(&self, f: &[C64], j: usize) -> Vec<C64> {
        let (dx, dy) = self.partials(f, j);
        dx.iter().zip(&dy).map(|(&a, &b)| (a - I * b) * 0.5).collect()
    }
}

/// Sampled blade-valued field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub g: usize,
    pub comps: BTreeMap<Blade, Vec<C64>>,
}

impl Field {
    pub fn zeros(grid: &Grid, g: usize) -> Self {
        Field { grid: grid.clone(), g, comps: BTreeMap::new() }
    }

    /// `f(v) · blade`.
    pub fn scalar(grid: &Grid, g: usize, blade: Blade, f: impl Fn(&[f64]) -> C64) -> Self {
        let mut v = vec![0.0; grid.dim];
        let vals = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut v);
                f(&v)
            })
            .collect();
        let mut out = Self::zeros(grid, g);
        out.comps.insert(blade, vals);
        out
    }

    pub fn from_fn(grid: &Grid, g: usize, f: impl Fn(&[f64]) -> GradedValue) -> Self {
        let mut out = Self::zeros(grid, g);
        let mut v = vec![0.0; grid.dim];
        for i in 0..grid.len() {
            grid.point_into(i, &mut v);
            for (b, s) in f(&v).terms {
                out.comp_mut(b)[i] = s;
            }
        }
        out
    }

    pub fn comp_mut(&mut self, b: Blade) -> &mut Vec<C64> {
        let n = self.grid.len();
        self.comps.entry(b).or_insert_with(|| vec![ZERO; n])
    }

    pub fn value_at(&self, idx: usize) -> GradedValue {
        let mut v = GradedValue::zero(self.g);
        for (&b, vals) in &self.comps {
            v.add_term(b, vals[idx]);
        }
        v
    }

    pub fn add_assign(&mut self, other: &Field) {
        for (&b, vals) in &other.comps {
            let dst = self.comp_mut(b);
            for (d, s) in dst.iter_mut().zip(vals) {
                *d += *s;
            }
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Field {
        let mut out = self.clone();
        for vals in out.comps.values_mut() {
            vals.iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    /// Multiply every component pointwise by `m`.
    pub fn mul_pointwise(&self, m: &[C64]) -> Field {
        let mut out = self.clone();
        for vals in out.comps.values_mut() {
            vals.iter_mut().zip(m).for_each(|(x, y)| *x *= *y);
        }
        out
    }

    /// Apply a scalar linear operator to each component.
    pub fn map_comps(&self, op: impl Fn(&[C64]) -> Vec<C64>) -> Field {
        let mut out = Field::zeros(&self.grid, self.g);
        for (&b, vals) in &self.comps {
            out.comps.insert(b, op(vals));
        }
        out
    }

    /// Left wedge by the generator `(family, j)` with a pointwise coefficient.
    pub fn wedge_gen(&self, family: Family, j: usize, coef: Option<&[C64]>) -> Field {
        let mut out = Field::zeros(&self.grid, self.g);
        for (&b, vals) in &self.comps {
            if let Some((nb, sign)) = b.wedge_gen(family, j) {
                let dst = out.comp_mut(nb);
                match coef {
                    Some(c) => dst.iter_mut().zip(vals).zip(c).for_each(|((d, v), k)| *d += *v * *k * sign),
                    None => dst.iter_mut().zip(vals).for_each(|(d, v)| *d += *v * sign),
                }
            }
        }
        out
    }

    /// Contraction by the dual of `(family, j)` with a pointwise coefficient.
    pub fn contract_gen(&self, family: Family, j: usize, coef: Option<&[C64]>) -> Field {
        let mut out = Field::zeros(&self.grid, self.g);
        for (&b, vals) in &self.comps {
            if let Some((nb, sign)) = b.contract_gen(family, j) {
                let dst = out.comp_mut(nb);
                match coef {
                    Some(c) => dst.iter_mut().zip(vals).zip(c).for_each(|((d, v), k)| *d += *v * *k * sign),
                    None => dst.iter_mut().zip(vals).for_each(|(d, v)| *d += *v * sign),
                }
            }
        }
        out
    }

    /// Left wedge by a constant graded value.
    pub fn wedge_const(&self, a: &GradedValue) -> Field {
        let mut out = Field::zeros(&self.grid, self.g);
        for (&ba, &sa) in &a.terms {
            for (&b, vals) in &self.comps {
                if let Some((nb, sign)) = ba.wedge(b) {
                    let k = sa * sign;
                    let dst = out.comp_mut(nb);
                    dst.iter_mut().zip(vals).for_each(|(d, v)| *d += *v * k);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sup norm over points at least `margin` steps away from the boundary.
    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        let mut m: f64 = 0.0;
        for vals in self.comps.values() {
            for (i, z) in vals.iter().enumerate() {
                if self.grid.is_interior(i, margin) {
                    m = m.max(z.norm());
                }
            }
        }
        m
    }

    /// Sup norm over the outer shell of `width` grid layers.
    pub fn boundary_max(&self, width: usize) -> f64 {
        let mut m: f64 = 0.0;
        for vals in self.comps.values() {
            for (i, z) in vals.iter().enumerate() {
                if !self.grid.is_interior(i, width) {
                    m = m.max(z.norm());
                }
            }
        }
        m
    }

    /// Error unless the field is negligible on the outer shell.
    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        let b = self.boundary_max(2);
        if b > tol {
            return Err(Error::Boundary { value: b, tol });
        }
        Ok(())
    }

    /// Discrete l² inner product `Σ ⟨f, g⟩ hⁿ` with orthonormal standard blades.
    pub fn inner(&self, other: &Field) -> C64 {
        let mut s = ZERO;
        for (b, vals) in &self.comps {
            if let Some(o) = other.comps.get(b) {
                for (x, y) in vals.iter().zip(o) {
                    s += *x * y.conj();
                }
            }
        }
        s * self.grid.cell_volume()
    }

    /// `(self)(v + shift)` with zero outside the box; `shift` in grid steps.
    pub fn translate(&self, steps: &[i64]) -> Field {
        let mut out = Field::zeros(&self.grid, self.g);
        for (&b, vals) in &self.comps {
            let mut dst = vec![ZERO; vals.len()];
            for (i, d) in dst.iter_mut().enumerate() {
                if let Some(k) = self.grid.shift(i, steps) {
                    *d = vals[k];
                }
            }
            out.comps.insert(b, dst);
        }
        out
    }

    /// Drop components that are identically zero.
    pub fn prune(mut self) -> Field {
        self.comps.retain(|_, v| v.iter().any(|z| *z != ZERO));
        self
    }
}

/// Pointwise samples of `f` on the grid.
pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> Vec<C64> {
    let mut v = vec![0.0; grid.dim];
    (0..grid.len())
        .map(|i| {
            grid.point_into(i, &mut v);
            f(&v)
        })
        .collect()
}

/// Complex coordinates `z_j = x_j + i y_j` of an interleaved real vector.
pub fn complex_coords(v: &[f64]) -> Vec<C64> {
    v.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    #[test]
    fn grid_shape_and_alignment() {
        let g = Grid::new(2, 3.0, 0.1).unwrap();
        assert_eq!(g.n, 61);
        assert_eq!(g.len(), 61 * 61);
        assert!(Grid::new(2, 1.0, 0.3).is_err());
        let i = g.index_of(&[0.5, -1.0]).unwrap();
        let p = g.point(i);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] + 1.0).abs() < 1e-12);
        assert!(g.steps_of(&[0.05, 0.0]).is_err());
    }

    #[test]
    fn central_dbar_matches_exact_derivative_to_second_order() {
        // f = z̄ e^{-|z|²}:  ∂f/∂z̄ = (1 - |z|²) e^{-|z|²}
        let errs: Vec<f64> = [0.1, 0.05]
            .iter()
            .map(|&h| {
                let g = Grid::new(2, 4.0, h).unwrap();
                let f = sample(&g, |v| C64::new(v[0], -v[1]) * exp(-(v[0] * v[0] + v[1] * v[1])));
                let exact = sample(&g, |v| {
                    let r2 = v[0] * v[0] + v[1] * v[1];
                    C64::new((1.0 - r2) * exp(-r2), 0.0)
                });
                let d = Deriv::new(&g, DerivScheme::Central).dbar(&f, 0);
                d.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(errs[0] < 0.05 && (3.5..4.5).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn central_dbar_z_commutator_is_average_difference() {
        // [∂̄_h, z] f = ½(A_x − A_y) f: the lattice defect behind every O(h²) curvature residual
        let g = Grid::new(2, 2.0, 0.25).unwrap();
        let d = Deriv::new(&g, DerivScheme::Central);
        let f = sample(&g, |v| C64::new(exp(-v[0] * v[0] - 2.0 * v[1] * v[1]), v[0]));
        let zf: Vec<C64> = (0..g.len()).map(|i| complex_coords(&g.point(i))[0] * f[i]).collect();
        let lhs = d.dbar(&zf, 0);
        let rhs = d.dbar(&f, 0);
        for i in 0..g.len() {
            if g.is_interior(i, 1) {
                let z = complex_coords(&g.point(i))[0];
                let ax = (f[g.step(i, 0, 1).unwrap()] + f[g.step(i, 0, -1).unwrap()]) * 0.5;
                let ay = (f[g.step(i, 1, 1).unwrap()] + f[g.step(i, 1, -1).unwrap()]) * 0.5;
                assert!((lhs[i] - z * rhs[i] - (ax - ay) * 0.5).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_derivative_is_spectral_and_antisymmetric() {
        let g = Grid::new(2, 3.0, 0.2).unwrap();
        let d = Deriv::new(&g, DerivScheme::Fourier);
        let f = sample(&g, |v| C64::new(exp(-2.0 * (v[0] * v[0] + v[1] * v[1])), 0.0));
        let exact = sample(&g, |v| {
            let e = exp(-2.0 * (v[0] * v[0] + v[1] * v[1]));
            C64::new(-2.0 * v[0] * e, -2.0 * v[1] * e)
        });
        let dbar = d.dbar(&f, 0);
        let err = dbar.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let m = fourier_diff_matrix(7, 0.3);
        for r in 0..7 {
            for c in 0..7 {
                assert!((m[r * 7 + c] + m[c * 7 + r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dholo_is_minus_adjoint_of_dbar() {
        for scheme in [DerivScheme::Central, DerivScheme::Fourier] {
            let g = Grid::new(2, 1.0, 0.25).unwrap();
            let d = Deriv::new(&g, scheme);
            let f = sample(&g, |v| C64::new(libm::sin(3.0 * v[0] + v[1]), v[1] * v[0]));
            let u = sample(&g, |v| C64::new(v[0] - v[1], libm::cos(v[1])));
            let lhs: C64 = d.dbar(&f, 0).iter().zip(&u).map(|(a, b)| a * b.conj()).sum();
            let rhs: C64 = f.iter().zip(&d.dholo(&u, 0)).map(|(a, b)| -a * b.conj()).sum();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
