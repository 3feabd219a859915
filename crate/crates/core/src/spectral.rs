//! Blade-sector Laplacians of 𝕏⁰ and 𝕐⁰+Φ and their low spectrum.
//!
//! Writing the connection as `Σ_j dζ̄_j∧M₁ + dz̄_j∧M₂` with `M₁` a multiplication
//! and `M₂ = ∂̄_j + 2πi conj(β_j)`, its Laplacian is
//! `Σ_j M₁*M₁ + M₂*M₂ ± 2π s_j M_c` where `M_c = ½([D_x,x] + [D_y,y])` and
//! `s_j = +1, −1, 0` on the e⁺, e⁻, mixed factors. The discrete operator is
//! therefore block diagonal in the e^± blades; each block is a scalar operator.
//! Derivatives are periodic Fourier differences, which avoid the spurious
//! near-zero modes central differences produce at the Nyquist frequency.
//!
//! A square matrix has index zero, so whenever the discrete annihilator has a
//! kernel its adjoint has one too: every sector opposite to the kernel sector
//! carries a zero mode that is the discrete shadow of the non-normalisable
//! `e^{+2π|z|²}`. Those modes do not decay, so kernel counts only use
//! eigenvectors whose boundary-shell amplitude is small relative to their peak
//! (the same decay invariant every field obeys).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::connections::{x_laplacian_at, y_laplacian_at};
use crate::error::{Error, Result};
use crate::exterior::{from_pm_basis, to_pm_basis, Blade, GradedValue};
use crate::field::{complex_coords, sample, Deriv, DerivScheme, Field, Grid};
use crate::math::{C64, I, ONE, PI, TWO_PI, ZERO};
use crate::torus::TorusData;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OscSide {
    X,
    Y,
}

/// Scalar operator of one blade sector.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    pub grid: Grid,
    pub side: OscSide,
    pub kappa: i32,
    pub pattern: Vec<i32>,
    shift: Vec<C64>,
    beta: Vec<C64>,
    deriv: Deriv,
    pot: Vec<f64>,
    coords: Vec<Vec<f64>>,
}

/// Canonical per-coordinate sign pattern with `Σ s_j = κ`.
pub fn sector_pattern(g: usize, kappa: i32) -> Result<Vec<i32>> {
    if kappa.unsigned_abs() as usize > g {
        return Err(Error::Config(format!("sector k-l = {kappa} impossible at g = {g}")));
    }
    let s = kappa.signum();
    Ok((0..g).map(|j| if (j as i32) < kappa.abs() { s } else { 0 }).collect())
}

impl SectorOperator {
    fn build(t: &TorusData, grid: &Grid, side: OscSide, shift: Vec<C64>, beta: Vec<C64>, kappa: i32) -> Result<Self> {
        if grid.dim != t.dim() {
            return Err(Error::Dimension(format!("grid dimension {} != 2g = {}", grid.dim, t.dim())));
        }
        let pattern = sector_pattern(t.g, kappa)?;
        let deriv = Deriv::new(grid, DerivScheme::Fourier);
        let pot = sample(grid, |v| {
            let z = complex_coords(v);
            let r2: f64 = z.iter().zip(&shift).map(|(a, b)| (a - b).norm_sqr()).sum();
            C64::new(4.0 * PI * PI * r2, 0.0)
        })
        .into_iter()
        .map(|c| c.re)
        .collect();
        let coords = (0..grid.dim).map(|a| sample(grid, |v| C64::new(v[a], 0.0)).into_iter().map(|c| c.re).collect()).collect();
        Ok(SectorOperator { grid: grid.clone(), side, kappa, pattern, shift, beta, deriv, pot, coords })
    }

    /// Sector of Δ⁰ for 𝕏⁰ at the lattice point λ (real coordinates).
    pub fn x_side(t: &TorusData, grid: &Grid, lam: &[f64], kappa: i32) -> Result<Self> {
        Self::build(t, grid, OscSide::X, vec![ZERO; t.g], t.b_j_real(lam), kappa)
    }

    /// Sector of □⁰ for 𝕐⁰+Φ at w.
    pub fn y_side(t: &TorusData, grid: &Grid, w: &[f64], kappa: i32) -> Result<Self> {
        Self::build(t, grid, OscSide::Y, complex_coords(w), t.b_j_real(w), kappa)
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn shift(&self) -> &[C64] {
        &self.shift
    }

    fn commutator_term(&self, f: &[C64], j: usize) -> Vec<C64> {
        let mut out = vec![ZERO; f.len()];
        for a in [2 * j, 2 * j + 1] {
            let x = &self.coords[a];
            let xf: Vec<C64> = f.iter().zip(x).map(|(v, c)| *v * *c).collect();
            let d_xf = self.deriv.partial(&xf, a);
            let df = self.deriv.partial(f, a);
            for i in 0..f.len() {
                out[i] += (d_xf[i] - df[i] * x[i]) * 0.5;
            }
        }
        out
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let g = self.pattern.len();
        let mut out: Vec<C64> = f.iter().zip(&self.pot).map(|(v, p)| *v * *p).collect();
        let sign = match self.side {
            OscSide::X => 1.0,
            OscSide::Y => -1.0,
        };
        for j in 0..g {
            let b = self.beta[j];
            let m2: Vec<C64> = self.deriv.dbar(f, j).into_iter().zip(f).map(|(d, v)| d + *v * (I * TWO_PI * b.conj())).collect();
            let dm = self.deriv.dholo(&m2, j);
            for i in 0..f.len() {
                out[i] += -dm[i] - m2[i] * (I * TWO_PI * b);
            }
            if self.pattern[j] != 0 {
                let c = self.commutator_term(f, j);
                let k = sign * TWO_PI * self.pattern[j] as f64;
                for i in 0..f.len() {
                    out[i] += c[i] * k;
                }
            }
        }
        out
    }

    /// Dense matrix, column by column.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for c in 0..n {
            e[c] = ONE;
            let col = self.apply(&e);
            for r in 0..n {
                m[(r, c)] = col[r];
            }
            e[c] = ZERO;
        }
        m
    }
}

/// Error unless an operator of dimension `n` fits the configured budget.
pub fn check_size(n: usize, budget: usize) -> Result<()> {
    if n > budget {
        return Err(Error::Size { size: n, budget });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    /// `‖A v − θ v‖` per pair.
    pub residuals: Vec<f64>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest `k` eigenpairs of a Hermitian operator by Lanczos with full
/// reorthogonalisation (at most `max_iter` steps).
pub fn lanczos_lowest(op: &dyn Fn(&[C64]) -> Vec<C64>, n: usize, k: usize, max_iter: usize) -> EigenResult {
    let m_max = max_iter.min(n).max(k);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // deterministic, generic start vector
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.5 * libm::sin(0.7 * i as f64), 0.3 * libm::cos(1.3 * i as f64))).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    for it in 0..m_max {
        let mut w = op(&v);
        let a = dot(&v, &w).re;
        alpha.push(a);
        q.push(v.clone());
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= *y * c);
            }
        }
        let b = norm(&w);
        if it + 1 == m_max || b < 1e-12 {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    let m = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alpha[i];
        if i + 1 < m {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = tri.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut res = EigenResult { values: vec![], vectors: vec![], residuals: vec![] };
    for &c in order.iter().take(k) {
        let mut x = vec![ZERO; n];
        for (i, qi) in q.iter().enumerate() {
            let s = eig.eigenvectors[(i, c)];
            x.iter_mut().zip(qi).for_each(|(a, b)| *a += *b * s);
        }
        let theta = eig.eigenvalues[c];
        let ax = op(&x);
        let r: Vec<C64> = ax.iter().zip(&x).map(|(a, b)| *a - *b * theta).collect();
        res.values.push(theta);
        res.residuals.push(norm(&r) / norm(&x).max(1e-300));
        res.vectors.push(x);
    }
    res
}

/// Lowest `k` eigenpairs of a dense Hermitian matrix (oracle).
pub fn dense_lowest(m: &DMatrix<C64>, k: usize) -> EigenResult {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut res = EigenResult { values: vec![], vectors: vec![], residuals: vec![] };
    for &c in order.iter().take(k) {
        let v: Vec<C64> = eig.eigenvectors.column(c).iter().copied().collect();
        let x = DVector::from_column_slice(&v);
        let r = &herm * &x - &x * C64::new(eig.eigenvalues[c], 0.0);
        res.values.push(eig.eigenvalues[c]);
        res.residuals.push(r.norm());
        res.vectors.push(v);
    }
    res
}

/// `|⟨a, b⟩| / (‖a‖ ‖b‖)`.
pub fn overlap(a: &[C64], b: &[C64]) -> f64 {
    dot(a, b).norm() / (norm(a) * norm(b)).max(1e-300)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorSpectrum {
    pub kappa: i32,
    pub eigenvalues: Vec<f64>,
    /// Boundary-shell sup over peak, per eigenvector.
    pub decay: Vec<f64>,
    pub max_residual: f64,
    /// Decaying eigenvectors with eigenvalue below ε_disc.
    pub below_eps: usize,
    /// All eigenvalues below ε_disc, decaying or not.
    pub below_eps_raw: usize,
}

impl SectorSpectrum {
    /// Eigenvalues of eigenvectors that satisfy the decay invariant.
    pub fn resolved(&self, decay_tol: f64) -> Vec<f64> {
        self.eigenvalues.iter().zip(&self.decay).filter(|(_, d)| **d < decay_tol).map(|(e, _)| *e).collect()
    }
}

/// Boundary-shell (two layers) sup of `v` relative to its peak.
pub fn decay_ratio(grid: &Grid, v: &[C64]) -> f64 {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let mut b: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        if !grid.is_interior(i, 2) {
            b = b.max(x.norm());
        }
    }
    b / peak
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub side: OscSide,
    pub kernel_kappa: i32,
    pub eps_disc: f64,
    pub sectors: Vec<SectorSpectrum>,
    /// Normalised overlap of the kernel vector with the sampled generator.
    pub overlap: f64,
}

impl KernelReport {
    /// Exactly one small eigenvalue in the kernel sector and none elsewhere.
    pub fn localized(&self) -> bool {
        self.sectors.iter().all(|s| s.below_eps == usize::from(s.kappa == self.kernel_kappa))
    }
}

/// Eigensolver settings for [`kernel_analysis`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParams {
    /// Eigenpairs computed per sector.
    pub num_eigenvalues: usize,
    /// Largest operator dimension allowed.
    pub budget: usize,
    pub max_iter: usize,
    /// Eigenvectors with boundary/peak ratio above this are not counted.
    pub decay_tol: f64,
}

/// Spectral shadow of the kernel theorems at one λ (X side) or w (Y side):
/// lowest eigenvalues in every listed sector, ε_disc = 10% of the first
/// resolved gap in the kernel sector (k−l = −g on X, +g on Y), and the overlap
/// of the lowest resolved kernel-sector vector with the sampled generator.
pub fn kernel_analysis(t: &TorusData, grid: &Grid, side: OscSide, param: &[f64], sectors: &[i32], sp: &SpectralParams) -> Result<KernelReport> {
    let (m, budget, max_iter) = (sp.num_eigenvalues, sp.budget, sp.max_iter);
    check_size(grid.len(), budget)?;
    let g = t.g as i32;
    let kernel_kappa = match side {
        OscSide::X => -g,
        OscSide::Y => g,
    };
    let mut list: Vec<i32> = sectors.to_vec();
    if !list.contains(&kernel_kappa) {
        list.push(kernel_kappa);
    }
    let mut spectra = Vec::new();
    let mut kernel_vec = Vec::new();
    for &kappa in &list {
        let op = match side {
            OscSide::X => SectorOperator::x_side(t, grid, param, kappa)?,
            OscSide::Y => SectorOperator::y_side(t, grid, param, kappa)?,
        };
        let res = lanczos_lowest(&|f| op.apply(f), op.dim(), m.max(2), max_iter);
        let decay: Vec<f64> = res.vectors.iter().map(|v| decay_ratio(grid, v)).collect();
        if kappa == kernel_kappa {
            if let Some(k) = decay.iter().position(|d| *d < sp.decay_tol) {
                kernel_vec = res.vectors[k].clone();
            }
        }
        spectra.push(SectorSpectrum {
            kappa,
            max_residual: res.residuals.iter().copied().fold(0.0, f64::max),
            eigenvalues: res.values,
            decay,
            below_eps: 0,
            below_eps_raw: 0,
        });
    }
    let ks = spectra.iter().find(|s| s.kappa == kernel_kappa).expect("kernel sector present");
    let resolved = ks.resolved(sp.decay_tol);
    if resolved.len() < 2 {
        return Err(Error::Precondition(format!(
            "fewer than two decaying eigenvectors in sector {kernel_kappa}; raise num_eigenvalues"
        )));
    }
    let eps_disc = 0.1 * (resolved[1] - resolved[0]);
    for s in &mut spectra {
        s.below_eps = s.resolved(sp.decay_tol).iter().filter(|&&e| e < eps_disc).count();
        s.below_eps_raw = s.eigenvalues.iter().filter(|&&e| e < eps_disc).count();
    }
    let generator = match side {
        OscSide::X => {
            let beta = t.b_j_real(param);
            sample(grid, |v| {
                let z = complex_coords(v);
                let e: C64 = z.iter().zip(&beta).map(|(zj, bj)| -TWO_PI * (zj.norm_sqr() + I * bj * zj + I * (bj * zj).conj())).sum();
                e.exp()
            })
        }
        OscSide::Y => sample(grid, |v| crate::connections::a_value(t, v, param)),
    };
    Ok(KernelReport { side, kernel_kappa, eps_disc, sectors: spectra, overlap: overlap(&kernel_vec, &generator) })
}

/// Applies the full blade-valued Laplacian to `f · e_I⁺∧e_J⁻` and returns
/// (largest component outside that pm blade, mismatch against the sector
/// operator), both relative to the input size.
pub fn block_diagonality_defect(t: &TorusData, grid: &Grid, side: OscSide, param: &[f64], f: &[C64], plus: u32, minus: u32) -> Result<(f64, f64)> {
    let g = t.g;
    let d = Deriv::new(grid, DerivScheme::Fourier);
    let pm = Blade::new(plus, minus, 0);
    let std = from_pm_basis(&GradedValue::blade(g, pm, ONE));
    let mut field = Field::zeros(grid, g);
    for (&b, &s) in &std.terms {
        field.comps.insert(b, f.iter().map(|x| *x * s).collect());
    }
    let out = match side {
        OscSide::X => x_laplacian_at(t, &d, param, &field),
        OscSide::Y => y_laplacian_at(t, &d, param, &field),
    };
    // per-coordinate pattern of this blade
    let pattern: Vec<i32> = (0..g)
        .map(|j| {
            let (p, m) = (plus >> j & 1, minus >> j & 1);
            p as i32 - m as i32
        })
        .collect();
    let kappa: i32 = pattern.iter().sum();
    let op = match side {
        OscSide::X => SectorOperator::x_side(t, grid, param, kappa)?,
        OscSide::Y => SectorOperator::y_side(t, grid, param, kappa)?,
    };
    let op = SectorOperator { pattern, ..op };
    let expect = op.apply(f);
    let scale = f.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let mut off: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    for i in 0..grid.len() {
        let v = to_pm_basis(&out.value_at(i));
        for (&b, &s) in &v.terms {
            if b == pm {
                mismatch = mismatch.max((s - expect[i]).norm());
            } else {
                off = off.max(s.norm());
            }
        }
        if !v.terms.contains_key(&pm) {
            mismatch = mismatch.max(expect[i].norm());
        }
    }
    Ok((off / scale, mismatch / scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid, c: [f64; 2]) -> Vec<C64> {
        sample(grid, |v| C64::new(libm::exp(-2.0 * ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2))), v[0]))
    }

    #[test]
    fn sector_operator_is_hermitian_and_matches_full_laplacian() {
        let t = TorusData::theta(0.27);
        let grid = Grid::new(2, 3.0, 0.4).unwrap();
        let f = gaussian(&grid, [0.3, -0.2]);
        for side in [OscSide::X, OscSide::Y] {
            let param = match side {
                OscSide::X => t.lattice_point(&[1, -1]),
                OscSide::Y => vec![0.3, 0.1],
            };
            for (p, m) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (off, mis) = block_diagonality_defect(&t, &grid, side, &param, &f, p, m).unwrap();
                assert!(off < 1e-11 && mis < 1e-11, "{side:?} {p}{m}: {off:e} {mis:e}");
            }
            let op = SectorOperator::x_side(&t, &grid, &param, -1).unwrap();
            let a = op.dense();
            assert!((&a - a.adjoint()).norm() < 1e-9 * a.norm());
        }
    }

    #[test]
    fn lanczos_agrees_with_dense_oracle() {
        let t = TorusData::theta(0.1);
        let grid = Grid::new(2, 3.0, 0.3).unwrap();
        let op = SectorOperator::x_side(&t, &grid, &[1.0, 0.0], 0).unwrap();
        let dense = dense_lowest(&op.dense(), 4);
        let lz = lanczos_lowest(&|f| op.apply(f), op.dim(), 4, 300);
        for k in 0..4 {
            assert!((dense.values[k] - lz.values[k]).abs() < 1e-8 * dense.values[k].abs().max(1.0), "{dense:?} {lz:?}");
        }
    }

    #[test]
    fn low_spectrum_follows_oscillator_levels() {
        let t = TorusData::theta(0.05);
        let grid = Grid::new(2, 3.0, 0.2).unwrap();
        let lam = t.lattice_point(&[1, 0]);
        let sp = SpectralParams { num_eigenvalues: 8, budget: 4000, max_iter: 400, decay_tol: 1e-2 };
        let rep = kernel_analysis(&t, &grid, OscSide::X, &lam, &[-1, 0, 1], &sp).unwrap();
        assert!(rep.localized(), "{rep:?}");
        assert!(rep.overlap > 0.99, "{}", rep.overlap);
        let s0 = rep.sectors.iter().find(|s| s.kappa == 0).unwrap();
        assert!((s0.resolved(1e-2)[0] - TWO_PI).abs() < 0.05 * TWO_PI);
        let sk = rep.sectors.iter().find(|s| s.kappa == -1).unwrap();
        assert!(sk.resolved(1e-2)[1] >= TWO_PI * 0.8);
        // the opposite sector has a non-decaying zero mode
        let s1 = rep.sectors.iter().find(|s| s.kappa == 1).unwrap();
        assert_eq!(s1.below_eps_raw, 1);
        let rep = kernel_analysis(&t, &grid, OscSide::Y, &[0.25, -0.4], &[-1, 0, 1], &sp).unwrap();
        assert!(rep.localized() && rep.overlap > 0.99, "{rep:?}");
    }

    #[test]
    fn size_budget() {
        assert!(matches!(check_size(10, 5), Err(Error::Size { .. })));
        assert!(check_size(5, 5).is_ok());
    }
}
