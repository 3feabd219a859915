//! Complex torus data: lattice, complex structure, constant B-field, the cocycle σ,
//! the (0,1)-form ω and the coefficient functions B_j.
//!
//! Complex chart: real coordinates are interleaved `(x₁, y₁, …)` and `z_j = x_j + i y_j`
//! (standard `J`). The B-field is decomposed as
//!
//! ```text
//! B(u,v) = Σ b_ij u_i v_j + conj(b_ij u_i v_j) + c_ij (u_i conj(v_j) − v_i conj(u_j))
//! ```
//!
//! with `b` skew-symmetric and `c` skew-Hermitian.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::{Blade, GradedValue};
use crate::field::{complex_coords, Grid};
use crate::math::{e2pii, C64, I, TWO_PI, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct TorusData {
    pub g: usize,
    /// Columns are the lattice generators.
    pub lattice: DMatrix<f64>,
    pub lattice_inv: DMatrix<f64>,
    /// Real antisymmetric matrix of B in standard real coordinates.
    pub b_real: DMatrix<f64>,
    /// (2,0) coefficients, skew-symmetric.
    pub b: DMatrix<C64>,
    /// (1,1) coefficients, skew-Hermitian.
    pub c: DMatrix<C64>,
}

/// `D′ = (J + i)/(2i)` and `D″ = (−J + i)/(2i)` on `V ⊗ ℂ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexProjection {
    pub d1: DMatrix<C64>,
    pub d2: DMatrix<C64>,
}

/// Standard complex structure on interleaved coordinates.
pub fn standard_j(g: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * g, 2 * g);
    for k in 0..g {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

impl ComplexProjection {
    pub fn new(g: usize) -> Self {
        let j = standard_j(g).map(|x| C64::new(x, 0.0));
        let id = DMatrix::<C64>::identity(2 * g, 2 * g);
        let inv2i = C64::new(0.0, -0.5);
        let d1 = (&j + &id * I) * inv2i;
        let d2 = (-&j + &id * I) * inv2i;
        ComplexProjection { d1, d2 }
    }

    /// Coordinates of `D′(v)` in the basis `f_j = (e_{x_j} − i e_{y_j})/2`; for
    /// real `v` these are the complex coordinates `z_j`.
    pub fn dprime_coords(&self, v: &[C64]) -> Vec<C64> {
        let w = &self.d1 * nalgebra::DVector::from_column_slice(v);
        (0..v.len() / 2).map(|k| w[2 * k] * 2.0).collect()
    }
}

impl TorusData {
    /// `lattice_basis[k]` is the k-th generator; `b_entries` is row-major 2g×2g.
    pub fn new(g: usize, lattice_basis: &[Vec<f64>], b_entries: &[Vec<f64>]) -> Result<Self> {
        let n = 2 * g;
        if g == 0 || g > crate::exterior::MAX_G {
            return Err(Error::Config(format!("g = {g} out of range")));
        }
        if lattice_basis.len() != n || lattice_basis.iter().any(|c| c.len() != n) {
            return Err(Error::Config(format!("lattice_basis must be {n} vectors of length {n}")));
        }
        if b_entries.len() != n || b_entries.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("B must be a {n}x{n} matrix")));
        }
        let lattice = DMatrix::from_fn(n, n, |r, c| lattice_basis[c][r]);
        let det = lattice.clone().lu().determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::Config(format!("lattice basis is singular (det = {det:e})")));
        }
        let lattice_inv = lattice.clone().try_inverse().ok_or_else(|| Error::Config("lattice basis is singular".into()))?;
        let b_real = DMatrix::from_fn(n, n, |r, c| b_entries[r][c]);
        for r in 0..n {
            for c in 0..n {
                if (b_real[(r, c)] + b_real[(c, r)]).abs() > 1e-12 {
                    return Err(Error::Validation(format!("B is not antisymmetric at ({r},{c})")));
                }
            }
        }
        let b_real = (&b_real - b_real.transpose()) * 0.5;
        // x = T (z, z̄):  x_k = (z_k + z̄_k)/2,  y_k = (z_k − z̄_k)/(2i)
        let mut t = DMatrix::<C64>::zeros(n, n);
        for k in 0..g {
            t[(2 * k, k)] = C64::new(0.5, 0.0);
            t[(2 * k, g + k)] = C64::new(0.5, 0.0);
            t[(2 * k + 1, k)] = C64::new(0.0, -0.5);
            t[(2 * k + 1, g + k)] = C64::new(0.0, 0.5);
        }
        let bc = b_real.map(|x| C64::new(x, 0.0));
        let nmat = t.transpose() * bc * &t;
        let b0 = nmat.view((0, 0), (g, g)).into_owned();
        let c0 = nmat.view((0, g), (g, g)).into_owned();
        let b = (&b0 - b0.transpose()) * C64::new(0.5, 0.0);
        let c = (&c0 - c0.adjoint()) * C64::new(0.5, 0.0);
        Ok(TorusData { g, lattice, lattice_inv, b_real, b, c })
    }

    /// Standard lattice ℤ^{2g} with the given B matrix.
    pub fn standard(g: usize, b_entries: &[Vec<f64>]) -> Result<Self> {
        let basis: Vec<Vec<f64>> = (0..2 * g).map(|k| (0..2 * g).map(|r| if r == k { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(g, &basis, b_entries)
    }

    /// g = 1 with `B = θ e₁^∨ ∧ e₂^∨`.
    pub fn theta(theta: f64) -> Self {
        Self::standard(1, &[vec![0.0, theta], vec![-theta, 0.0]]).expect("valid")
    }

    pub fn dim(&self) -> usize {
        2 * self.g
    }

    /// Lattice point `Σ n_k L_k` in real coordinates.
    pub fn lattice_point(&self, n: &[i64]) -> Vec<f64> {
        (0..self.dim()).map(|r| (0..self.dim()).map(|k| self.lattice[(r, k)] * n[k] as f64).sum()).collect()
    }

    /// Lattice coordinates `L⁻¹ v`.
    pub fn lattice_coords(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|r| (0..self.dim()).map(|k| self.lattice_inv[(r, k)] * v[k]).sum()).collect()
    }

    /// Real bilinear form `uᵀ B v`.
    pub fn b_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for r in 0..n {
            if u[r] == 0.0 {
                continue;
            }
            for c in 0..n {
                s += u[r] * self.b_real[(r, c)] * v[c];
            }
        }
        s
    }

    /// B evaluated through the (b, c) decomposition on complex coordinates.
    pub fn b_complex(&self, u: &[C64], v: &[C64]) -> C64 {
        let mut s = ZERO;
        for i in 0..self.g {
            for j in 0..self.g {
                let t = self.b[(i, j)] * u[i] * v[j];
                s += t + t.conj() + self.c[(i, j)] * (u[i] * v[j].conj() - v[i] * u[j].conj());
            }
        }
        s
    }

    /// `σ(u, v) = e^{2πi B(u,v)}`.
    pub fn sigma(&self, u: &[f64], v: &[f64]) -> C64 {
        e2pii(self.b_form(u, v))
    }

    /// `σ(λ₂,v) σ(λ₁+λ₂,v)^{-1} σ(λ₁,λ₂+v) σ(λ₁,λ₂)^{-1}`.
    pub fn delta_sigma(&self, l1: &[f64], l2: &[f64], v: &[f64]) -> C64 {
        let s12: Vec<f64> = l1.iter().zip(l2).map(|(a, b)| a + b).collect();
        let l2v: Vec<f64> = l2.iter().zip(v).map(|(a, b)| a + b).collect();
        self.sigma(l2, v) / self.sigma(&s12, v) * self.sigma(l1, &l2v) / self.sigma(l1, l2)
    }

    /// Coefficients of `ω(v) = Σ (conj(b_ij) z̄_i + c_ij z_i) dz̄_j`.
    pub fn omega_at(&self, v: &[f64]) -> Vec<C64> {
        let z = complex_coords(v);
        (0..self.g).map(|j| (0..self.g).map(|i| self.b[(i, j)].conj() * z[i].conj() + self.c[(i, j)] * z[i]).sum()).collect()
    }

    /// `B_j(λ) = Σ_i λ_i b_ij + conj(λ_i c_ij)` on complex coordinates.
    pub fn b_j(&self, z: &[C64]) -> Vec<C64> {
        (0..self.g).map(|j| (0..self.g).map(|i| z[i] * self.b[(i, j)] + (z[i] * self.c[(i, j)]).conj()).sum()).collect()
    }

    /// `B_j` of a real vector.
    pub fn b_j_real(&self, v: &[f64]) -> Vec<C64> {
        self.b_j(&complex_coords(v))
    }

    /// `B^{0,2} = ∂̄ω = Σ_{i,j} conj(b_ij) dz̄_i ∧ dz̄_j`.
    pub fn b02(&self) -> GradedValue {
        let mut v = GradedValue::zero(self.g);
        for i in 0..self.g {
            for j in (i + 1)..self.g {
                v.add_term(Blade::new(0, (1 << i) | (1 << j), 0), self.b[(i, j)].conj() * 2.0);
            }
        }
        v
    }

    /// Max over real basis pairs of |B(e_r, e_s) − reassembled value|.
    pub fn reassembly_residual(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for r in 0..n {
            for s in 0..n {
                let mut er = vec![0.0; n];
                let mut es = vec![0.0; n];
                er[r] = 1.0;
                es[s] = 1.0;
                let z = self.b_complex(&complex_coords(&er), &complex_coords(&es));
                m = m.max((z - self.b_real[(r, s)]).norm());
            }
        }
        m
    }

    /// Whether every B-dependent phase is trivial.
    pub fn is_untwisted(&self) -> bool {
        self.b_real.iter().all(|x| *x == 0.0)
    }
}

/// Max residuals of the two displayed σ-derivative identities on interior grid
/// points, using central differences for ∂̄ on analytic samples:
/// `2πi(ω − r_λ^*ω)σ(λ,·) + ∂̄σ(λ,·)` and `2πi(ω − l_λ^*ω)σ(λ,·) − ∂̄σ(λ,·)`
/// with `r_λ(v) = v + λ`, `l_λ(v) = v − λ`.
pub fn dbar_sigma_identities(t: &TorusData, lambda: &[f64], grid: &Grid) -> (f64, f64) {
    let h = grid.h;
    let n = t.dim();
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for idx in 0..grid.len() {
        grid.point_into(idx, &mut v);
        let s = t.sigma(lambda, &v);
        let om = t.omega_at(&v);
        let vp: Vec<f64> = v.iter().zip(lambda).map(|(a, b)| a + b).collect();
        let vm: Vec<f64> = v.iter().zip(lambda).map(|(a, b)| a - b).collect();
        let (omr, oml) = (t.omega_at(&vp), t.omega_at(&vm));
        for j in 0..t.g {
            let mut at = |axis: usize, s: f64| {
                w.copy_from_slice(&v);
                w[axis] += s * h;
                t.sigma(lambda, &w)
            };
            let dx = (at(2 * j, 1.0) - at(2 * j, -1.0)) / (2.0 * h);
            let dy = (at(2 * j + 1, 1.0) - at(2 * j + 1, -1.0)) / (2.0 * h);
            let dbar = (dx + I * dy) * 0.5;
            let a = I * TWO_PI * (om[j] - omr[j]) * s + dbar;
            let b = I * TWO_PI * (om[j] - oml[j]) * s - dbar;
            r1 = r1.max(a.norm());
            r2 = r2.max(b.norm());
        }
    }
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_b(rng: &mut ChaCha8Rng, g: usize) -> Vec<Vec<f64>> {
        let n = 2 * g;
        let mut m = vec![vec![0.0; n]; n];
        for r in 0..n {
            for c in (r + 1)..n {
                let x = rng.gen_range(-1.0..1.0);
                m[r][c] = x;
                m[c][r] = -x;
            }
        }
        m
    }

    #[test]
    fn zero_form_decomposes_to_zero() {
        let t = TorusData::theta(0.0);
        assert_eq!(t.b[(0, 0)], ZERO);
        assert_eq!(t.c[(0, 0)], ZERO);
    }

    #[test]
    fn theta_form_decomposition_by_hand() {
        // B(u,v) = θ(u_x v_y − u_y v_x) = θ Im(conj(u) v) = (iθ/2)(u conj(v) − v conj(u))
        let theta = 0.3;
        let t = TorusData::theta(theta);
        assert!(t.b[(0, 0)].norm() < 1e-15);
        assert!((t.c[(0, 0)] - C64::new(0.0, theta / 2.0)).norm() < 1e-15);
        assert!(t.reassembly_residual() < 1e-12);
    }

    #[test]
    fn g2_e2_e4_entry_gives_b02() {
        let mut m = vec![vec![0.0; 4]; 4];
        m[1][3] = 0.7;
        m[3][1] = -0.7;
        let t = TorusData::standard(2, &m).unwrap();
        assert!(t.b[(0, 1)].norm() > 0.1);
        assert!(t.reassembly_residual() < 1e-12);
        assert!(t.b02().max_abs() > 0.1);
    }

    #[test]
    fn decomposition_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in 1..=3 {
            for _ in 0..20 {
                let t = TorusData::standard(g, &random_b(&mut rng, g)).unwrap();
                assert!(t.reassembly_residual() < 1e-12);
                for i in 0..g {
                    for j in 0..g {
                        assert_eq!(t.b[(i, j)], -t.b[(j, i)]);
                        assert_eq!(t.c[(i, j)], -t.c[(j, i)].conj());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(TorusData::standard(1, &[vec![0.0, 1.0], vec![0.5, 0.0]]), Err(Error::Validation(_))));
        let basis = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(TorusData::new(1, &basis, &[vec![0.0; 2], vec![0.0; 2]]), Err(Error::Config(_))));
    }

    #[test]
    fn sigma_cocycle_properties() {
        let t = TorusData::theta(0.3);
        let l1 = t.lattice_point(&[1, 0]);
        let l2 = t.lattice_point(&[0, 1]);
        assert!((t.sigma(&l1, &l2) - e2pii(0.3)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-3i64..=3) as f64).collect();
            let b: Vec<f64> = (0..2).map(|_| rng.gen_range(-3i64..=3) as f64).collect();
            let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            assert!((t.delta_sigma(&a, &b, &v) - 1.0).norm() < 1e-12);
            assert!((t.sigma(&a, &a) - 1.0).norm() < 1e-15);
            assert!((t.sigma(&a, &b) * t.sigma(&b, &a) - 1.0).norm() < 1e-12);
            let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            assert!((t.sigma(&ab, &v) - t.sigma(&a, &v) * t.sigma(&b, &v)).norm() < 1e-12);
            assert!((t.sigma(&a, &v).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn omega_and_b_j_at_g1() {
        let t = TorusData::theta(0.3);
        let v = [0.4, -1.1];
        let z = C64::new(0.4, -1.1);
        assert!((t.omega_at(&v)[0] - t.c[(0, 0)] * z).norm() < 1e-15);
        let lam = C64::new(2.0, 1.0);
        assert!((t.b_j(&[lam])[0] - (lam * t.c[(0, 0)]).conj()).norm() < 1e-15);
        let s = 1.7;
        assert!((t.b_j(&[lam * s])[0] - t.b_j(&[lam])[0] * s).norm() < 1e-14);
        assert!(TorusData::theta(0.0).omega_at(&v)[0].norm() == 0.0);
    }

    #[test]
    fn dbar_omega_is_b02() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = TorusData::standard(2, &random_b(&mut rng, 2)).unwrap();
        // ω is linear, so central differences are exact up to rounding
        let h = 0.1;
        let v = [0.3, -0.2, 0.5, 0.1];
        let mut d = [[ZERO; 2]; 2];
        for i in 0..2 {
            let at = |axis: usize, s: f64| {
                let mut w = v;
                w[axis] += s * h;
                t.omega_at(&w)
            };
            let (xp, xm, yp, ym) = (at(2 * i, 1.0), at(2 * i, -1.0), at(2 * i + 1, 1.0), at(2 * i + 1, -1.0));
            for j in 0..2 {
                let dx = (xp[j] - xm[j]) / (2.0 * h);
                let dy = (yp[j] - ym[j]) / (2.0 * h);
                d[i][j] = (dx + I * dy) * 0.5;
            }
        }
        // ∂̄ω = Σ_{i,j} ∂_i ω_j dz̄_i ∧ dz̄_j → coefficient of dz̄₁∧dz̄₂ is ∂₁ω₂ − ∂₂ω₁
        let coef = d[0][1] - d[1][0];
        assert!((coef - t.b02().coeff(Blade::new(0, 0b11, 0))).norm() < 1e-12);
    }

    #[test]
    fn sigma_derivative_identities_converge() {
        let t = TorusData::theta(0.3);
        let lam = t.lattice_point(&[1, 0]);
        let coarse = dbar_sigma_identities(&t, &lam, &Grid::new(2, 1.0, 0.05).unwrap());
        let fine = dbar_sigma_identities(&t, &lam, &Grid::new(2, 1.0, 0.025).unwrap());
        assert!(coarse.0 < 0.05 && coarse.1 < 0.05);
        let ratio = coarse.0 / fine.0;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        let zero = dbar_sigma_identities(&TorusData::theta(0.0), &lam, &Grid::new(2, 1.0, 0.1).unwrap());
        assert_eq!(zero, (0.0, 0.0));
        let l0 = dbar_sigma_identities(&t, &[0.0, 0.0], &Grid::new(2, 1.0, 0.1).unwrap());
        assert!(l0.0 < 1e-15 && l0.1 < 1e-15);
    }

    #[test]
    fn complex_projection_invariants() {
        let p = ComplexProjection::new(2);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((&p.d1 + &p.d2 - &id).norm() < 1e-15);
        assert!((&p.d1 * &p.d1 - &p.d1).norm() < 1e-15);
        let v = [C64::new(0.3, 1.0), C64::new(-0.5, 0.2), C64::new(1.5, -0.7), C64::new(0.1, 0.9)];
        let dv = &p.d1 * nalgebra::DVector::from_column_slice(&v);
        let vbar: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        let d2vbar = &p.d2 * nalgebra::DVector::from_column_slice(&vbar);
        assert!((dv.map(|z| z.conj()) - d2vbar).norm() < 1e-15);
        let real = [C64::new(0.3, 0.0), C64::new(-0.5, 0.0), C64::new(1.5, 0.0), C64::new(0.1, 0.0)];
        let coords = p.dprime_coords(&real);
        assert!((coords[0] - C64::new(0.3, -0.5)).norm() < 1e-15);
        assert!((coords[1] - C64::new(1.5, 0.1)).norm() < 1e-15);
    }
}
