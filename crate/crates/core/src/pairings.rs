//! The integral pairing `α: 𝒬 ⊗ 𝒫 → 𝒜^{0,•}(Λ;σ)` on the model
//! `𝒳 ≅ 𝒮(V × Λ)`, the Stokes check, and the diagonal pairing β.
//!
//! α keeps the top dz̄-degree of `φ(z+λ, −λ) σ(λ,z)^{-1}`, moves `dz̄₁∧…∧dz̄_g`
//! to the right and pairs it with `dz₁∧…∧dz_g`. Since
//! `dz̄₁…dz̄_g ∧ dz₁…dz_g = (−1)^{g(g−1)/2} (2i)^g dv`, the `(2i)^{-g}`
//! normalisation cancels and only a sign survives. The remaining dζ̄ and dτ̄
//! factors both become the output dτ̄.

use alloc::vec;
use alloc::vec::Vec;

use crate::connections::{lattice_steps, x_full, WindowField};
use crate::error::{Error, Result};
use crate::exterior::{Blade, GradedValue};
use crate::field::{complex_coords, sample, Deriv, Field, Grid};
use crate::math::{C64, I, ONE, TWO_PI, ZERO};
use crate::nc_algebra::{dbar_nc, dolbeault_mul, NCDolbeaultElement, NCTorusElement};
use crate::torus::TorusData;

/// Trapezoidal quadrature on the truncated box.
///
/// Fields are assumed negligible on the boundary, so the end-point weights
/// do not matter and every node carries `h^{2g}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub grid: Grid,
}

impl Quadrature {
    pub fn new(grid: &Grid) -> Self {
        Quadrature { grid: grid.clone() }
    }

    pub fn integrate(&self, vals: &[C64]) -> C64 {
        vals.iter().sum::<C64>() * self.grid.cell_volume()
    }

    /// `(2i)^{-g}`.
    pub fn normalization(g: usize) -> C64 {
        (C64::new(0.0, 2.0)).powi(-(g as i32))
    }

    /// `|∫ e^{−π|v|²/s²} dv − s^{2g}|`.
    pub fn gaussian_residual(&self, width: f64) -> f64 {
        let vals = sample(&self.grid, |v| {
            let r2: f64 = v.iter().map(|x| x * x).sum();
            C64::new(libm::exp(-core::f64::consts::PI * r2 / (width * width)), 0.0)
        });
        (self.integrate(&vals).re - libm::pow(width, self.grid.dim as f64)).abs()
    }
}

fn mask_wedge(a: u32, b: u32) -> Option<(u32, f64)> {
    Blade::new(a, 0, 0).wedge(Blade::new(b, 0, 0)).map(|(bl, s)| (bl.zeta, s))
}

/// Output mask and real factor contributed by one blade to the top-degree
/// pairing (including `(2i)^{-g}`), or `None` if the blade is not top in dz̄.
pub fn top_pairing(g: usize, b: Blade) -> Option<(u32, f64)> {
    let full = (1u32 << g) - 1;
    if b.zbar != full {
        return None;
    }
    let (mask, s) = mask_wedge(b.zeta, b.tau)?;
    let u = b.tau.count_ones() as usize;
    let e = g * (g - 1) / 2 + g * u;
    Some((mask, if e % 2 == 0 { s } else { -s }))
}

/// `φ(z, λ) = q(z) ∧ p(z + λ)` over the window (zero where `z+λ` leaves the box).
///
/// Components with sup below `tail_tol` are dropped; a larger one on the
/// window edge means the window is too small.
pub fn tensor_field(t: &TorusData, q: &Field, p: &Field, window: i64, tail_tol: f64) -> Result<WindowField> {
    let mut out = WindowField::zeros(&q.grid, t.g, window);
    for n in crate::connections::lattice_window(t.g, window) {
        let steps = lattice_steps(t, &q.grid, &n)?;
        let shifted = p.translate(&steps);
        let mut f = Field::zeros(&q.grid, t.g);
        for (&bq, vq) in &q.comps {
            for (&bp, vp) in &shifted.comps {
                if let Some((b, s)) = bq.wedge(bp) {
                    let c = f.comp_mut(b);
                    for i in 0..c.len() {
                        c[i] += vq[i] * vp[i] * s;
                    }
                }
            }
        }
        let m = f.max_abs();
        if m <= tail_tol {
            continue;
        }
        if n.iter().any(|x| x.abs() == window) {
            return Err(Error::Tail { value: m, tol: tail_tol });
        }
        out.insert(n, f.prune())?;
    }
    Ok(out)
}

/// `α(φ) = Σ_λ (2i)^{-g} [∫ φ(z+λ, −λ) σ(λ,z)^{-1} ∧ dz₁∧…∧dz_g] [λ]`.
///
/// Every component must be below `boundary_tol` on the boundary shell, since
/// the shift by λ would otherwise drop mass.
pub fn alpha(t: &TorusData, phi: &WindowField, boundary_tol: f64) -> Result<NCDolbeaultElement> {
    phi.check_boundary(boundary_tol)?;
    let quad = Quadrature::new(&phi.grid);
    let mut out = NCDolbeaultElement::zero(t.g);
    for (n, f) in &phi.comps {
        let lam_n: Vec<i64> = n.iter().map(|x| -x).collect();
        let lam = t.lattice_point(&lam_n);
        let steps = phi.grid.steps_of(&lam)?;
        let mut phase: Option<Vec<C64>> = None;
        for (&b, vals) in &f.comps {
            let Some((mask, s)) = top_pairing(t.g, b) else { continue };
            let ph = phase.get_or_insert_with(|| sample(&phi.grid, |v| t.sigma(&lam, v).conj()));
            let mut shifted = vec![ZERO; vals.len()];
            for (i, d) in shifted.iter_mut().enumerate() {
                if let Some(k) = phi.grid.shift(i, &steps) {
                    *d = vals[k] * ph[i];
                }
            }
            let v = quad.integrate(&shifted) * s;
            let mut e = NCTorusElement::zero(t.g, phi.window);
            e.set(&lam_n, v)?;
            out = out.add(&NCDolbeaultElement::term(mask, e));
        }
    }
    Ok(out)
}

/// Right multiplication by `[μ]` in `𝒜^{0,•}(Λ;σ)`.
pub fn nc_right(t: &TorusData, x: &NCDolbeaultElement, mu: &[i64]) -> Result<NCDolbeaultElement> {
    dolbeault_mul(t, x, &NCDolbeaultElement::from_scalar(NCTorusElement::basis(t.g, mu)))
}

/// Left multiplication by `[μ]`.
pub fn nc_left(t: &TorusData, mu: &[i64], x: &NCDolbeaultElement) -> Result<NCDolbeaultElement> {
    dolbeault_mul(t, &NCDolbeaultElement::from_scalar(NCTorusElement::basis(t.g, mu)), x)
}

/// `‖α(φ·μ) − α(φ)·μ‖` (right) or `‖α(μ·φ) − μ·α(φ)‖` (left), relative to `‖α(φ)‖`.
pub fn alpha_module_residual(t: &TorusData, side: crate::connections::Side, mu: &[i64], phi: &WindowField, boundary_tol: f64) -> Result<f64> {
    use crate::connections::Side;
    let moved = crate::connections::x_module_action(t, side, mu, phi)?;
    let lhs = alpha(t, &moved, boundary_tol)?;
    let a = alpha(t, phi, boundary_tol)?;
    let rhs = match side {
        Side::Right => nc_right(t, &a, mu)?,
        Side::Left => nc_left(t, mu, &a)?,
    };
    Ok(lhs.sub(&rhs).max_abs() / a.max_abs().max(1e-300))
}

/// `‖α(𝕏φ) − ∂̄α(φ)‖`, absolute and relative to `‖α(φ)‖ + ‖∂̄α(φ)‖`.
pub fn alpha_chain_residual(t: &TorusData, d: &Deriv, phi: &WindowField, boundary_tol: f64) -> Result<(f64, f64)> {
    let lhs = alpha(t, &x_full(t, d, phi), boundary_tol)?;
    let a = alpha(t, phi, boundary_tol)?;
    let rhs = dbar_nc(t, &a);
    let abs = lhs.sub(&rhs).max_abs();
    Ok((abs, abs / (a.max_abs() + rhs.max_abs()).max(1e-300)))
}

/// Largest `|∫ ∂̄f ∧ dz₁∧…∧dz_g|` over the remaining dζ̄/dτ̄ factors, with
/// `∂̄` discretised by `d`. With central differences the sum telescopes, so
/// the residual is the boundary flux of `f`.
pub fn stokes_check(t: &TorusData, d: &Deriv, f: &Field) -> f64 {
    let df = crate::connections::dbar_field(d, f);
    let quad = Quadrature::new(&f.grid);
    let mut acc: alloc::collections::BTreeMap<u32, C64> = alloc::collections::BTreeMap::new();
    for (&b, vals) in &df.comps {
        if let Some((mask, s)) = top_pairing(t.g, b) {
            *acc.entry(mask).or_insert(ZERO) += quad.integrate(vals) * s;
        }
    }
    acc.values().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `ι_Ξ` with `Ξ = ∂/∂ζ̄₁∧…∧∂/∂ζ̄_g`, stripping the leading dζ̄-top factor,
/// followed by `dw̄_j ↦ dz̄_j` (dw̄ lives in the τ slot).
///
/// Being odd of degree g past every dz̄, `β(dz̄∧x) = (−1)^g dz̄∧β(x)`.
pub fn beta_value(g: usize, v: &GradedValue) -> GradedValue {
    let full = (1u32 << g) - 1;
    let mut out = GradedValue::zero(g);
    for (&b, &s) in &v.terms {
        if b.zeta != full {
            continue;
        }
        let zb = Blade::new(0, b.zbar, 0);
        let wb = Blade::new(0, b.tau, 0);
        // dw̄_U sits after dz̄_T, and maps to dz̄_U in the same position
        if let Some((m, sign)) = zb.wedge(wb) {
            out.add_term(m, s * sign);
        }
    }
    out
}

/// Double field `(z, w) ↦ φ(z, w)` with dw̄ in the τ slot.
pub type DoubleField<'a> = &'a dyn Fn(&[f64], &[f64]) -> GradedValue;

/// `β(φ)(z) = ι_Ξ φ(z, z)` sampled on `grid`.
pub fn beta(grid: &Grid, g: usize, phi: DoubleField) -> Result<Field> {
    if grid.dim != 2 * g {
        return Err(Error::Config(alloc::format!("grid dimension {} does not match V × V diagonal at g = {g}", grid.dim)));
    }
    Ok(Field::from_fn(grid, g, |v| beta_value(g, &phi(v, v))))
}

fn central(phi: DoubleField, z: &[f64], w: &[f64], on_w: bool, axis: usize, h: f64) -> GradedValue {
    let mut zp = z.to_vec();
    let mut zm = z.to_vec();
    let mut wp = w.to_vec();
    let mut wm = w.to_vec();
    if on_w {
        wp[axis] += h;
        wm[axis] -= h;
    } else {
        zp[axis] += h;
        zm[axis] -= h;
    }
    let d = phi(&zp, &wp).sub(&phi(&zm, &wm)).expect("same g");
    d.scale(C64::new(0.5 / h, 0.0))
}

fn dbar_pointwise(phi: DoubleField, z: &[f64], w: &[f64], on_w: bool, j: usize, h: f64) -> GradedValue {
    let dx = central(phi, z, w, on_w, 2 * j, h);
    let dy = central(phi, z, w, on_w, 2 * j + 1, h);
    dx.add(&dy.scale(I)).expect("same g").scale(C64::new(0.5, 0.0))
}

fn wedge_gen_scaled(v: &GradedValue, family: crate::exterior::Family, j: usize, s: C64) -> GradedValue {
    let mut out = GradedValue::zero(v.g);
    for (&b, &c) in &v.terms {
        if let Some((nb, sign)) = Blade::gen(family, j).wedge(b) {
            out.add_term(nb, c * s * sign);
        }
    }
    out
}

/// Z-connection on double fields, with `∂̄` by central differences of step `h`:
/// `Σ_j dz̄_j∧(∂̄_{z_j} + 2πi ω_j(z)) + dw̄_j∧(∂̄_{w_j} − 2πi ω_j(w)) + 2πi (w_j − z_j) dζ̄_j∧`,
/// plus `Φ = 2πi Σ_j conj(B_j(w − z)) dz̄_j∧` when `with_phi`.
pub fn y_double_at(t: &TorusData, phi: DoubleField, z: &[f64], w: &[f64], h: f64, with_phi: bool) -> GradedValue {
    use crate::exterior::Family;
    let g = t.g;
    let val = phi(z, w);
    let (oz, ow) = (t.omega_at(z), t.omega_at(w));
    let (zc, wc) = (complex_coords(z), complex_coords(w));
    let diff: Vec<f64> = w.iter().zip(z).map(|(a, b)| a - b).collect();
    let bd = t.b_j_real(&diff);
    let tpi = I * TWO_PI;
    let mut out = GradedValue::zero(g);
    for j in 0..g {
        let mut zpart = dbar_pointwise(phi, z, w, false, j, h).add(&val.scale(tpi * oz[j])).expect("same g");
        if with_phi {
            zpart = zpart.add(&val.scale(tpi * bd[j].conj())).expect("same g");
        }
        let wpart = dbar_pointwise(phi, z, w, true, j, h).add(&val.scale(-tpi * ow[j])).expect("same g");
        out = out.add(&wedge_gen_scaled(&zpart, Family::Zbar, j, ONE)).expect("same g");
        out = out.add(&wedge_gen_scaled(&wpart, Family::Tau, j, ONE)).expect("same g");
        out = out.add(&wedge_gen_scaled(&val, Family::Zeta, j, tpi * (wc[j] - zc[j]))).expect("same g");
    }
    out
}

/// Reported intertwining residuals of β: interior sup of
/// `β(𝕐φ) − (−1)^g ∂̄β(φ)` without and with Φ, using central differences of
/// the grid step throughout.
pub fn beta_intertwining(t: &TorusData, d: &Deriv, phi: DoubleField) -> Result<(f64, f64)> {
    let grid = &d.grid;
    let h = grid.h;
    let bphi = beta(grid, t.g, phi)?;
    let sign = if t.g % 2 == 0 { ONE } else { -ONE };
    let rhs = crate::connections::dbar_field(d, &bphi).scale(sign);
    let plain = beta(grid, t.g, &|z: &[f64], w: &[f64]| y_double_at(t, phi, z, w, h, false))?;
    let full = beta(grid, t.g, &|z: &[f64], w: &[f64]| y_double_at(t, phi, z, w, h, true))?;
    Ok((plain.sub(&rhs).max_abs_interior(2), full.sub(&rhs).max_abs_interior(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{a_value, b_mu_field, gaussian_field, p_right_action, Side};
    use crate::exterior::Family;
    use crate::field::DerivScheme;
    use crate::math::PI;

    fn g1() -> (TorusData, Grid) {
        (TorusData::theta(0.05), Grid::new(2, 3.0, 0.1).unwrap())
    }

    fn top(g: usize) -> Blade {
        Blade::new(0, (1 << g) - 1, 0)
    }

    /// Mixed-degree Gaussian test form on V.
    fn q_form(grid: &Grid) -> Field {
        let mut q = gaussian_field(grid, 1, Blade::new(0, 0, 0), &[0.1, -0.2], 0.6);
        q.add_assign(&gaussian_field(grid, 1, top(1), &[-0.3, 0.1], 0.5).scale(C64::new(0.3, 0.7)));
        q.add_assign(&gaussian_field(grid, 1, Blade::gen(Family::Zeta, 0), &[0.2, 0.2], 0.55));
        q
    }

    fn p_form(grid: &Grid) -> Field {
        let mut p = gaussian_field(grid, 1, Blade::new(0, 0, 0), &[0.2, 0.1], 0.6).scale(C64::new(0.8, -0.2));
        p.add_assign(&gaussian_field(grid, 1, top(1), &[0.0, -0.1], 0.5));
        p.add_assign(&gaussian_field(grid, 1, Blade::gen(Family::Tau, 0), &[0.1, 0.3], 0.5).scale(I));
        p
    }

    #[test]
    fn quadrature_matches_gaussian_integral() {
        let (_, grid) = g1();
        assert!(Quadrature::new(&grid).gaussian_residual(0.7) < 1e-12);
        assert!((Quadrature::normalization(1) - C64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn top_pairing_signs() {
        // dz̄ ∧ dz = 2i dv, normalised away
        assert_eq!(top_pairing(1, top(1)), Some((0, 1.0)));
        // dz̄∧dτ̄ = −dτ̄∧dz̄
        assert_eq!(top_pairing(1, Blade::new(0, 1, 1)), Some((1, -1.0)));
        assert_eq!(top_pairing(1, Blade::new(1, 1, 1)), None);
        // dz̄₁dz̄₂dz₁dz₂ = −(2i)² dv
        assert_eq!(top_pairing(2, top(2)), Some((0, -1.0)));
        assert_eq!(top_pairing(2, Blade::new(0, 1, 0)), None);
    }

    #[test]
    fn alpha_of_b0_is_gaussian_integral() {
        let (t, grid) = g1();
        let mut blade = GradedValue::zero(1);
        blade.add_term(top(1), ONE);
        let b0 = b_mu_field(&t, &grid, 1, &[0, 0], &blade).unwrap();
        let a = alpha(&t, &b0, 1e-8).unwrap();
        // ∫ e^{−2π|z|²} = 1/2
        assert!((a.terms[&0].get(&[0, 0]) - C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let t = TorusData::theta(0.0);
        let grid = Grid::new(2, 3.0, 0.1).unwrap();
        let f = Field::scalar(&grid, 1, top(1), |v| C64::new(v[0] * libm::exp(-PI * (v[0] * v[0] + v[1] * v[1])), 0.0));
        let mut phi = WindowField::zeros(&grid, 1, 0);
        phi.insert(vec![0, 0], f).unwrap();
        assert!(alpha(&t, &phi, 1e-8).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn alpha_is_a_bimodule_map() {
        let (t, grid) = g1();
        let phi = tensor_field(&t, &q_form(&grid), &p_form(&grid), 3, 1e-12).unwrap();
        for mu in [[1, 0], [0, 1], [-1, 1]] {
            for side in [Side::Right, Side::Left] {
                let r = alpha_module_residual(&t, side, &mu, &phi, 1e-8).unwrap();
                assert!(r < 1e-10, "{side:?} {mu:?}: {r:e}");
            }
        }
    }

    #[test]
    fn right_action_through_p() {
        // α(q ⊗ p·μ) = α(q ⊗ p)·μ
        let (t, grid) = g1();
        let (q, p) = (q_form(&grid), p_form(&grid));
        for mu in [[1, 0], [0, -1]] {
            let lhs = alpha(&t, &tensor_field(&t, &q, &p_right_action(&t, &p, &mu).unwrap(), 4, 1e-12).unwrap(), 1e-8).unwrap();
            let rhs = nc_right(&t, &alpha(&t, &tensor_field(&t, &q, &p, 4, 1e-12).unwrap(), 1e-8).unwrap(), &mu).unwrap();
            assert!(lhs.sub(&rhs).max_abs() < 1e-6 * rhs.max_abs(), "{mu:?}");
        }
    }

    #[test]
    fn middle_balance_is_exact() {
        let (t, grid) = g1();
        let (q, p) = (q_form(&grid), p_form(&grid));
        let per = sample(&grid, |v| C64::new(libm::cos(2.0 * PI * v[0]), libm::sin(2.0 * PI * v[1])) + 2.0);
        let a = alpha(&t, &tensor_field(&t, &q.mul_pointwise(&per), &p, 3, 1e-12).unwrap(), 1e-8).unwrap();
        let b = alpha(&t, &tensor_field(&t, &q, &p.mul_pointwise(&per), 3, 1e-12).unwrap(), 1e-8).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-13 * a.max_abs());
    }

    #[test]
    fn chain_map_residual_is_second_order() {
        let t = TorusData::theta(0.05);
        let mut res = Vec::new();
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let phi = tensor_field(&t, &q_form(&grid), &p_form(&grid), 3, 1e-12).unwrap();
            res.push(alpha_chain_residual(&t, &d, &phi, 1e-8).unwrap().0);
        }
        assert!(res[0] < 1e-5, "{res:?}");
        let ratio = res[0] / res[1];
        assert!((3.0..5.0).contains(&ratio), "{res:?}");
    }

    #[test]
    fn alpha_rejects_undecayed_fields() {
        let (t, grid) = g1();
        let f = Field::scalar(&grid, 1, top(1), |_| ONE);
        let mut phi = WindowField::zeros(&grid, 1, 0);
        phi.insert(vec![0, 0], f).unwrap();
        assert!(matches!(alpha(&t, &phi, 1e-8), Err(Error::Boundary { .. })));
    }

    #[test]
    fn stokes_vanishes() {
        let (t, grid) = g1();
        let d = Deriv::new(&grid, DerivScheme::Central);
        assert_eq!(stokes_check(&t, &d, &Field::zeros(&grid, 1)), 0.0);
        let f = gaussian_field(&grid, 1, Blade::new(0, 0, 0), &[0.1, 0.0], 0.6);
        assert!(stokes_check(&t, &d, &f) < 1e-6);
        let zb = f.mul_pointwise(&sample(&grid, |v| C64::new(v[0], -v[1])));
        assert!(stokes_check(&t, &d, &zb) < 1e-6);
        // a form that does not decay has flux
        let ramp = Field::scalar(&grid, 1, Blade::new(0, 0, 0), |v| C64::new(v[0], 0.0));
        assert!(stokes_check(&t, &d, &ramp) > 1.0);
    }

    fn zeta_top(g: usize) -> Blade {
        Blade::new((1 << g) - 1, 0, 0)
    }

    #[test]
    fn beta_contracts_and_merges() {
        let g = 2;
        let mut v = GradedValue::zero(g);
        v.add_term(Blade::new(1, 1, 0), ONE);
        assert_eq!(beta_value(g, &v).max_abs(), 0.0);
        let mut v = GradedValue::zero(g);
        // dζ̄top ∧ dz̄₂ ∧ dw̄₁ ↦ dz̄₂∧dz̄₁ = −dz̄₁∧dz̄₂
        v.add_term(Blade::new(3, 2, 1), ONE);
        let b = beta_value(g, &v);
        assert_eq!(b.coeff(Blade::new(0, 3, 0)), -ONE);
        // dz̄₁ ∧ dw̄₁ ↦ 0
        let mut v = GradedValue::zero(g);
        v.add_term(Blade::new(3, 1, 1), ONE);
        assert_eq!(beta_value(g, &v).max_abs(), 0.0);
    }

    #[test]
    fn beta_of_vacuum_is_one() {
        let t = TorusData::standard(1, &[vec![0.0, 0.3], vec![-0.3, 0.0]]).unwrap();
        let grid = Grid::new(2, 2.0, 0.25).unwrap();
        let phi = |z: &[f64], w: &[f64]| GradedValue::blade(1, zeta_top(1), a_value(&t, z, w));
        let b = beta(&grid, 1, &phi).unwrap();
        let c = &b.comps[&Blade::new(0, 0, 0)];
        assert!(c.iter().all(|x| (*x - ONE).norm() < 1e-14));
        let bad = Grid::new(4, 1.0, 0.5).unwrap();
        assert!(matches!(beta(&bad, 1, &phi), Err(Error::Config(_))));
    }

    #[test]
    fn beta_bimodule_is_exact() {
        let t = TorusData::theta(0.1);
        let grid = Grid::new(2, 2.0, 0.25).unwrap();
        let f = |v: &[f64]| C64::new(libm::cos(2.0 * PI * v[0]), 0.5 * libm::sin(2.0 * PI * v[1]));
        let h = |v: &[f64]| C64::new(1.0 + libm::sin(2.0 * PI * (v[0] + v[1])), 0.2);
        let phi = |z: &[f64], w: &[f64]| {
            let mut v = GradedValue::blade(1, zeta_top(1), a_value(&t, z, w));
            v.add_term(Blade::new(1, 0, 1), a_value(&t, z, w) * z[0]);
            v.add_term(Blade::new(0, 1, 0), ONE);
            v
        };
        let lhs = beta(&grid, 1, &|z: &[f64], w: &[f64]| phi(z, w).scale(f(z) * h(w))).unwrap();
        let rhs = beta(&grid, 1, &phi).unwrap().mul_pointwise(&sample(&grid, |v| f(v) * h(v)));
        assert!(lhs.sub(&rhs).max_abs() < 1e-14);
    }

    #[test]
    fn beta_intertwining_is_reported() {
        let t = TorusData::standard(2, &[
            vec![0.0, 0.02, 0.01, 0.0],
            vec![-0.02, 0.0, 0.0, 0.03],
            vec![-0.01, 0.0, 0.0, 0.01],
            vec![0.0, -0.03, -0.01, 0.0],
        ])
        .unwrap();
        let grid = Grid::new(4, 1.0, 0.25).unwrap();
        let d = Deriv::new(&grid, DerivScheme::Central);
        let phi = |z: &[f64], w: &[f64]| {
            let a = a_value(&t, z, w) * libm::exp(-PI * z.iter().map(|x| x * x).sum::<f64>());
            let mut v = GradedValue::blade(2, zeta_top(2), a);
            v.add_term(Blade::new(3, 1, 0), a * w[1]);
            v.add_term(Blade::new(3, 0, 2), a * z[2]);
            v
        };
        let (plain, full) = beta_intertwining(&t, &d, &phi).unwrap();
        assert!(plain.is_finite());
        // Φ vanishes on the diagonal
        assert!((plain - full).abs() < 1e-12);
    }
}
