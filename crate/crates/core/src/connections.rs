//! Sampled Z-connections of the deformed Poincaré bimodules and their
//! compositions.
//!
//! All exterior factors act by left wedge. The V_{1,0}-valued parts land in
//! dζ̄ (ℚ⁰, the ζ term of 𝕏⁰) and dτ̄ (ℙ¹, 𝕏¹); on the Y side dζ̄ carries the
//! merged V_{1,0} factor.
//!
//! Fields over `V × Λ` are stored as one [`Field`] per lattice point of a
//! window (see [`WindowField`]).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exterior::{pm_blade, Blade, Family, GradedValue};
use crate::field::{complex_coords, sample, Deriv, Field, Grid};
use crate::math::{C64, I, ONE, TWO_PI, ZERO};
use crate::torus::TorusData;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Zero,
    One,
}

fn two_pi_i() -> C64 {
    I * TWO_PI
}

/// Samples of `z_j`.
pub fn z_samples(grid: &Grid, j: usize) -> Vec<C64> {
    sample(grid, |v| C64::new(v[2 * j], v[2 * j + 1]))
}

fn scaled(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|x| *x * s).collect()
}

/// `Σ_j dz̄_j ∧ ∂φ/∂z̄_j`.
pub fn dbar_field(d: &Deriv, f: &Field) -> Field {
    let mut out = Field::zeros(&f.grid, f.g);
    for j in 0..f.g {
        out.add_assign(&f.map_comps(|c| d.dbar(c, j)).wedge_gen(Family::Zbar, j, None));
    }
    out
}

/// `Σ_j ι_{z̄_j} (−∂φ/∂z_j)`, the adjoint of [`dbar_field`].
pub fn dbar_field_adjoint(d: &Deriv, f: &Field) -> Field {
    let mut out = Field::zeros(&f.grid, f.g);
    for j in 0..f.g {
        out.add_assign(&f.contract_gen(Family::Zbar, j, None).map_comps(|c| scaled(&d.dholo(c, j), -ONE)));
    }
    out
}

fn omega_wedge(t: &TorusData, f: &Field, s: C64) -> Field {
    let mut out = Field::zeros(&f.grid, f.g);
    for j in 0..t.g {
        let w = sample(&f.grid, |v| t.omega_at(v)[j] * s);
        out.add_assign(&f.wedge_gen(Family::Zbar, j, Some(&w)));
    }
    out
}

fn z_wedge(f: &Field, family: Family, s: C64, shift: Option<&[C64]>) -> Field {
    let mut out = Field::zeros(&f.grid, f.g);
    for j in 0..f.g {
        let off = shift.map(|w| w[j]).unwrap_or(ZERO);
        let c: Vec<C64> = z_samples(&f.grid, j).into_iter().map(|z| (z + off) * s).collect();
        out.add_assign(&f.wedge_gen(family, j, Some(&c)));
    }
    out
}

/// ℙ⁰ = ∂̄ + 2πi ω∧ and ℙ¹ = −2πi Σ_j z_j dτ̄_j∧.
pub fn p_apply(t: &TorusData, d: &Deriv, part: Part, p: &Field) -> Field {
    match part {
        Part::Zero => dbar_field(d, p).add(&omega_wedge(t, p, two_pi_i())),
        Part::One => z_wedge(p, Family::Tau, -two_pi_i(), None),
    }
}

/// ℚ⁰ = 2πi Σ_j z_j dζ̄_j∧ and ℚ¹ = ∂̄ − 2πi ω∧.
pub fn q_apply(t: &TorusData, d: &Deriv, part: Part, q: &Field) -> Field {
    match part {
        Part::Zero => z_wedge(q, Family::Zeta, two_pi_i(), None),
        Part::One => dbar_field(d, q).add(&omega_wedge(t, q, -two_pi_i())),
    }
}

pub fn p_full(t: &TorusData, d: &Deriv, p: &Field) -> Field {
    p_apply(t, d, Part::Zero, p).add(&p_apply(t, d, Part::One, p))
}

pub fn q_full(t: &TorusData, d: &Deriv, q: &Field) -> Field {
    q_apply(t, d, Part::Zero, q).add(&q_apply(t, d, Part::One, q))
}

/// Interior sup of `ℙℙp − 2πi B^{0,2}∧p`.
pub fn p_curvature_residual(t: &TorusData, d: &Deriv, p: &Field) -> f64 {
    let pp = p_full(t, d, &p_full(t, d, p));
    pp.sub(&p.wedge_const(&t.b02().scale(two_pi_i()))).max_abs_interior(2)
}

/// Interior sup of `ℚℚq + 2πi B^{0,2}∧q`.
pub fn q_curvature_residual(t: &TorusData, d: &Deriv, q: &Field) -> f64 {
    let qq = q_full(t, d, &q_full(t, d, q));
    qq.add(&q.wedge_const(&t.b02().scale(two_pi_i()))).max_abs_interior(2)
}

/// Grid steps of the lattice point `n`.
pub fn lattice_steps(t: &TorusData, grid: &Grid, n: &[i64]) -> Result<Vec<i64>> {
    grid.steps_of(&t.lattice_point(n))
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

/// Right action on 𝒫: `(p·λ)(v) = σ(λ,v) p(v+λ)` (zero where `v+λ` leaves the box).
pub fn p_right_action(t: &TorusData, p: &Field, n: &[i64]) -> Result<Field> {
    let lam = t.lattice_point(n);
    let steps = p.grid.steps_of(&lam)?;
    let phase = sample(&p.grid, |v| t.sigma(&lam, v));
    Ok(p.translate(&steps).mul_pointwise(&phase))
}

/// Left action on 𝒬: `(λ·q)(v) = σ(λ, v−λ) q(v−λ)`.
pub fn q_left_action(t: &TorusData, q: &Field, n: &[i64]) -> Result<Field> {
    let lam = t.lattice_point(n);
    let steps = q.grid.steps_of(&lam)?;
    let phase = sample(&q.grid, |v| {
        let w: Vec<f64> = v.iter().zip(&lam).map(|(a, b)| a - b).collect();
        t.sigma(&lam, &w)
    });
    Ok(q.translate(&neg(&steps)).mul_pointwise(&phase))
}

/// Smooth bump `exp(−1/(1−t²))` on (−1, 1).
fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        libm::exp(-1.0 / (1.0 - x * x))
    }
}

/// One-dimensional partition of unity: `Σ_n u(x+n) = 1`.
pub fn partition_1d(x: f64) -> f64 {
    let s = bump(x);
    if s == 0.0 {
        return 0.0;
    }
    let fl = libm::floor(x);
    // at most two integer translates meet the support
    let total: f64 = (-2..=2).map(|k| bump(x - fl + k as f64)).sum();
    s / total
}

/// Partition of unity on V subordinate to the lattice: product of
/// [`partition_1d`] over lattice coordinates.
pub fn partition_h(t: &TorusData, v: &[f64]) -> f64 {
    t.lattice_coords(v).iter().map(|&x| partition_1d(x)).product()
}

/// `ι_γ(v) = h(v) (p·(−γ))(v) = h(v) σ(−γ,v) p(v−γ)`.
pub fn iota_component(t: &TorusData, p: &dyn Fn(&[f64]) -> C64, n: &[i64], v: &[f64]) -> C64 {
    let h = partition_h(t, v);
    if h == 0.0 {
        return ZERO;
    }
    let gam = t.lattice_point(n);
    let ng: Vec<f64> = gam.iter().map(|x| -x).collect();
    let w: Vec<f64> = v.iter().zip(&gam).map(|(a, b)| a - b).collect();
    t.sigma(&ng, v) * p(&w) * h
}

/// `Σ_γ ι_γ·γ` evaluated at `v`, with γ over the window.
pub fn iota_action(t: &TorusData, p: &dyn Fn(&[f64]) -> C64, window: i64, v: &[f64]) -> C64 {
    let mut s = ZERO;
    for n in lattice_window(t.g, window) {
        let gam = t.lattice_point(&n);
        let w: Vec<f64> = v.iter().zip(&gam).map(|(a, b)| a + b).collect();
        s += t.sigma(&gam, v) * iota_component(t, p, &n, &w);
    }
    s
}

/// All integer vectors of length 2g with entries in `[-w, w]`, in lexicographic order.
pub fn lattice_window(g: usize, w: i64) -> Vec<Vec<i64>> {
    let n = 2 * g;
    let side = (2 * w + 1) as usize;
    let mut out = Vec::with_capacity(side.pow(n as u32));
    let mut cur = vec![-w; n];
    loop {
        out.push(cur.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < w {
                cur[k] += 1;
                break;
            }
            cur[k] = -w;
        }
    }
}

/// Sup over lattice-window partition sums `|Σ_γ h(v+γ) − 1|` at grid points.
pub fn partition_residual(t: &TorusData, grid: &Grid, window: i64) -> f64 {
    let mut m: f64 = 0.0;
    let mut v = vec![0.0; grid.dim];
    for i in 0..grid.len() {
        grid.point_into(i, &mut v);
        let s: f64 = lattice_window(t.g, window)
            .iter()
            .map(|n| {
                let gam = t.lattice_point(n);
                let w: Vec<f64> = v.iter().zip(&gam).map(|(a, b)| a + b).collect();
                partition_h(t, &w)
            })
            .sum();
        m = m.max((s - 1.0).abs());
    }
    m
}

/// Field on `V × Λ` with λ restricted to `[-window, window]^{2g}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowField {
    pub grid: Grid,
    pub g: usize,
    pub window: i64,
    pub comps: BTreeMap<Vec<i64>, Field>,
}

impl WindowField {
    pub fn zeros(grid: &Grid, g: usize, window: i64) -> Self {
        WindowField { grid: grid.clone(), g, window, comps: BTreeMap::new() }
    }

    pub fn in_window(&self, n: &[i64]) -> bool {
        n.iter().all(|x| x.abs() <= self.window)
    }

    pub fn insert(&mut self, n: Vec<i64>, f: Field) -> Result<()> {
        if !self.in_window(&n) {
            let needed = n.iter().map(|x| x.abs()).max().unwrap_or(0);
            return Err(Error::WindowOverflow { needed, window: self.window });
        }
        self.comps.insert(n, f);
        Ok(())
    }

    pub fn map(&self, op: impl Fn(&[i64], &Field) -> Field) -> WindowField {
        let comps = self.comps.iter().map(|(n, f)| (n.clone(), op(n, f))).collect();
        WindowField { comps, ..self.clone() }
    }

    pub fn sub(&self, o: &WindowField) -> WindowField {
        let mut out = self.clone();
        for (n, f) in &o.comps {
            let e = out.comps.entry(n.clone()).or_insert_with(|| Field::zeros(&self.grid, self.g));
            *e = e.sub(f);
        }
        out
    }

    pub fn add(&self, o: &WindowField) -> WindowField {
        let mut out = self.clone();
        for (n, f) in &o.comps {
            let e = out.comps.entry(n.clone()).or_insert_with(|| Field::zeros(&self.grid, self.g));
            e.add_assign(f);
        }
        out
    }

    pub fn scale(&self, s: C64) -> WindowField {
        self.map(|_, f| f.scale(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        self.comps.values().map(|f| f.max_abs_interior(margin)).fold(0.0, f64::max)
    }

    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        for f in self.comps.values() {
            f.check_boundary(tol)?;
        }
        Ok(())
    }

    pub fn inner(&self, o: &WindowField) -> C64 {
        self.comps.iter().filter_map(|(n, f)| o.comps.get(n).map(|h| f.inner(h))).sum()
    }
}

/// 𝕏⁰ at a fixed λ: `Σ_j 2πi z_j dζ̄_j∧ + dz̄_j∧∂̄_j + 2πi conj(B_j(λ)) dz̄_j∧`.
pub fn x0_at(t: &TorusData, d: &Deriv, lam: &[f64], f: &Field) -> Field {
    let beta = t.b_j_real(lam);
    let mut out = z_wedge(f, Family::Zeta, two_pi_i(), None).add(&dbar_field(d, f));
    for j in 0..t.g {
        out.add_assign(&f.wedge_gen(Family::Zbar, j, None).scale(two_pi_i() * beta[j].conj()));
    }
    out
}

/// Adjoint of [`x0_at`] in the grid l² product with orthonormal blades.
pub fn x0_adjoint_at(t: &TorusData, d: &Deriv, lam: &[f64], f: &Field) -> Field {
    let beta = t.b_j_real(lam);
    let mut out = dbar_field_adjoint(d, f);
    for j in 0..t.g {
        let zc: Vec<C64> = z_samples(&f.grid, j).into_iter().map(|z| -two_pi_i() * z.conj()).collect();
        out.add_assign(&f.contract_gen(Family::Zeta, j, Some(&zc)));
        out.add_assign(&f.contract_gen(Family::Zbar, j, None).scale(-two_pi_i() * beta[j]));
    }
    out
}

/// 𝕏¹ at a fixed λ: `−2πi Σ_j (z_j + λ_j) dτ̄_j∧`.
pub fn x1_at(lam: &[f64], f: &Field) -> Field {
    let lc = complex_coords(lam);
    z_wedge(f, Family::Tau, -two_pi_i(), Some(&lc))
}

pub fn x_apply(t: &TorusData, d: &Deriv, part: Part, phi: &WindowField) -> WindowField {
    phi.map(|n, f| {
        let lam = t.lattice_point(n);
        match part {
            Part::Zero => x0_at(t, d, &lam, f),
            Part::One => x1_at(&lam, f),
        }
    })
}

pub fn x_full(t: &TorusData, d: &Deriv, phi: &WindowField) -> WindowField {
    x_apply(t, d, Part::Zero, phi).add(&x_apply(t, d, Part::One, phi))
}

pub fn x0_adjoint(t: &TorusData, d: &Deriv, phi: &WindowField) -> WindowField {
    phi.map(|n, f| x0_adjoint_at(t, d, &t.lattice_point(n), f))
}

/// `Δ⁰ = (𝕏⁰)*𝕏⁰ + 𝕏⁰(𝕏⁰)*` at a fixed λ.
pub fn x_laplacian_at(t: &TorusData, d: &Deriv, lam: &[f64], f: &Field) -> Field {
    let a = x0_adjoint_at(t, d, lam, &x0_at(t, d, lam, f));
    a.add(&x0_at(t, d, lam, &x0_adjoint_at(t, d, lam, f)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Module actions on 𝒳 ≅ 𝒮(V×Λ) induced from 𝒬 ⊗ 𝒫 with φ(z,λ) = q(z)p(z+λ):
/// `(μ·φ)(z,λ) = σ(μ,z) φ(z−μ, λ+μ)` and `(φ·μ)(z,λ) = σ(μ,z+λ) φ(z, λ+μ)`.
pub fn x_module_action(t: &TorusData, side: Side, mu: &[i64], phi: &WindowField) -> Result<WindowField> {
    let grid = &phi.grid;
    let mu_r = t.lattice_point(mu);
    let steps = grid.steps_of(&mu_r)?;
    let mut out = WindowField::zeros(grid, phi.g, phi.window);
    for (src, f) in &phi.comps {
        let n: Vec<i64> = src.iter().zip(mu).map(|(a, b)| a - b).collect();
        if !out.in_window(&n) {
            if f.max_abs() > 0.0 {
                let needed = n.iter().map(|x| x.abs()).max().unwrap_or(0);
                return Err(Error::WindowOverflow { needed, window: phi.window });
            }
            continue;
        }
        let lam = t.lattice_point(&n);
        let moved = match side {
            Side::Left => f.translate(&neg(&steps)).mul_pointwise(&sample(grid, |v| t.sigma(&mu_r, v))),
            Side::Right => f.mul_pointwise(&sample(grid, |v| {
                let w: Vec<f64> = v.iter().zip(&lam).map(|(a, b)| a + b).collect();
                t.sigma(&mu_r, &w)
            })),
        };
        out.comps.insert(n, moved);
    }
    Ok(out)
}

/// The deformed Gaussian `b_μ`: supported at λ = μ with value
/// `exp(−2π Σ_j |z_j|² + i B_j(μ) z_j + i conj(B_j(μ) z_j))`, times `blade`.
pub fn b_mu_field(t: &TorusData, grid: &Grid, window: i64, mu: &[i64], blade: &GradedValue) -> Result<WindowField> {
    let mu_r = t.lattice_point(mu);
    let beta = t.b_j_real(&mu_r);
    let vals = sample(grid, |v| {
        let z = complex_coords(v);
        let e: C64 = z.iter().zip(&beta).map(|(zj, bj)| -TWO_PI * (zj.norm_sqr() + I * bj * zj + I * (bj * zj).conj())).sum();
        e.exp()
    });
    let mut f = Field::zeros(grid, t.g);
    for (&b, &s) in &blade.terms {
        f.comps.insert(b, scaled(&vals, s));
    }
    let mut out = WindowField::zeros(grid, t.g, window);
    out.insert(mu.to_vec(), f)?;
    Ok(out)
}

/// `e₁⁻ ∧ … ∧ e_g⁻` in standard blades.
pub fn e_minus_top(g: usize) -> GradedValue {
    pm_blade(g, 0, (1u32 << g) - 1, 0)
}

/// `e₁⁺ ∧ … ∧ e_g⁺` in standard blades.
pub fn e_plus_top(g: usize) -> GradedValue {
    pm_blade(g, (1u32 << g) - 1, 0, 0)
}

/// `η_μ⁰ = b_μ · e₁⁻ ∧ … ∧ e_g⁻`.
pub fn eta_mu0(t: &TorusData, grid: &Grid, window: i64, mu: &[i64]) -> Result<WindowField> {
    b_mu_field(t, grid, window, mu, &e_minus_top(t.g))
}

/// `η = b₀ · ∏_j (e_j⁻ + i dτ̄_j)`.
pub fn eta_closed(t: &TorusData, grid: &Grid, window: i64) -> Result<WindowField> {
    let g = t.g;
    let mut v = GradedValue::scalar(g, ONE);
    for j in 0..g {
        let mut f = GradedValue::blade(g, Blade::gen(Family::Zbar, j), ONE);
        f.add_term(Blade::gen(Family::Zeta, j), -I);
        f.add_term(Blade::gen(Family::Tau, j), I);
        v = crate::exterior::wedge(&v, &f)?;
    }
    b_mu_field(t, grid, window, &vec![0; 2 * g], &v)
}

/// Samples of `conj(B_j(z − w))` (w = 0 gives `conj(B_j(z))`).
fn conj_bj_samples(t: &TorusData, grid: &Grid, j: usize, w: &[f64]) -> Vec<C64> {
    sample(grid, |v| {
        let d: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
        t.b_j_real(&d)[j].conj()
    })
}

/// 𝕐⁰ at a fixed w: `Σ_j dz̄_j∧∂̄_j + 2πi conj(B_j(z)) dz̄_j∧ + 2πi (w_j − z_j) dζ̄_j∧`.
pub fn y0_at(t: &TorusData, d: &Deriv, w: &[f64], f: &Field) -> Field {
    let wc = complex_coords(w);
    let zero = vec![0.0; w.len()];
    let mut out = dbar_field(d, f);
    for j in 0..t.g {
        let c = scaled(&conj_bj_samples(t, &f.grid, j, &zero), two_pi_i());
        out.add_assign(&f.wedge_gen(Family::Zbar, j, Some(&c)));
        let zc: Vec<C64> = z_samples(&f.grid, j).into_iter().map(|z| two_pi_i() * (wc[j] - z)).collect();
        out.add_assign(&f.wedge_gen(Family::Zeta, j, Some(&zc)));
    }
    out
}

/// `Φ = 2πi Σ_j conj(B_j(w − z)) dz̄_j∧`.
pub fn phi_at(t: &TorusData, w: &[f64], f: &Field) -> Field {
    let mut out = Field::zeros(&f.grid, f.g);
    for j in 0..t.g {
        // conj(B_j(w − z)) = −conj(B_j(z − w))
        let c = scaled(&conj_bj_samples(t, &f.grid, j, w), -two_pi_i());
        out.add_assign(&f.wedge_gen(Family::Zbar, j, Some(&c)));
    }
    out
}

/// Adjoint of `𝕐⁰ + Φ = Σ_j dz̄_j∧(∂̄_j + 2πi conj(B_j(w))) + 2πi (w_j − z_j) dζ̄_j∧`.
pub fn y_total_adjoint_at(t: &TorusData, d: &Deriv, w: &[f64], f: &Field) -> Field {
    let wc = complex_coords(w);
    let beta = t.b_j_real(w);
    let mut out = dbar_field_adjoint(d, f);
    for j in 0..t.g {
        out.add_assign(&f.contract_gen(Family::Zbar, j, None).scale(-two_pi_i() * beta[j]));
        let zc: Vec<C64> = z_samples(&f.grid, j).into_iter().map(|z| (two_pi_i() * (wc[j] - z)).conj()).collect();
        out.add_assign(&f.contract_gen(Family::Zeta, j, Some(&zc)));
    }
    out
}

pub fn y_total_at(t: &TorusData, d: &Deriv, w: &[f64], f: &Field) -> Field {
    y0_at(t, d, w, f).add(&phi_at(t, w, f))
}

/// `□⁰ = (𝕐⁰+Φ)*(𝕐⁰+Φ) + (𝕐⁰+Φ)(𝕐⁰+Φ)*` at a fixed w.
pub fn y_laplacian_at(t: &TorusData, d: &Deriv, w: &[f64], f: &Field) -> Field {
    let a = y_total_adjoint_at(t, d, w, &y_total_at(t, d, w, f));
    a.add(&y_total_at(t, d, w, &y_total_adjoint_at(t, d, w, f)))
}

/// Residuals of `[𝕐⁰,Φ]φ + Φ²φ + 2πi B^{0,2}∧φ` (interior sup) and of `Φ²φ` (exact).
pub fn y_gauge_residual(t: &TorusData, d: &Deriv, w: &[f64], f: &Field) -> (f64, f64) {
    let pf = phi_at(t, w, f);
    let pp = phi_at(t, w, &pf);
    let comm = y0_at(t, d, w, &pf).add(&phi_at(t, w, &y0_at(t, d, w, f)));
    let r = comm.add(&pp).add(&f.wedge_const(&t.b02().scale(two_pi_i())));
    (r.max_abs_interior(2), phi_form_square(t, w, &f.grid))
}

/// Sup over the grid of the 2-form `ψ∧ψ`, where `Φ = ψ∧` with
/// `ψ = 2πi Σ_j conj(B_j(w − z)) dz̄_j`; zero by antisymmetry, not by cancellation.
pub fn phi_form_square(t: &TorusData, w: &[f64], grid: &Grid) -> f64 {
    let mut m: f64 = 0.0;
    let mut v = vec![0.0; grid.dim];
    for i in 0..grid.len() {
        grid.point_into(i, &mut v);
        let d: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - b).collect();
        let bj = t.b_j_real(&d);
        let mut psi = GradedValue::zero(t.g);
        for (j, b) in bj.iter().enumerate() {
            psi.add_term(Blade::gen(Family::Zbar, j), two_pi_i() * b.conj());
        }
        let sq = crate::exterior::wedge(&psi, &psi).expect("same g");
        m = m.max(sq.max_abs());
    }
    m
}

/// `a(z,w) = σ(z,w) exp(−2π|z−w|²)`.
pub fn a_value(t: &TorusData, z: &[f64], w: &[f64]) -> C64 {
    let d2: f64 = z.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
    t.sigma(z, w) * libm::exp(-TWO_PI * d2)
}

/// `a(·,w) · blade` sampled on the grid.
pub fn a_field(t: &TorusData, grid: &Grid, w: &[f64], blade: &GradedValue) -> Field {
    let vals = sample(grid, |v| a_value(t, v, w));
    let mut f = Field::zeros(grid, t.g);
    for (&b, &s) in &blade.terms {
        f.comps.insert(b, scaled(&vals, s));
    }
    f
}

/// `τ(φ)(z,w) = Σ_λ φ(z+λ, w+λ) σ(λ, z−w)` over the window.
pub fn tau_coinvariant(t: &TorusData, phi: &dyn Fn(&[f64], &[f64]) -> C64, window: i64, z: &[f64], w: &[f64]) -> C64 {
    let zw: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
    let mut s = ZERO;
    for n in lattice_window(t.g, window) {
        let lam = t.lattice_point(&n);
        let zl: Vec<f64> = z.iter().zip(&lam).map(|(a, b)| a + b).collect();
        let wl: Vec<f64> = w.iter().zip(&lam).map(|(a, b)| a + b).collect();
        s += phi(&zl, &wl) * t.sigma(&lam, &zw);
    }
    s
}

/// `ρ(ψ)(z,w) = h(z) ψ(z,w)`.
pub fn rho_section(t: &TorusData, psi: &dyn Fn(&[f64], &[f64]) -> C64, z: &[f64], w: &[f64]) -> C64 {
    let h = partition_h(t, z);
    if h == 0.0 {
        ZERO
    } else {
        psi(z, w) * h
    }
}

/// `|ψ(z+λ, w+λ) σ(λ, z−w) − ψ(z,w)|` for one lattice point.
pub fn invariance_defect(t: &TorusData, psi: &dyn Fn(&[f64], &[f64]) -> C64, n: &[i64], z: &[f64], w: &[f64]) -> f64 {
    let lam = t.lattice_point(n);
    let zl: Vec<f64> = z.iter().zip(&lam).map(|(a, b)| a + b).collect();
    let wl: Vec<f64> = w.iter().zip(&lam).map(|(a, b)| a + b).collect();
    let zw: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
    (psi(&zl, &wl) * t.sigma(&lam, &zw) - psi(z, w)).norm()
}

/// Tail of the λ-sum: largest `|φ(z+λ,w+λ)|` over the window boundary.
pub fn tau_tail(t: &TorusData, phi: &dyn Fn(&[f64], &[f64]) -> C64, window: i64, z: &[f64], w: &[f64]) -> f64 {
    lattice_window(t.g, window)
        .into_iter()
        .filter(|n| n.iter().any(|x| x.abs() == window))
        .map(|n| {
            let lam = t.lattice_point(&n);
            let zl: Vec<f64> = z.iter().zip(&lam).map(|(a, b)| a + b).collect();
            let wl: Vec<f64> = w.iter().zip(&lam).map(|(a, b)| a + b).collect();
            phi(&zl, &wl).norm()
        })
        .fold(0.0, f64::max)
}

/// Error if the λ-sum tail exceeds `tol`.
pub fn check_tail(t: &TorusData, phi: &dyn Fn(&[f64], &[f64]) -> C64, window: i64, z: &[f64], w: &[f64], tol: f64) -> Result<()> {
    let v = tau_tail(t, phi, window, z, w);
    if v > tol {
        return Err(Error::Tail { value: v, tol });
    }
    Ok(())
}

/// Gaussian `exp(−π|v − c|²/s²)` as a scalar field.
pub fn gaussian_field(grid: &Grid, g: usize, blade: Blade, centre: &[f64], width: f64) -> Field {
    Field::scalar(grid, g, blade, |v| {
        let r2: f64 = v.iter().zip(centre).map(|(a, b)| (a - b) * (a - b)).sum();
        C64::new(libm::exp(-core::f64::consts::PI * r2 / (width * width)), 0.0)
    })
}

/// Check that a field is negligible on the boundary shell, with context.
pub fn require_decay(f: &Field, tol: f64, what: &str) -> Result<()> {
    f.check_boundary(tol).map_err(|e| match e {
        Error::Boundary { value, tol } => Error::Precondition(format!("{what}: boundary value {value:e} exceeds {tol:e}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DerivScheme;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g2_torus() -> TorusData {
        let b = vec![
            vec![0.0, 0.02, 0.01, -0.03],
            vec![-0.02, 0.0, 0.04, 0.01],
            vec![-0.01, -0.04, 0.0, 0.02],
            vec![0.03, -0.01, -0.02, 0.0],
        ];
        let b: Vec<Vec<f64>> = b.into_iter().map(|r| r.into_iter().map(|x| x * 0.05).collect()).collect();
        TorusData::standard(2, &b).unwrap()
    }

    fn random_field(rng: &mut ChaCha8Rng, grid: &Grid, g: usize, families: &[Family]) -> Field {
        let blades = Blade::enumerate(g, families);
        let mut f = Field::zeros(grid, g);
        for b in blades {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let x0: Vec<f64> = (0..grid.dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let gf = gaussian_field(grid, g, b, &x0, 1.0).scale(c);
            f.add_assign(&gf);
        }
        f
    }

    #[test]
    fn p0_matches_exact_derivative_when_untwisted() {
        let t = TorusData::theta(0.0);
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let p = Field::scalar(&grid, 1, Blade::ONE, |v| C64::new(libm::exp(-TWO_PI * (v[0] * v[0] + v[1] * v[1])), 0.0));
            let exact = Field::scalar(&grid, 1, Blade::gen(Family::Zbar, 0), |v| {
                C64::new(v[0], v[1]) * (-TWO_PI * libm::exp(-TWO_PI * (v[0] * v[0] + v[1] * v[1])))
            });
            let r = p_apply(&t, &d, Part::Zero, &p).sub(&exact).max_abs_interior(1);
            assert!(r < 3.0 * h * h * 40.0, "{r}");
        }
    }

    #[test]
    fn p_right_linearity_and_leibniz() {
        let t = TorusData::theta(0.05);
        let mut errs = vec![];
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let p = gaussian_field(&grid, 1, Blade::ONE, &[0.2, -0.1], 0.8);
            let n = [1, -1];
            let lhs = p_apply(&t, &d, Part::Zero, &p_right_action(&t, &p, &n).unwrap());
            let rhs = p_right_action(&t, &p_apply(&t, &d, Part::Zero, &p), &n).unwrap();
            errs.push(lhs.sub(&rhs).max_abs_interior(3));
            // ℙ¹(p·λ) = ℙ¹(p)·λ + 2πi λ_j dτ̄_j ∧ (p·λ)
            let pl = p_right_action(&t, &p, &n).unwrap();
            let l1 = p_apply(&t, &d, Part::One, &pl);
            let lc = complex_coords(&t.lattice_point(&n));
            let mut r1 = p_right_action(&t, &p_apply(&t, &d, Part::One, &p), &n).unwrap();
            r1.add_assign(&pl.wedge_gen(Family::Tau, 0, None).scale(two_pi_i() * lc[0]));
            assert!(l1.sub(&r1).max_abs_interior(3) < 1e-10);
        }
        let ratio = errs[0] / errs[1];
        assert!(errs[0] < 2e-2 && (3.0..5.0).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn curvature_vanishes_at_genus_one_only_up_to_grid_commutator() {
        // B^{0,2} = 0 at g = 1; the residual is the O(h²) commutator [∂̄_h, z]
        let t = TorusData::theta(0.3);
        let mut errs = vec![];
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let p = gaussian_field(&grid, 1, Blade::ONE, &[0.0, 0.0], 1.0);
            errs.push((p_curvature_residual(&t, &d, &p), q_curvature_residual(&t, &d, &p)));
        }
        for k in 0..2 {
            let (a, b) = if k == 0 { (errs[0].0, errs[1].0) } else { (errs[0].1, errs[1].1) };
            assert!((3.5..4.5).contains(&(a / b)), "{errs:?}");
        }
    }

    #[test]
    fn curvature_at_genus_two_converges() {
        let t = g2_torus();
        let mut rp = vec![];
        for h in [0.25, 0.125] {
            let grid = Grid::new(4, 2.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let p = gaussian_field(&grid, 2, Blade::ONE, &[0.0; 4], 0.7);
            rp.push(p_curvature_residual(&t, &d, &p));
        }
        let ratio = rp[0] / rp[1];
        assert!((2.0..6.0).contains(&ratio), "{rp:?}");
    }

    #[test]
    fn q_left_action_is_associative() {
        let t = TorusData::theta(0.37);
        let grid = Grid::new(2, 3.0, 0.25).unwrap();
        let q = gaussian_field(&grid, 1, Blade::ONE, &[0.0, 0.0], 0.6);
        let (a, b) = ([1, 0], [0, -1]);
        let lhs = q_left_action(&t, &q_left_action(&t, &q, &b).unwrap(), &a).unwrap();
        let ab = [1, -1];
        let s = t.sigma(&t.lattice_point(&a), &t.lattice_point(&b));
        let rhs = q_left_action(&t, &q, &ab).unwrap().scale(s);
        assert!(lhs.sub(&rhs).max_abs() < 1e-14);
    }

    #[test]
    fn partition_and_splitting() {
        let t = TorusData::theta(0.2);
        let grid = Grid::new(2, 2.0, 0.1).unwrap();
        assert!(partition_residual(&t, &grid, 3) < 1e-10);
        let p = |v: &[f64]| C64::new(libm::exp(-TWO_PI * (v[0] * v[0] + v[1] * v[1])), v[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            assert!((iota_action(&t, &p, 4, &v) - p(&v)).norm() < 1e-8);
            // ι(p·μ)_{γ+μ} = σ(γ,μ) ι(p)_γ
            let mu = [1i64, -1];
            let gam = [rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
            let mr = t.lattice_point(&mu);
            let pm = |u: &[f64]| {
                let s: Vec<f64> = u.iter().zip(&mr).map(|(a, b)| a + b).collect();
                t.sigma(&mr, u) * p(&s)
            };
            let gm = [gam[0] + mu[0], gam[1] + mu[1]];
            let lhs = iota_component(&t, &pm, &gm, &v);
            let rhs = iota_component(&t, &p, &gam, &v) * t.sigma(&t.lattice_point(&gam), &mr);
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn x_actions() {
        let t = TorusData::theta(0.13);
        let grid = Grid::new(2, 3.0, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut phi = WindowField::zeros(&grid, 1, 3);
        for n in lattice_window(1, 1) {
            phi.insert(n, random_field(&mut rng, &grid, 1, &[Family::Zbar])).unwrap();
        }
        let (m1, m2) = ([1i64, 0], [0i64, 1]);
        // (φ·μ₁)·μ₂ = σ(μ₁,μ₂) φ·(μ₁+μ₂)
        let lhs = x_module_action(&t, Side::Right, &m2, &x_module_action(&t, Side::Right, &m1, &phi).unwrap()).unwrap();
        let s = t.sigma(&t.lattice_point(&m1), &t.lattice_point(&m2));
        let rhs = x_module_action(&t, Side::Right, &[1, 1], &phi).unwrap().scale(s);
        assert!(lhs.sub(&rhs).max_abs() < 1e-14);
        // left and right commute
        let lr = x_module_action(&t, Side::Left, &m1, &x_module_action(&t, Side::Right, &m2, &phi).unwrap()).unwrap();
        let rl = x_module_action(&t, Side::Right, &m2, &x_module_action(&t, Side::Left, &m1, &phi).unwrap()).unwrap();
        assert!(lr.sub(&rl).max_abs() < 1e-14);
        // identity
        assert!(x_module_action(&t, Side::Left, &[0, 0], &phi).unwrap().sub(&phi).max_abs() == 0.0);
        // b_μ = b₀·(−μ)
        let mu = [1i64, -2];
        let one = GradedValue::scalar(1, ONE);
        let b0 = b_mu_field(&t, &grid, 3, &[0, 0], &one).unwrap();
        let bmu = b_mu_field(&t, &grid, 3, &mu, &one).unwrap();
        let shifted = x_module_action(&t, Side::Right, &[-1, 2], &b0).unwrap();
        assert!(bmu.sub(&shifted).max_abs() < 1e-14);
        // overflow
        let edge = b_mu_field(&t, &grid, 3, &[3, 0], &one).unwrap();
        assert!(matches!(x_module_action(&t, Side::Right, &[-1, 0], &edge), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn eta_states() {
        let t = TorusData::theta(0.05);
        let mut errs = vec![];
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let mu = [1i64, 1];
            let e = eta_mu0(&t, &grid, 2, &mu).unwrap();
            let x0 = x_apply(&t, &d, Part::Zero, &e).max_abs_interior(1);
            let eta = eta_closed(&t, &grid, 2).unwrap();
            errs.push((x0, x_full(&t, &d, &eta).max_abs_interior(1)));
            // not closed for the full connection
            let e0 = eta_mu0(&t, &grid, 2, &[0, 0]).unwrap();
            assert!(x_full(&t, &d, &e0).max_abs() > 0.1);
        }
        assert!((3.5..4.5).contains(&(errs[0].0 / errs[1].0)), "{errs:?}");
        assert!((3.5..4.5).contains(&(errs[0].1 / errs[1].1)), "{errs:?}");
    }

    #[test]
    fn adjoints_are_exact_on_the_grid() {
        let t = TorusData::theta(0.21);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for scheme in [DerivScheme::Central, DerivScheme::Fourier] {
            let grid = Grid::new(2, 3.0, 0.25).unwrap();
            let d = Deriv::new(&grid, scheme);
            let fam = [Family::Zeta, Family::Zbar];
            let f = random_field(&mut rng, &grid, 1, &fam);
            let h = random_field(&mut rng, &grid, 1, &fam);
            let lam = t.lattice_point(&[1, -1]);
            let lhs = x0_at(&t, &d, &lam, &f).inner(&h);
            let rhs = f.inner(&x0_adjoint_at(&t, &d, &lam, &h));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
            let w = [0.3, -0.4];
            let lhs = y_total_at(&t, &d, &w, &f).inner(&h);
            let rhs = f.inner(&y_total_adjoint_at(&t, &d, &w, &h));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn y_gauge_identity_and_generator() {
        let t = g2_torus();
        let grid = Grid::new(4, 2.0, 0.25).unwrap();
        let d = Deriv::new(&grid, DerivScheme::Central);
        let f = gaussian_field(&grid, 2, Blade::ONE, &[0.1, 0.0, -0.1, 0.2], 0.7);
        let w = [0.2, 0.1, -0.3, 0.0];
        let (r, pp) = y_gauge_residual(&t, &d, &w, &f);
        assert_eq!(pp, 0.0);
        assert!(r < 1e-3, "{r}");

        let t1 = TorusData::theta(0.4);
        let mut errs = vec![];
        for h in [0.1, 0.05] {
            let grid = Grid::new(2, 3.0, h).unwrap();
            let d = Deriv::new(&grid, DerivScheme::Central);
            let w = [0.3, -0.2];
            let a = a_field(&t1, &grid, &w, &e_plus_top(1));
            errs.push(y_total_at(&t1, &d, &w, &a).max_abs_interior(1));
        }
        assert!((3.5..4.5).contains(&(errs[0] / errs[1])), "{errs:?}");
    }

    #[test]
    fn a_is_invariant_and_tau_rho_inverts() {
        let t = TorusData::theta(0.31);
        let psi = |z: &[f64], w: &[f64]| a_value(&t, z, w);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let z = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let w = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = [rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
            assert!(invariance_defect(&t, &psi, &n, &z, &w) < 1e-13);
            let rho = |a: &[f64], b: &[f64]| rho_section(&t, &psi, a, b);
            let back = tau_coinvariant(&t, &rho, 3, &z, &w);
            assert!((back - psi(&z, &w)).norm() < 1e-8);
        }
        // τ output of a localized raw field is invariant
        let raw = |z: &[f64], w: &[f64]| C64::new(libm::exp(-3.0 * (z[0] * z[0] + z[1] * z[1] + w[0] * w[0] + w[1] * w[1])), 0.0);
        let tau = |z: &[f64], w: &[f64]| tau_coinvariant(&t, &raw, 4, z, w);
        let (z, w) = ([0.2, -0.3], [0.1, 0.4]);
        assert!(invariance_defect(&t, &tau, &[1, 0], &z, &w) < 1e-8);
        assert!(check_tail(&t, &raw, 4, &z, &w, 1e-8).is_ok());
        assert!(matches!(check_tail(&t, &raw, 0, &z, &w, 1e-8), Err(Error::Tail { .. })));
    }
}
