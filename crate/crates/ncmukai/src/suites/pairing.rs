//! The integral pairings α (𝒳 → 𝒜^{0,•}(Λ;σ)) and β (𝒴 → 𝒜^{0,•}(X;B)).

use ncmukai_core::connections::{a_value, b_mu_field, gaussian_field, p_right_action, Side};
use ncmukai_core::exterior::{Blade, Family, GradedValue};
use ncmukai_core::field::{sample, Deriv, DerivScheme, Field, Grid};
use ncmukai_core::math::PI;
use ncmukai_core::pairings::{alpha, alpha_chain_residual, alpha_module_residual, beta, beta_intertwining, nc_right, stokes_check, tensor_field, Quadrature};
use ncmukai_core::torus::TorusData;
use ncmukai_core::C64;

use super::Ctx;
use crate::error::AppError;
use crate::report::{Convergence, Outcome};

fn top(g: usize) -> Blade {
    Blade::new(0, (1 << g) - 1, 0)
}

fn zeta_top(g: usize) -> Blade {
    Blade::new((1 << g) - 1, 0, 0)
}

/// Mixed-degree Gaussian forms standing in for sections of 𝒬 and 𝒫.
fn q_form(grid: &Grid) -> Field {
    let mut q = gaussian_field(grid, 1, Blade::ONE, &[0.1, -0.2], 0.6);
    q.add_assign(&gaussian_field(grid, 1, top(1), &[-0.3, 0.1], 0.5).scale(C64::new(0.3, 0.7)));
    q.add_assign(&gaussian_field(grid, 1, Blade::gen(Family::Zeta, 0), &[0.2, 0.2], 0.55));
    q
}

fn p_form(grid: &Grid) -> Field {
    let mut p = gaussian_field(grid, 1, Blade::ONE, &[0.2, 0.1], 0.6).scale(C64::new(0.8, -0.2));
    p.add_assign(&gaussian_field(grid, 1, top(1), &[0.0, -0.1], 0.5));
    p.add_assign(&gaussian_field(grid, 1, Blade::gen(Family::Tau, 0), &[0.1, 0.3], 0.5).scale(C64::new(0.0, 1.0)));
    p
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let (btol, ttol, win) = (cfg.grid.boundary_tol, cfg.grid.tail_tol, cfg.pairing.window);
    let t = cfg.torus(1)?;
    let grid = cfg.grid1()?;
    let d = Deriv::new(&grid, DerivScheme::Central);
    let mut out = Outcome::default();

    out.check(
        "pairing.quadrature",
        "grid quadrature of ∫ e^{−π|v|²/s²} = s^{2g}",
        Quadrature::new(&grid).gaussian_residual(0.7),
        cfg.pairing.quad_tol,
        Some(&grid),
        Convergence::Spectral,
    );
    let b0 = b_mu_field(&t, &grid, 1, &[0, 0], &GradedValue::blade(1, top(1), C64::new(1.0, 0.0)))?;
    let a0 = alpha(&t, &b0, btol)?;
    let v0 = a0.terms.get(&0).map(|e| e.get(&[0, 0])).unwrap_or_default();
    out.check("pairing.alpha.vacuum", "α(b₀ dz̄) = ∫ e^{−2π|z|²} = 1/2", (v0 - C64::new(0.5, 0.0)).norm(), tol.alpha, Some(&grid), Convergence::Spectral);

    let (q, p) = (q_form(&grid), p_form(&grid));
    let phi = tensor_field(&t, &q, &p, win, ttol)?;
    let mus = [[1i64, 0], [0, 1], [-1, 1]];
    for (side, tag, anchor) in [(Side::Right, "right", "α(φ·μ) = α(φ)·μ"), (Side::Left, "left", "α(μ·φ) = μ·α(φ)")] {
        let mut r: f64 = 0.0;
        for mu in &mus {
            r = r.max(alpha_module_residual(&t, side, mu, &phi, btol)?);
        }
        out.check(format!("pairing.alpha.module_{tag}"), anchor, r, tol.alpha, Some(&grid), Convergence::Exact);
    }
    let base = alpha(&t, &phi, btol)?;
    let mut r: f64 = 0.0;
    for mu in [[1i64, 0], [0, -1]] {
        let lhs = alpha(&t, &tensor_field(&t, &q, &p_right_action(&t, &p, &mu)?, win, ttol)?, btol)?;
        let rhs = nc_right(&t, &base, &mu)?;
        r = r.max(lhs.sub(&rhs).max_abs() / rhs.max_abs().max(1e-300));
    }
    out.check("pairing.alpha.through_p", "α(q⊗p·μ) = α(q⊗p)·μ", r, tol.alpha, Some(&grid), Convergence::Exact);

    let per = sample(&grid, |v| C64::new((2.0 * PI * v[0]).cos(), (2.0 * PI * v[1]).sin()) + 2.0);
    let a = alpha(&t, &tensor_field(&t, &q.mul_pointwise(&per), &p, win, ttol)?, btol)?;
    let b = alpha(&t, &tensor_field(&t, &q, &p.mul_pointwise(&per), win, ttol)?, btol)?;
    out.check("pairing.alpha.balanced", "α(qf ⊗ p) = α(q ⊗ fp) for Λ-periodic f", a.sub(&b).max_abs() / a.max_abs().max(1e-300), tol.algebra, Some(&grid), Convergence::Exact);

    let (chain, chain_rel) = alpha_chain_residual(&t, &d, &phi, btol)?;
    out.check("pairing.alpha.chain", "α(𝕏φ) = ∂̄α(φ)", chain, tol.alpha, Some(&grid), Convergence::H2);
    out.observe("pairing.alpha.chain_relative", "‖α(𝕏φ) − ∂̄α(φ)‖ / ‖∂̄α(φ)‖", chain_rel, Some(&grid));

    let f = gaussian_field(&grid, 1, Blade::ONE, &[0.1, 0.0], 0.6);
    let zb = f.mul_pointwise(&sample(&grid, |v| C64::new(v[0], -v[1])));
    let st = stokes_check(&t, &d, &f).max(stokes_check(&t, &d, &zb)).max(stokes_check(&t, &d, &q));
    out.check("pairing.stokes", "∫ ∂̄f ∧ dz = 0 for rapidly decreasing f", st, tol.stokes, Some(&grid), Convergence::H2);

    beta_checks(&mut out, cfg, tol.algebra)?;
    Ok(out)
}

fn beta_checks(out: &mut Outcome, cfg: &crate::config::Config, tol: f64) -> Result<(), AppError> {
    let t = cfg.torus(1)?;
    let h = cfg.grid.genus2.h;
    let grid = Grid::new(2, 2.0, h)?;
    let vac = |z: &[f64], w: &[f64]| GradedValue::blade(1, zeta_top(1), a_value(&t, z, w));
    let b = beta(&grid, 1, &vac)?;
    let one = b.comps.get(&Blade::ONE).map(|c| c.iter().map(|x| (*x - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)).unwrap_or(1.0);
    out.check("pairing.beta.vacuum", "β(a dζ̄) = 1", one, tol, Some(&grid), Convergence::Exact);

    let f = |v: &[f64]| C64::new((2.0 * PI * v[0]).cos(), 0.5 * (2.0 * PI * v[1]).sin());
    let hh = |v: &[f64]| C64::new(1.0 + (2.0 * PI * (v[0] + v[1])).sin(), 0.2);
    let phi = |z: &[f64], w: &[f64]| {
        let mut v = GradedValue::blade(1, zeta_top(1), a_value(&t, z, w));
        v.add_term(Blade::new(1, 0, 1), a_value(&t, z, w) * z[0]);
        v.add_term(Blade::new(0, 1, 0), C64::new(1.0, 0.0));
        v
    };
    let lhs = beta(&grid, 1, &|z: &[f64], w: &[f64]| phi(z, w).scale(f(z) * hh(w)))?;
    let rhs = beta(&grid, 1, &phi)?.mul_pointwise(&sample(&grid, |v| f(v) * hh(v)));
    out.check("pairing.beta.bimodule", "β(f·ψ·h) = f·β(ψ)·h", lhs.sub(&rhs).max_abs(), tol, Some(&grid), Convergence::Exact);

    // intertwining with the connections is reported, not asserted
    let t2: TorusData = cfg.torus(2)?;
    let g4 = Grid::new(4, 1.0, h)?;
    let d4 = Deriv::new(&g4, DerivScheme::Central);
    let phi2 = |z: &[f64], w: &[f64]| {
        let a = a_value(&t2, z, w) * (-PI * z.iter().map(|x| x * x).sum::<f64>()).exp();
        let mut v = GradedValue::blade(2, zeta_top(2), a);
        v.add_term(Blade::new(3, 1, 0), a * w[1]);
        v.add_term(Blade::new(3, 0, 2), a * z[2]);
        v
    };
    let (plain, full) = beta_intertwining(&t2, &d4, &phi2)?;
    out.observe("pairing.beta.intertwining", "β(𝕐φ) − (−1)^g ∂̄β(φ)", plain, Some(&g4));
    out.observe("pairing.beta.intertwining_phi", "β((𝕐+Φ)φ) − (−1)^g ∂̄β(φ)", full, Some(&g4));
    Ok(())
}
