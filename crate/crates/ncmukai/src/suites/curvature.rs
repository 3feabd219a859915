//! Z-connections on the Poincaré bimodules: curvature laws at genus two and
//! closedness of the η states at genus one.

use ncmukai_core::connections::{
    b_mu_field, eta_closed, eta_mu0, gaussian_field, partition_residual, p_curvature_residual, phi_form_square, q_curvature_residual, x0_adjoint_at, x0_at, x_apply, x_full,
    x_module_action, y_gauge_residual, Part, Side, WindowField,
};
use ncmukai_core::exterior::{Blade, Family, GradedValue};
use ncmukai_core::field::{Deriv, DerivScheme, Field, Grid};
use ncmukai_core::C64;
use rand::Rng;

use super::{gen, Ctx};
use crate::error::AppError;
use crate::report::{Convergence, Outcome};

/// Mixed-degree Gaussian test form on the genus-two grid.
fn test_form(grid: &Grid) -> Field {
    let mut p = gaussian_field(grid, 2, Blade::ONE, &[0.0; 4], 0.7);
    p.add_assign(&gaussian_field(grid, 2, Blade::gen(Family::Zbar, 0), &[0.1, -0.1, 0.0, 0.1], 0.6).scale(C64::new(0.5, 0.5)));
    p.add_assign(&gaussian_field(grid, 2, Blade::gen(Family::Tau, 1), &[-0.1, 0.0, 0.1, 0.0], 0.6).scale(C64::new(0.0, -0.7)));
    p
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let mut out = Outcome::default();

    // genus two: ℙ² = 2πi B^{0,2}, ℚ² = −2πi B^{0,2}, [𝕐⁰,Φ] + Φ² = −2πi B^{0,2}
    let t2 = cfg.torus(2)?;
    let grid2 = cfg.grid2()?;
    let d2 = Deriv::new(&grid2, DerivScheme::Central);
    let p = test_form(&grid2);
    out.check("curv.p_square", "ℙ∘ℙ = 2πi B^{0,2}∧", p_curvature_residual(&t2, &d2, &p), tol.curvature_square, Some(&grid2), Convergence::H2);
    out.check("curv.q_square", "ℚ∘ℚ = −2πi ∧B^{0,2}", q_curvature_residual(&t2, &d2, &p), tol.curvature_square, Some(&grid2), Convergence::H2);
    let mut rng = ctx.rng(0);
    let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let (gauge, phi_sq) = y_gauge_residual(&t2, &d2, &w, &p);
    out.check("curv.y_gauge", "[𝕐⁰,Φ] + Φ∘Φ + 2πi B^{0,2} = 0", gauge, tol.curvature, Some(&grid2), Convergence::H2);
    let phi_sq = phi_sq.max(phi_form_square(&t2, &gen::real_vector(&mut rng, 2, 1.0), &grid2));
    out.check("curv.phi_square", "Φ∘Φ = 0", phi_sq, tol.algebra, Some(&grid2), Convergence::Exact);

    // genus one
    let t1 = cfg.torus(1)?;
    let grid = cfg.grid1()?;
    let d = Deriv::new(&grid, DerivScheme::Central);
    out.check("conn.partition", "Σ_λ h(v + λ) = 1", partition_residual(&t1, &grid, 3), tol.exact, Some(&grid), Convergence::Exact);

    let h2 = grid.h * grid.h;
    let eta = eta_closed(&t1, &grid, 2)?;
    out.check("conn.eta_closed", "𝕏η = 0 for η = Σ_μ η_μ", x_full(&t1, &d, &eta).max_abs_interior(1), tol.eta_constant * h2, Some(&grid), Convergence::H2);
    let mut x0: f64 = 0.0;
    for mu in [[0i64, 0], [1, 1], [-1, 0]] {
        x0 = x0.max(x_apply(&t1, &d, Part::Zero, &eta_mu0(&t1, &grid, 2, &mu)?).max_abs_interior(1));
    }
    out.check("conn.eta_mu0_x0", "𝕏⁰η_μ⁰ = 0", x0, tol.eta_constant * h2, Some(&grid), Convergence::H2);
    let e00 = x_full(&t1, &d, &eta_mu0(&t1, &grid, 2, &[0, 0])?).max_abs();
    out.observe("conn.eta00_defect", "‖𝕏η₀⁰‖_∞", e00, Some(&grid));
    out.check("conn.eta00_not_closed", "none of the η_μ⁰ are closed: ‖𝕏η₀⁰‖ ≥ floor", (tol.eta_floor - e00).max(0.0), 0.0, Some(&grid), Convergence::Exact);

    // bimodule structure of the X-side fields
    let one = GradedValue::scalar(1, C64::new(1.0, 0.0));
    let mut phi = b_mu_field(&t1, &grid, 3, &[0, 0], &one)?;
    phi = phi.add(&b_mu_field(&t1, &grid, 3, &[1, 0], &GradedValue::blade(1, Blade::gen(Family::Zbar, 0), C64::new(0.3, -0.2)))?);
    let (m1, m2) = ([1i64, 0], [0i64, 1]);
    let right = |mu: &[i64], f: &WindowField| x_module_action(&t1, Side::Right, mu, f);
    let left = |mu: &[i64], f: &WindowField| x_module_action(&t1, Side::Left, mu, f);
    let s = t1.sigma(&t1.lattice_point(&m1), &t1.lattice_point(&m2));
    let assoc = right(&m2, &right(&m1, &phi)?)?.sub(&right(&[1, 1], &phi)?.scale(s)).max_abs();
    let commute = left(&m1, &right(&m2, &phi)?)?.sub(&right(&m2, &left(&m1, &phi)?)?).max_abs();
    out.check("conn.x_module", "(φ·μ₁)·μ₂ = σ(μ₁,μ₂) φ·(μ₁+μ₂); left and right actions commute", assoc.max(commute), tol.algebra, Some(&grid), Convergence::Exact);

    let lam = t1.lattice_point(&[1, -1]);
    let f = phi.comps.get(&vec![0, 0]).cloned().unwrap_or_else(|| Field::zeros(&grid, 1));
    let g = phi.comps.get(&vec![1, 0]).cloned().unwrap_or_else(|| Field::zeros(&grid, 1));
    let lhs = x0_at(&t1, &d, &lam, &f).inner(&g);
    let rhs = f.inner(&x0_adjoint_at(&t1, &d, &lam, &g));
    out.check("conn.x0_adjoint", "⟨𝕏⁰f, g⟩ = ⟨f, 𝕏⁰*g⟩ on the grid", (lhs - rhs).norm() / lhs.norm().max(1.0), tol.algebra, Some(&grid), Convergence::Exact);
    Ok(out)
}
