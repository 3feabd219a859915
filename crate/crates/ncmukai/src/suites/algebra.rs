//! Torus data, the exterior algebra and the twisted group algebra.

use ncmukai_core::exterior::{from_pm_basis, l_apply, pm_blade, to_pm_basis, Blade, Family, GradedValue};
use ncmukai_core::nc_algebra::{classical_limit_check, dbar_nc, derivation_xi, dolbeault_mul, involution, nc_mul, NCTorusElement};
use ncmukai_core::torus::{dbar_sigma_identities, TorusData};
use ncmukai_core::{Result as CoreResult, C64};
use rand::Rng;
use rayon::prelude::*;

use super::{gen, Ctx};
use crate::error::AppError;
use crate::report::{Convergence, Outcome};

const TRIALS: u64 = 20;

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// Configured tori plus random ones of genus 1..=3.
fn tori(ctx: &Ctx, slot: u64) -> Vec<TorusData> {
    let mut out = ctx.cfg.all_tori();
    for g in 1..=3 {
        for k in 0..TRIALS {
            out.push(gen::torus(&mut ctx.rng(slot + 100 * g as u64 + k), g, 1.0));
        }
    }
    out
}

/// `b` skew-symmetric and `c` skew-Hermitian.
fn symmetry_defect(t: &TorusData) -> f64 {
    let b = (&t.b + t.b.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let c = (&t.c + t.c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    b.max(c)
}

fn exterior_checks(out: &mut Outcome, tol: f64) {
    let mut eig: f64 = 0.0;
    let mut round: f64 = 0.0;
    for g in 1..=3usize {
        let full = 1u32 << g;
        for plus in 0..full {
            for minus in 0..full {
                for tau in 0..full {
                    let v = pm_blade(g, plus, minus, tau);
                    let k = plus.count_ones() as f64 - minus.count_ones() as f64;
                    let r = l_apply(&v).sub(&v.scale(C64::new(0.0, k))).expect("same g");
                    eig = eig.max(r.max_abs());
                }
            }
        }
        for b in Blade::enumerate(g, &Family::ALL) {
            let v = GradedValue::blade(g, b, C64::new(1.0, 0.0));
            round = round.max(from_pm_basis(&to_pm_basis(&v)).sub(&v).expect("same g").max_abs());
        }
    }
    out.check("exterior.l_eigen", "L(e_I⁺∧e_J⁻) = (k−l)i e_I⁺∧e_J⁻ on every blade, g ≤ 3", eig, tol, None, Convergence::Exact);
    out.check("exterior.pm_roundtrip", "e^± basis change is invertible: from_pm ∘ to_pm = id", round, tol, None, Convergence::Exact);
}

struct NcRes {
    assoc: f64,
    sigma: f64,
    invol: f64,
    leibniz: f64,
    dbar_sq: f64,
    dbar_leibniz: f64,
}

fn nc_trial<R: Rng>(t: &TorusData, rng: &mut R) -> CoreResult<NcRes> {
    let g = t.g;
    let (a, b, c) = (gen::nc_element(rng, g, 1, 4), gen::nc_element(rng, g, 1, 4), gen::nc_element(rng, g, 1, 4));
    let ab_c = nc_mul(t, &nc_mul(t, &a, &b)?, &c)?;
    let a_bc = nc_mul(t, &a, &nc_mul(t, &b, &c)?)?;
    let assoc = ab_c.sub(&a_bc).max_abs();

    let (n1, n2) = (gen::lattice_vector(rng, g, 2), gen::lattice_vector(rng, g, 2));
    let (e1, e2) = (NCTorusElement::basis(g, &n1), NCTorusElement::basis(g, &n2));
    let s = t.sigma(&t.lattice_point(&n1), &t.lattice_point(&n2));
    let sigma = nc_mul(t, &e1, &e2)?.sub(&nc_mul(t, &e2, &e1)?.scale(s * s)).max_abs();

    let invol = involution(&nc_mul(t, &a, &b)?).sub(&nc_mul(t, &involution(&b), &involution(&a))?).max_abs();

    let xi = gen::real_vector(rng, g, 1.0);
    let lhs = derivation_xi(t, &xi, &nc_mul(t, &a, &b)?);
    let rhs = nc_mul(t, &derivation_xi(t, &xi, &a), &b)?.add(&nc_mul(t, &a, &derivation_xi(t, &xi, &b))?);
    let leibniz = lhs.sub(&rhs).max_abs() / (1.0 + lhs.max_abs());

    let x = gen::dolbeault(rng, g);
    let y = gen::dolbeault(rng, g);
    let dd = dbar_nc(t, &dbar_nc(t, &x));
    let dbar_sq = dd.max_abs() / (1.0 + x.max_abs());
    let deg = x.degree_max();
    let sign = if deg % 2 == 0 { 1.0 } else { -1.0 };
    let lhs = dbar_nc(t, &dolbeault_mul(t, &x, &y)?);
    let rhs = dolbeault_mul(t, &dbar_nc(t, &x), &y)?.add(&dolbeault_mul(t, &x, &dbar_nc(t, &y))?.scale(C64::new(sign, 0.0)));
    let dbar_leibniz = lhs.sub(&rhs).max_abs() / (1.0 + lhs.max_abs());
    Ok(NcRes { assoc, sigma, invol, leibniz, dbar_sq, dbar_leibniz })
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let tol = &ctx.cfg.tolerances;
    let mut out = Outcome::default();

    let all = tori(ctx, 0);
    out.check(
        "torus.reassembly",
        "b dz∧dz + conj(b) dz̄∧dz̄ + c dz∧dz̄ reproduces B on real basis pairs",
        max(all.iter().map(TorusData::reassembly_residual)),
        tol.algebra,
        None,
        Convergence::Exact,
    );
    out.check("torus.skew", "b skew-symmetric, c skew-Hermitian", max(all.iter().map(symmetry_defect)), tol.algebra, None, Convergence::Exact);

    let t1 = ctx.cfg.torus(1)?;
    let grid = ctx.cfg.grid1()?;
    let w = ctx.cfg.grid.lambda_window;
    let mut ds: f64 = 0.0;
    for n in ncmukai_core::connections::lattice_window(1, w) {
        let (a, b) = dbar_sigma_identities(&t1, &t1.lattice_point(&n), &grid);
        ds = ds.max(a).max(b);
    }
    out.check(
        "torus.dbar_sigma",
        "∂̄σ(λ,·) = −2πi(ω − r_λ*ω)σ(λ,·) = 2πi(ω − l_λ*ω)σ(λ,·)",
        ds,
        tol.dbar_sigma,
        Some(&grid),
        Convergence::H2,
    );

    exterior_checks(&mut out, tol.algebra);

    // twisted group algebra on configured and random tori
    let mut nc_tori: Vec<TorusData> = ctx.cfg.all_tori().into_iter().filter(|t| t.g <= 2).collect();
    for g in 1..=2 {
        for k in 0..4 {
            nc_tori.push(gen::torus(&mut ctx.rng(10_000 + 10 * g as u64 + k), g, 0.5));
        }
    }
    let jobs: Vec<(usize, u64)> = (0..nc_tori.len()).flat_map(|i| (0..TRIALS).map(move |k| (i, k))).collect();
    let res: Vec<NcRes> = jobs
        .par_iter()
        .map(|&(i, k)| nc_trial(&nc_tori[i], &mut ctx.rng(20_000 + 1_000 * i as u64 + k)))
        .collect::<CoreResult<_>>()?;
    let m = |f: fn(&NcRes) -> f64| max(res.iter().map(f));
    out.check("nc.associativity", "(f∘g)∘h = f∘(g∘h)", m(|r| r.assoc), tol.algebra, None, Convergence::Exact);
    out.check("nc.sigma_commutation", "e_λ∘e_μ = σ(λ,μ)² e_μ∘e_λ", m(|r| r.sigma), tol.algebra, None, Convergence::Exact);
    out.check("nc.involution", "(f∘g)* = g*∘f*", m(|r| r.invol), tol.algebra, None, Convergence::Exact);
    out.check("nc.derivation_leibniz", "ξ(f∘g) = ξ(f)∘g + f∘ξ(g)", m(|r| r.leibniz), tol.algebra, None, Convergence::Exact);
    out.check("nc.dbar_square", "∂̄∂̄ = 0 on 𝒜^{0,•}(Λ;σ)", m(|r| r.dbar_sq), tol.algebra, None, Convergence::Exact);
    out.check("nc.dbar_leibniz", "∂̄(xy) = ∂̄x·y + (−1)^{|x|} x·∂̄y", m(|r| r.dbar_leibniz), tol.algebra, None, Convergence::Exact);

    // classical limit against the pointwise Fourier model on the dual torus
    let mut prod: f64 = 0.0;
    let mut dbar: f64 = 0.0;
    let mut comm: f64 = 0.0;
    for (g, n, w) in [(1usize, 64usize, 3i64), (2, 16, 2)] {
        let zero = vec![vec![0.0; 2 * g]; 2 * g];
        let t = TorusData::standard(g, &zero)?;
        let mut rng = ctx.rng(30_000 + g as u64);
        let f = gen::nc_element(&mut rng, g, w, 20);
        let h = gen::nc_element(&mut rng, g, w, 20);
        let r = classical_limit_check(&t, &f, &h, n)?;
        // derivative coefficients grow like 2π|n|
        let scale = 1.0 + 2.0 * std::f64::consts::PI * (w as f64) * f.max_abs() * (2 * g) as f64;
        prod = prod.max(r.product);
        dbar = dbar.max(r.dbar / scale);
        comm = comm.max(r.commutator);
    }
    out.check("nc.classical.commutative", "B = 0: f∘g = g∘f", comm, 0.0, None, Convergence::Exact);
    out.check("nc.classical.product", "B = 0: (f∘g)^ = f̂ ĝ pointwise on the dual torus", prod, tol.classical, None, Convergence::Exact);
    out.check("nc.classical.dbar", "B = 0: (∂̄f)^ = ∂̄f̂ (relative)", dbar, tol.classical, None, Convergence::Exact);
    Ok(out)
}
