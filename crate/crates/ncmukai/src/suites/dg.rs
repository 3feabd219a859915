//! Finite curved DGAs, twisted complexes and bimodules.

use nalgebra::DMatrix;
use ncmukai_core::dg::{
    gauge_square_zero_check, gerby_zero_mode, hom_check, prototype, random_complex, random_dga, random_elem, random_gauge_bimodule, random_morphism, CurvedDGA, Elem,
    TwistedBimodule,
};
use ncmukai_core::torus::TorusData;
use ncmukai_core::{Error as CoreError, Result as CoreResult, C64};
use rand::Rng;
use rayon::prelude::*;

use super::{gen, Ctx};
use crate::error::AppError;
use crate::instance::{self, InstanceFile};
use crate::report::{Convergence, Outcome};

/// The shipped instances: the prototype `Λ[ε₁,ε₂] ⊗ Mat₂` with its connection,
/// and the constant-coefficient truncation of the gerby torus over `t`.
pub fn default_instances(t: &TorusData) -> CoreResult<Vec<InstanceFile>> {
    let (proto, omega) = prototype()?;
    let gerby = gerby_zero_mode(t)?;
    Ok(vec![InstanceFile::from_dga("prototype", &proto, Some(&omega)), InstanceFile::from_dga("gerby_zero_mode", &gerby, None)])
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn neg(v: &[C64]) -> Elem {
    v.iter().map(|x| -*x).collect()
}

#[derive(Clone, Copy, Default)]
struct Res {
    axioms: f64,
    bianchi: f64,
    complex: f64,
    hom: f64,
    linearity: f64,
    bimodule: f64,
    coherence: f64,
}

impl Res {
    fn join(self, o: Res) -> Res {
        Res {
            axioms: self.axioms.max(o.axioms),
            bianchi: self.bianchi.max(o.bianchi),
            complex: self.complex.max(o.complex),
            hom: self.hom.max(o.hom),
            linearity: self.linearity.max(o.linearity),
            bimodule: self.bimodule.max(o.bimodule),
            coherence: self.coherence.max(o.coherence),
        }
    }
}

/// Complexes, Hom differentials, bimodules and functor coherence over `a`,
/// whose flat untwist is `twist(−omega)`.
fn exercise<R: Rng>(a: &CurvedDGA, omega: &[C64], rng: &mut R) -> CoreResult<Res> {
    let ax = a.axioms();
    let mut r = Res { axioms: ax.max(), bianchi: ax.bianchi, ..Res::default() };
    let e1 = random_complex(a, omega, rng)?;
    let e2 = random_complex(a, omega, rng)?;
    r.complex = e1.curvature_residual(a).max(e2.curvature_residual(a));
    for p in -1..=2 {
        let phi = random_morphism(a, &e1, &e2, p, rng);
        let h = hom_check(a, &e1, &e2, &phi, p)?;
        r.hom = r.hom.max(h.d_squared);
        r.linearity = r.linearity.max(h.linearity);
    }
    let (a2, x) = random_gauge_bimodule(a, rng)?;
    let (a3, y) = random_gauge_bimodule(&a2, rng)?;
    let (xy, xy_ax) = x.compose_with_axioms(&y, a, &a2, &a3)?;
    r.bimodule = x.axioms(a, &a2).max().max(y.axioms(&a2, &a3).max()).max(xy_ax.max());
    let xe = x.apply(&e1, a, &a2)?;
    let lhs = xy.apply(&e1, a, &a3)?;
    let rhs = y.apply(&xe, &a2, &a3)?;
    r.coherence = max_abs(&(lhs.big(&a3) - rhs.big(&a3))).max(max_abs(&(xe.big(&a2) - x.apply_big(&e1, &a2))));
    r.complex = r.complex.max(xe.curvature_residual(&a2)).max(lhs.curvature_residual(&a3));
    Ok(r)
}

fn square_zero<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let h = n / 2;
    DMatrix::from_fn(n, n, |r, c| if r < h && c >= h { gen::crand(rng) } else { C64::new(0.0, 0.0) })
}

/// `f = id` with a random odd ω: accepted only if the curvature condition holds.
fn rejects_bad_homomorphism<R: Rng>(a: &CurvedDGA, rng: &mut R) -> bool {
    let id = DMatrix::<C64>::identity(a.dim(), a.dim());
    let omega = random_elem(a, 1, rng);
    matches!(TwistedBimodule::homomorphism(a, a, &id, &omega), Err(CoreError::NotHomomorphism(_)))
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let cfg = ctx.cfg;
    let tol = cfg.tolerances.dg;
    let mut out = Outcome::default();

    for (k, file) in cfg.dg_instances.files.iter().enumerate() {
        let inst = instance::load(&cfg.resolve(file))?;
        let (name, a) = (&inst.name, &inst.alg);
        let ax = a.axioms();
        out.check(format!("dg.{name}.axioms"), "associativity, Leibniz, d² = [c,·], unit, grading", ax.max(), tol, None, Convergence::Exact);
        out.check(format!("dg.{name}.bianchi"), "dc = 0", ax.bianchi, tol, None, Convergence::Exact);
        let id = TwistedBimodule::identity(a);
        out.check(format!("dg.{name}.identity_bimodule"), "(𝒜, d) is a bimodule: 𝕏² = c·x − x·c", id.axioms(a, a).max(), tol, None, Convergence::Exact);
        let mut rng = ctx.rng(1_000 * k as u64);
        let (b, x) = random_gauge_bimodule(a, &mut rng)?;
        out.check(
            format!("dg.{name}.gauge_bimodule"),
            "(id, ω) gives a bimodule into the twist with c' = c − d'ω − ω²",
            x.axioms(a, &b).max(),
            tol,
            None,
            Convergence::Exact,
        );
        if let Some(omega) = &inst.connection {
            let rank_one = ncmukai_core::dg::TwistedComplex::new(a, vec![0], ncmukai_core::dg::AlgMatrix::scalar(neg(omega)))?;
            let mut r = Res { complex: rank_one.curvature_residual(a), ..Res::default() };
            for trial in 0..10 {
                r = r.join(exercise(a, omega, &mut ctx.rng(1_000 * k as u64 + 1 + trial))?);
            }
            out.check(format!("dg.{name}.complex_curvature"), "𝔼² = −(·c)", r.complex, tol, None, Convergence::Exact);
            out.check(format!("dg.{name}.hom_d_squared"), "d² = 0 on Hom(E₁, E₂)", r.hom.max(r.linearity), tol, None, Convergence::Exact);
            out.check(format!("dg.{name}.coherence"), "(𝒳⊗𝒴)_* = 𝒴_*∘𝒳_*", r.coherence, tol, None, Convergence::Exact);
            out.check(format!("dg.{name}.bimodule_curvature"), "𝕏² = c₁·x − x·c₂ for composed bimodules", r.bimodule, tol, None, Convergence::Exact);
            let rejected = rejects_bad_homomorphism(a, &mut ctx.rng(1_000 * k as u64 + 999));
            out.check(format!("dg.{name}.rejects_non_homomorphism"), "(f, ω) failing f(c₁) = c₂ + d₂ω + ω² is rejected", if rejected { 0.0 } else { 1.0 }, 0.0, None, Convergence::Exact);
        }
    }

    let trials = cfg.dg_instances.random_trials as u64;
    let res: Vec<Res> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ctx.rng(100_000 + k);
            let (a, omega) = random_dga(&mut rng)?;
            exercise(&a, &omega, &mut rng)
        })
        .collect::<CoreResult<_>>()?;
    let r = res.into_iter().fold(Res::default(), Res::join);
    out.check("dg.random.axioms", "curved DGA axioms on random Λ[ε₁,ε₂]⊗Mat_r twists", r.axioms, tol, None, Convergence::Exact);
    out.check("dg.random.bianchi", "dc = 0", r.bianchi, tol, None, Convergence::Exact);
    out.check("dg.random.complex_curvature", "𝔼² = −(·c)", r.complex, tol, None, Convergence::Exact);
    out.check("dg.random.hom_d_squared", "d² = 0 on Hom(E₁, E₂), all degrees", r.hom.max(r.linearity), tol, None, Convergence::Exact);
    out.check("dg.random.bimodule_curvature", "𝕏² = c₁·x − x·c₂", r.bimodule, tol, None, Convergence::Exact);
    out.check("dg.random.coherence", "(𝒳⊗𝒴)_* = 𝒴_*∘𝒳_*", r.coherence, tol, None, Convergence::Exact);

    let gauge: Vec<(f64, f64)> = (2..=8usize)
        .map(|n| {
            let mut rng = ctx.rng(200_000 + n as u64);
            let x0 = DMatrix::from_fn(n, n, |_, _| gen::crand(&mut rng));
            let c = &x0 * &x0;
            let phi = square_zero(n, &mut rng) - &x0;
            let g = gauge_square_zero_check(&x0, &phi, &c)?;
            Ok((g.hypothesis, g.square))
        })
        .collect::<CoreResult<_>>()?;
    let hyp = gauge.iter().map(|g| g.0).fold(0.0, f64::max);
    let sq = gauge.iter().map(|g| g.1).fold(0.0, f64::max);
    out.check("dg.gauge.hypothesis", "[𝕏⁰,Φ] + Φ∘Φ = −c", hyp, tol, None, Convergence::Exact);
    out.check("dg.gauge.square_zero", "(𝕏⁰ + Φ)² = 0", sq, tol, None, Convergence::Exact);
    Ok(out)
}
