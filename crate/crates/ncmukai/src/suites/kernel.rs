//! Spectral shadow of the kernel theorems: Laplacians of the composed
//! connections at genus one, sector by sector.

use ncmukai_core::connections::lattice_window;
use ncmukai_core::spectral::{kernel_analysis, KernelReport, OscSide, SpectralParams};
use ncmukai_core::Result as CoreResult;
use rand::Rng;
use rayon::prelude::*;

use super::Ctx;
use crate::error::AppError;
use crate::report::{Convergence, Outcome, Table};

fn label(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(","))
}

fn record(out: &mut Outcome, tag: &str, rep: &KernelReport, tol_overlap: f64, grid: &ncmukai_core::field::Grid) {
    let (space, gen) = match rep.side {
        OscSide::X => ("Δ⁰", "η_μ⁰"),
        OscSide::Y => ("□⁰", "a(·,w)"),
    };
    let miss: usize = rep
        .sectors
        .iter()
        .map(|s| {
            let want = usize::from(s.kappa == rep.kernel_kappa);
            s.below_eps.abs_diff(want)
        })
        .sum();
    out.check(
        format!("kernel.{tag}.localization"),
        format!("{space} has exactly one eigenvalue below ε_disc, in sector k−l = {}, none elsewhere", rep.kernel_kappa),
        miss as f64,
        0.0,
        Some(grid),
        Convergence::Spectral,
    );
    out.check(
        format!("kernel.{tag}.overlap"),
        format!("kernel vector spans the sampled {gen}: 1 − overlap"),
        1.0 - rep.overlap,
        tol_overlap,
        Some(grid),
        Convergence::Spectral,
    );
    out.observe(format!("kernel.{tag}.eps_disc"), "ε_disc = 0.1 × first resolved gap", rep.eps_disc, Some(grid));
    for s in &rep.sectors {
        out.tables.push(Table {
            title: format!("{tag} sector k−l = {}", s.kappa),
            columns: vec!["index".into(), "eigenvalue".into(), "decay".into()],
            rows: s.eigenvalues.iter().zip(&s.decay).enumerate().map(|(i, (e, d))| vec![i as f64, *e, *d]).collect(),
        });
    }
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let cfg = ctx.cfg;
    let t = cfg.torus(1)?;
    let grid = cfg.grid1()?;
    let s = &cfg.spectral;
    let sp = SpectralParams { num_eigenvalues: s.num_eigenvalues, budget: s.eigensolver_budget, max_iter: s.max_iter, decay_tol: s.decay_tol };
    let mut rng = ctx.rng(0);
    let ws: Vec<Vec<f64>> = (0..s.w_samples).map(|_| vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]).collect();
    let mut jobs: Vec<(OscSide, Vec<f64>, String)> = Vec::new();
    for n in lattice_window(1, cfg.grid.lambda_window) {
        let tag = format!("x[{},{}]", n[0], n[1]);
        jobs.push((OscSide::X, t.lattice_point(&n), tag));
    }
    for w in ws {
        let tag = format!("y{}", label(&w));
        jobs.push((OscSide::Y, w, tag));
    }
    let reports: Vec<KernelReport> = jobs.par_iter().map(|(side, p, _)| kernel_analysis(&t, &grid, *side, p, &s.sector_list, &sp)).collect::<CoreResult<_>>()?;
    let mut out = Outcome::default();
    for ((_, _, tag), rep) in jobs.iter().zip(&reports) {
        record(&mut out, tag, rep, cfg.tolerances.overlap, &grid);
    }
    Ok(out)
}
