//! Ladder operators and oscillator states in the polynomial-Gaussian calculus.

use ncmukai_core::math::TWO_PI;
use ncmukai_core::polygauss::{commutation_residuals, hamiltonian, hermite_state, ladder, vacuum_x, vacuum_y, Ladder, LadderParams};
use ncmukai_core::C64;
use rayon::prelude::*;

use super::{gen, Ctx};
use crate::error::AppError;
use crate::report::{Convergence, Outcome};

const TRIALS: u64 = 100;
const GROUND_TRIALS: u64 = 20;

#[derive(Clone, Copy)]
enum Side {
    X,
    Y,
}

impl Side {
    fn tag(self) -> &'static str {
        match self {
            Side::X => "x",
            Side::Y => "y",
        }
    }
}

fn params<R: rand::Rng>(rng: &mut R, side: Side, g: usize) -> (ncmukai_core::torus::TorusData, LadderParams, ncmukai_core::polygauss::PolyGauss) {
    let t = gen::torus(rng, g, 1.0);
    match side {
        Side::X => {
            let mu = t.lattice_point(&gen::lattice_vector(rng, g, 2));
            (t.clone(), LadderParams::x_side(&t, &mu), vacuum_x(&t, &mu))
        }
        Side::Y => {
            let w = gen::real_vector(rng, g, 1.0);
            (t.clone(), LadderParams::y_side(&t, &w), vacuum_y(&t, &w))
        }
    }
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

pub fn run(ctx: &Ctx) -> Result<Outcome, AppError> {
    let tol = &ctx.cfg.tolerances;
    let mut out = Outcome::default();
    let sides = [Side::X, Side::Y];

    for g in 1..=2usize {
        for (s, &side) in sides.iter().enumerate() {
            let slot = (g as u64 * 2 + s as u64) * 10_000;
            let res: Vec<f64> = (0..TRIALS)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ctx.rng(slot + k);
                    let (_, prm, _) = params(&mut rng, side, g);
                    let f = gen::polygauss(&mut rng, g);
                    max(commutation_residuals(&prm, &f))
                })
                .collect();
            let anchor = match side {
                Side::X => "[ℍ,𝔸] = −2π𝔸, [ℍ,𝔸*] = 2π𝔸*, [ℍ,𝔹] = −2π𝔹, [ℍ,𝔹*] = 2π𝔹*, [𝔸,𝔸*] = [𝔹,𝔹*] = 4π, mixed pairs commute",
                Side::Y => "[𝕃,𝔸] = −2π𝔸, [𝕃,𝔸*] = 2π𝔸*, [𝕃,𝔹] = −2π𝔹, [𝕃,𝔹*] = 2π𝔹*, [𝔸,𝔸*] = [𝔹,𝔹*] = 4π, mixed pairs commute",
            };
            out.check(format!("osc.commutation.{}.g{g}", side.tag()), anchor, max(res), tol.exact, None, Convergence::Exact);

            // ground states: annihilated by 𝔸, 𝔹 with energy 2πg
            let ground: Vec<(f64, f64)> = (0..GROUND_TRIALS)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ctx.rng(slot + 5_000 + k);
                    let (_, prm, vac) = params(&mut rng, side, g);
                    let ann = max((0..g).flat_map(|j| [Ladder::A, Ladder::B].map(|l| ladder(l, j, &prm, &vac).p.max_abs())));
                    let e = vac.scale(C64::new(TWO_PI * g as f64, 0.0));
                    (ann / vac.p.max_abs(), gen::rel(&hamiltonian(&prm, &vac), &e))
                })
                .collect();
            let (ann_anchor, energy_anchor) = match side {
                Side::X => ("𝔸 b_μ = 𝔹 b_μ = 0", "ℍ b_μ = 2πg b_μ"),
                Side::Y => ("𝔸 a(·,w) = 𝔹 a(·,w) = 0", "𝕃 a(·,w) = 2πg a(·,w)"),
            };
            out.check(format!("osc.ground.annihilation.{}.g{g}", side.tag()), ann_anchor, max(ground.iter().map(|r| r.0)), tol.algebra, None, Convergence::Exact);
            out.check(format!("osc.ground.energy.{}.g{g}", side.tag()), energy_anchor, max(ground.iter().map(|r| r.1)), tol.algebra, None, Convergence::Exact);
        }
    }

    // Hermite spectrum: all i, j ≤ 5 at genus one, total level ≤ 4 at genus two
    for (s, &side) in sides.iter().enumerate() {
        for g in 1..=2usize {
            let mut rng = ctx.rng(900_000 + 10 * s as u64 + g as u64);
            let (_, prm, vac) = params(&mut rng, side, g);
            let levels: Vec<Vec<(usize, usize)>> = if g == 1 {
                (0..=5).flat_map(|i| (0..=5).map(move |j| vec![(i, j)])).collect()
            } else {
                let mut v = Vec::new();
                for a in 0..=2 {
                    for b in 0..=2 {
                        for c in 0..=2 {
                            for d in 0..=2 {
                                if a + b + c + d <= 4 {
                                    v.push(vec![(a, b), (c, d)]);
                                }
                            }
                        }
                    }
                }
                v
            };
            let res: Vec<f64> = levels
                .par_iter()
                .map(|lv| {
                    let state = hermite_state(&prm, &vac, lv);
                    let n: usize = lv.iter().map(|(i, j)| i + j).sum();
                    let e = TWO_PI * (n + g) as f64;
                    gen::rel(&hamiltonian(&prm, &state), &state.scale(C64::new(e, 0.0)))
                })
                .collect();
            let anchor = match (side, g) {
                (Side::X, 1) => "ℍ b^{i,j} = 2π(i+j+1) b^{i,j}, i,j ≤ 5",
                (Side::Y, 1) => "𝕃 a^{i,j} = 2π(i+j+1) a^{i,j}, i,j ≤ 5",
                (Side::X, _) => "ℍ (𝔸*)^I (𝔹*)^J b_μ = 2π(|I|+|J|+g) (𝔸*)^I (𝔹*)^J b_μ",
                (Side::Y, _) => "𝕃 (𝔸*)^I (𝔹*)^J a = 2π(|I|+|J|+g) (𝔸*)^I (𝔹*)^J a",
            };
            out.check(format!("osc.spectrum.{}.g{g}", side.tag()), anchor, max(res), tol.exact, None, Convergence::Exact);
        }
    }
    Ok(out)
}
