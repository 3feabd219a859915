//! Random inputs shared by the suites.

use ncmukai_core::nc_algebra::{NCDolbeaultElement, NCTorusElement};
use ncmukai_core::polygauss::{Poly, PolyGauss, MAX_VARS};
use ncmukai_core::torus::TorusData;
use ncmukai_core::C64;
use rand::Rng;

pub fn crand<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random antisymmetric B with entries of size `scale` on the standard lattice.
pub fn torus<R: Rng>(rng: &mut R, g: usize, scale: f64) -> TorusData {
    let n = 2 * g;
    let mut m = vec![vec![0.0; n]; n];
    for r in 0..n {
        for c in (r + 1)..n {
            m[r][c] = rng.gen_range(-scale..scale);
            m[c][r] = -m[r][c];
        }
    }
    TorusData::standard(g, &m).expect("antisymmetric by construction")
}

pub fn lattice_vector<R: Rng>(rng: &mut R, g: usize, w: i64) -> Vec<i64> {
    (0..2 * g).map(|_| rng.gen_range(-w..=w)).collect()
}

pub fn real_vector<R: Rng>(rng: &mut R, g: usize, s: f64) -> Vec<f64> {
    (0..2 * g).map(|_| rng.gen_range(-s..s)).collect()
}

/// Polynomial times Gaussian with random quadratic exponent and a cubic
/// polynomial prefactor.
pub fn polygauss<R: Rng>(rng: &mut R, g: usize) -> PolyGauss {
    let n = 2 * g;
    let mut q = Poly::zero(n);
    let mut p = Poly::zero(n);
    for _ in 0..4 {
        let mut m = [0u8; MAX_VARS];
        m[rng.gen_range(0..n)] += 1;
        if rng.gen_bool(0.5) {
            m[rng.gen_range(0..n)] += 1;
        }
        q.add_term(m, crand(rng));
    }
    for _ in 0..5 {
        let mut m = [0u8; MAX_VARS];
        for _ in 0..rng.gen_range(0..4) {
            m[rng.gen_range(0..n)] += 1;
        }
        p.add_term(m, crand(rng));
    }
    PolyGauss::new(g, q, p).expect("valid sizes")
}

/// `|a − b|` over the prefactor coefficients, relative to the larger input.
pub fn rel(a: &PolyGauss, b: &PolyGauss) -> f64 {
    let diff = a.sub(b).map(|d| d.p.max_abs()).unwrap_or(f64::INFINITY);
    diff / a.p.max_abs().max(b.p.max_abs()).max(1e-300)
}

pub fn nc_element<R: Rng>(rng: &mut R, g: usize, w: i64, terms: usize) -> NCTorusElement {
    let mut e = NCTorusElement::zero(g, w);
    for _ in 0..terms {
        let n = lattice_vector(rng, g, w);
        e.set(&n, crand(rng)).expect("inside window");
    }
    e
}

/// Homogeneous element of `𝒜^{0,k}` for a random degree `k`.
pub fn dolbeault<R: Rng>(rng: &mut R, g: usize) -> NCDolbeaultElement {
    let deg = rng.gen_range(0..=g as u32);
    let masks: Vec<u32> = (0..1u32 << g).filter(|m| m.count_ones() == deg).collect();
    let mut x = NCDolbeaultElement::zero(g);
    for _ in 0..3 {
        let m = masks[rng.gen_range(0..masks.len())];
        x = x.add(&NCDolbeaultElement::term(m, nc_element(rng, g, 1, 3)));
    }
    x
}
