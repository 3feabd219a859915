//! Exact calculus on the family `p(z, z̄) · exp(Q(z, z̄))` on `ℂ^g`, with `p` a
//! polynomial and `Q` of degree at most two. The deformed oscillators, their
//! ladder operators and vacua live inside this family, so every identity here is
//! checked without discretisation error.
//!
//! Variables are ordered `z₁ … z_g, z̄₁ … z̄_g`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::complex_coords;
use crate::math::{C64, I, ONE, PI, TWO_PI, ZERO};
use crate::torus::TorusData;

/// Maximum number of commuting variables (so g ≤ 4).
pub const MAX_VARS: usize = 8;

pub type Mono = [u8; MAX_VARS];

/// Sparse polynomial in `nv` commuting variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub nv: usize,
    pub terms: BTreeMap<Mono, C64>,
}

impl Poly {
    pub fn zero(nv: usize) -> Self {
        assert!(nv <= MAX_VARS, "at most {MAX_VARS} variables");
        Poly { nv, terms: BTreeMap::new() }
    }

    pub fn constant(nv: usize, c: C64) -> Self {
        let mut p = Self::zero(nv);
        p.add_term([0; MAX_VARS], c);
        p
    }

    pub fn var(nv: usize, k: usize) -> Self {
        let mut m = [0; MAX_VARS];
        m[k] = 1;
        let mut p = Self::zero(nv);
        p.add_term(m, ONE);
        p
    }

    pub fn add_term(&mut self, m: Mono, c: C64) {
        let e = self.terms.entry(m).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (&m, &c) in &o.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Poly {
        let mut out = Poly::zero(self.nv);
        for (&m, &c) in &self.terms {
            out.add_term(m, c * s);
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-ONE))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nv);
        for (ma, &a) in &self.terms {
            for (mb, &b) in &o.terms {
                let mut m = [0u8; MAX_VARS];
                for k in 0..self.nv {
                    m[k] = ma[k] + mb[k];
                }
                out.add_term(m, a * b);
            }
        }
        out
    }

    pub fn mul_var(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nv);
        for (&m, &c) in &self.terms {
            let mut m2 = m;
            m2[k] += 1;
            out.add_term(m2, c);
        }
        out
    }

    pub fn diff(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nv);
        for (&m, &c) in &self.terms {
            if m[k] > 0 {
                let mut m2 = m;
                m2[k] -= 1;
                out.add_term(m2, c * m[k] as f64);
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|&e| e as u32).sum()).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(m, &c)| {
                let mut t = c;
                for k in 0..self.nv {
                    for _ in 0..m[k] {
                        t *= x[k];
                    }
                }
                t
            })
            .sum()
    }

    /// Substitute `x_k ↦ images[k]` (all images in a common variable set).
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        let nv = images.first().map(|p| p.nv).unwrap_or(self.nv);
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::constant(nv, ONE), p.clone()]).collect();
        let mut out = Poly::zero(nv);
        for (m, &c) in &self.terms {
            let mut t = Poly::constant(nv, c);
            for k in 0..self.nv {
                let e = m[k] as usize;
                while powers[k].len() <= e {
                    let next = powers[k].last().unwrap().mul(&images[k]);
                    powers[k].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[k][e]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Complex conjugate as a function: conjugate coefficients and swap `z ↔ z̄`.
    pub fn conj_fn(&self, g: usize) -> Poly {
        let mut out = Poly::zero(self.nv);
        for (m, c) in &self.terms {
            let mut m2 = [0u8; MAX_VARS];
            for j in 0..g {
                m2[j] = m[g + j];
                m2[g + j] = m[j];
            }
            out.add_term(m2, c.conj());
        }
        out
    }
}

/// `p · e^Q` on `ℂ^g`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyGauss {
    pub g: usize,
    pub q: Poly,
    pub p: Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Z(usize),
    Zbar(usize),
}

impl PolyGauss {
    pub fn new(g: usize, q: Poly, p: Poly) -> Result<Self> {
        if 2 * g > MAX_VARS || q.nv != 2 * g || p.nv != 2 * g {
            return Err(Error::Dimension(format!("PolyGauss needs 2g = {} <= {MAX_VARS} variables", 2 * g)));
        }
        if q.degree() > 2 {
            return Err(Error::Domain("exponent must have degree <= 2".into()));
        }
        Ok(PolyGauss { g, q, p })
    }

    fn var(&self, c: Coord) -> usize {
        match c {
            Coord::Z(j) => j,
            Coord::Zbar(j) => self.g + j,
        }
    }

    pub fn diff(&self, c: Coord) -> PolyGauss {
        let k = self.var(c);
        let p = self.p.diff(k).add(&self.p.mul(&self.q.diff(k)));
        PolyGauss { p, ..self.clone() }
    }

    pub fn mul(&self, c: Coord) -> PolyGauss {
        PolyGauss { p: self.p.mul_var(self.var(c)), ..self.clone() }
    }

    pub fn mul_poly(&self, m: &Poly) -> PolyGauss {
        PolyGauss { p: self.p.mul(m), ..self.clone() }
    }

    pub fn scale(&self, s: C64) -> PolyGauss {
        PolyGauss { p: self.p.scale(s), ..self.clone() }
    }

    fn same_q(&self, o: &PolyGauss) -> Result<()> {
        if self.q != o.q {
            return Err(Error::Domain("PolyGauss terms with different exponents".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &PolyGauss) -> Result<PolyGauss> {
        self.same_q(o)?;
        Ok(PolyGauss { p: self.p.add(&o.p), ..self.clone() })
    }

    pub fn sub(&self, o: &PolyGauss) -> Result<PolyGauss> {
        self.same_q(o)?;
        Ok(PolyGauss { p: self.p.sub(&o.p), ..self.clone() })
    }

    /// Evaluate at a point given by its complex coordinates.
    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut x: Vec<C64> = z.to_vec();
        x.extend(z.iter().map(|w| w.conj()));
        self.p.eval(&x) * self.q.eval(&x).exp()
    }
}

/// Parameters of one oscillator family: centre `s` (0 on the X side, `w` on the
/// Y side) and the deformation vector `β = B_j(λ)` resp. `B_j(w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderParams {
    pub shift: Vec<C64>,
    pub beta: Vec<C64>,
}

impl LadderParams {
    pub fn x_side(t: &TorusData, lambda: &[f64]) -> Self {
        LadderParams { shift: vec![ZERO; t.g], beta: t.b_j_real(lambda) }
    }

    pub fn y_side(t: &TorusData, w: &[f64]) -> Self {
        LadderParams { shift: complex_coords(w), beta: t.b_j_real(w) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ladder {
    A,
    AStar,
    B,
    BStar,
}

impl Ladder {
    pub const ALL: [Ladder; 4] = [Ladder::A, Ladder::AStar, Ladder::B, Ladder::BStar];
}

/// Linear polynomial `a·z_j + b·z̄_j + c`.
fn lin(g: usize, j: usize, a: C64, b: C64, c: C64) -> Poly {
    let mut p = Poly::constant(2 * g, c);
    p = p.add(&Poly::var(2 * g, j).scale(a));
    p.add(&Poly::var(2 * g, g + j).scale(b))
}

/// Apply a ladder operator in coordinate `j`:
/// `𝔸 = ∂/∂z̄ + 2π((z−s) + i conj(β))`, `𝔸* = −∂/∂z + 2π(conj(z−s) − iβ)`,
/// `𝔹 = ∂/∂z + 2π(conj(z−s) + iβ)`, `𝔹* = −∂/∂z̄ + 2π((z−s) − i conj(β))`.
pub fn ladder(kind: Ladder, j: usize, prm: &LadderParams, f: &PolyGauss) -> PolyGauss {
    let g = f.g;
    let (s, b) = (prm.shift[j], prm.beta[j]);
    let tp = C64::new(TWO_PI, 0.0);
    let (d, sign, m) = match kind {
        Ladder::A => (f.diff(Coord::Zbar(j)), ONE, lin(g, j, tp, ZERO, tp * (-s + I * b.conj()))),
        Ladder::AStar => (f.diff(Coord::Z(j)), -ONE, lin(g, j, ZERO, tp, tp * (-s.conj() - I * b))),
        Ladder::B => (f.diff(Coord::Z(j)), ONE, lin(g, j, ZERO, tp, tp * (-s.conj() + I * b))),
        Ladder::BStar => (f.diff(Coord::Zbar(j)), -ONE, lin(g, j, tp, ZERO, tp * (-s - I * b.conj()))),
    };
    PolyGauss { p: d.p.scale(sign).add(&f.p.mul(&m)), ..f.clone() }
}

/// `Σ_j −∂²/∂z_j∂z̄_j − 2πi(β_j ∂/∂z̄_j + conj(β_j) ∂/∂z_j) + 4π²(|z_j − s_j|² + |β_j|²)`:
/// ℍ on the X side, 𝕃 on the Y side.
pub fn hamiltonian(prm: &LadderParams, f: &PolyGauss) -> PolyGauss {
    let g = f.g;
    let mut out = PolyGauss { p: Poly::zero(2 * g), ..f.clone() };
    for j in 0..g {
        out = hamiltonian_coord(j, prm, f).add(&out).expect("same exponent");
    }
    out
}

/// Single-coordinate summand of [`hamiltonian`].
pub fn hamiltonian_coord(j: usize, prm: &LadderParams, f: &PolyGauss) -> PolyGauss {
    let g = f.g;
    let (s, b) = (prm.shift[j], prm.beta[j]);
    let fp = 4.0 * PI * PI;
    let d2 = f.diff(Coord::Zbar(j)).diff(Coord::Z(j)).p.scale(-ONE);
    let d1 = f.diff(Coord::Zbar(j)).p.scale(-I * TWO_PI * b).add(&f.diff(Coord::Z(j)).p.scale(-I * TWO_PI * b.conj()));
    // |z − s|² = z z̄ − s̄ z − s z̄ + |s|²
    let mut zz = Poly::zero(2 * g);
    let mut m = [0u8; MAX_VARS];
    m[j] = 1;
    m[g + j] = 1;
    zz.add_term(m, ONE);
    let pot = zz.add(&lin(g, j, -s.conj(), -s, C64::new(s.norm_sqr() + b.norm_sqr(), 0.0))).scale(C64::new(fp, 0.0));
    PolyGauss { p: d2.add(&d1).add(&f.p.mul(&pot)), ..f.clone() }
}

/// Deformed Gaussian `b_μ = exp(−2π Σ_j |z_j|² + i B_j(μ) z_j + i conj(B_j(μ) z_j))`.
pub fn vacuum_x(t: &TorusData, mu: &[f64]) -> PolyGauss {
    let g = t.g;
    let beta = t.b_j_real(mu);
    let mut q = Poly::zero(2 * g);
    for j in 0..g {
        let mut m = [0u8; MAX_VARS];
        m[j] = 1;
        m[g + j] = 1;
        q.add_term(m, C64::new(-TWO_PI, 0.0));
        q = q.add(&lin(g, j, -I * TWO_PI * beta[j], -I * TWO_PI * beta[j].conj(), ZERO));
    }
    PolyGauss { g, q, p: Poly::constant(2 * g, ONE) }
}

/// Vacuum `a(z, w) = σ(z, w) exp(−2π|z − w|²)` as a function of z.
pub fn vacuum_y(t: &TorusData, w: &[f64]) -> PolyGauss {
    let g = t.g;
    let beta = t.b_j_real(w);
    let wc = complex_coords(w);
    let mut q = Poly::zero(2 * g);
    for j in 0..g {
        let mut m = [0u8; MAX_VARS];
        m[j] = 1;
        m[g + j] = 1;
        q.add_term(m, C64::new(-TWO_PI, 0.0));
        // σ(z,w) = exp(−2πi Σ B_j(w) z_j + conj(B_j(w)) z̄_j);  −2π(−w̄ z − w z̄ + |w|²)
        let a = -I * TWO_PI * beta[j] + TWO_PI * wc[j].conj();
        let b = -I * TWO_PI * beta[j].conj() + TWO_PI * wc[j];
        q = q.add(&lin(g, j, a, b, C64::new(-TWO_PI * wc[j].norm_sqr(), 0.0)));
    }
    PolyGauss { g, q, p: Poly::constant(2 * g, ONE) }
}

/// `(𝔸*)^{i_j} (𝔹*)^{k_j}` applied to `vacuum` in every coordinate j.
pub fn hermite_state(prm: &LadderParams, vacuum: &PolyGauss, levels: &[(usize, usize)]) -> PolyGauss {
    let mut f = vacuum.clone();
    for (j, &(i, k)) in levels.iter().enumerate() {
        for _ in 0..i {
            f = ladder(Ladder::AStar, j, prm, &f);
        }
        for _ in 0..k {
            f = ladder(Ladder::BStar, j, prm, &f);
        }
    }
    f
}

/// `∫_{ℂ^g} f · conj(h) dv` (Lebesgue measure on ℝ^{2g}) by completing the
/// square and Isserlis' theorem with the complex covariance `A⁻¹`.
pub fn inner_product(f: &PolyGauss, h: &PolyGauss) -> Result<C64> {
    if f.g != h.g {
        return Err(Error::Dimension("inner product of different g".into()));
    }
    let g = f.g;
    let n = 2 * g;
    // (z, z̄) → (x, y) with real variables ordered x₁, y₁, x₂, y₂, …
    let images: Vec<Poly> = (0..n)
        .map(|k| {
            let j = k % g;
            let sgn = if k < g { ONE } else { -ONE };
            Poly::var(n, 2 * j).add(&Poly::var(n, 2 * j + 1).scale(I * sgn))
        })
        .collect();
    let q = f.q.add(&h.q.conj_fn(g)).substitute(&images);
    let p = f.p.mul(&h.p.conj_fn(g)).substitute(&images);
    gaussian_moment_integral(n, &q, &p)
}

/// `∫_{ℝ^n} P(x) e^{E(x)} dx` for a quadratic `E` with negative definite real part.
pub fn gaussian_moment_integral(n: usize, e: &Poly, p: &Poly) -> Result<C64> {
    let mut c0 = ZERO;
    let mut b = vec![ZERO; n];
    let mut a = DMatrix::<C64>::zeros(n, n);
    for (m, &c) in &e.terms {
        let idx: Vec<usize> = (0..n).flat_map(|k| core::iter::repeat(k).take(m[k] as usize)).collect();
        match idx.len() {
            0 => c0 += c,
            1 => b[idx[0]] += c,
            2 if idx[0] == idx[1] => a[(idx[0], idx[0])] -= c * 2.0,
            2 => {
                a[(idx[0], idx[1])] -= c;
                a[(idx[1], idx[0])] -= c;
            }
            _ => return Err(Error::Domain("exponent of degree > 2".into())),
        }
    }
    let re = a.map(|z| z.re);
    if re.clone().cholesky().is_none() {
        return Err(Error::Domain("exponent is not integrable (Re A not positive definite)".into()));
    }
    // complex-symmetric elimination: pivots have positive real part
    let mut work = a.clone();
    let mut sqrt_det = ONE;
    for k in 0..n {
        let piv = work[(k, k)];
        sqrt_det *= piv.sqrt();
        for r in (k + 1)..n {
            let f = work[(r, k)] / piv;
            for c in k..n {
                let v = work[(k, c)];
                work[(r, c)] -= f * v;
            }
        }
    }
    let cov = a.clone().try_inverse().ok_or_else(|| Error::Domain("singular exponent".into()))?;
    let bv = nalgebra::DVector::from_column_slice(&b);
    let mean = &cov * &bv;
    let shift = (bv.transpose() * &mean)[(0, 0)] * 0.5;
    let norm = (c0 + shift).exp() * libm::pow(TWO_PI, n as f64 / 2.0) / sqrt_det;
    // P(mean + y)
    let images: Vec<Poly> = (0..n).map(|k| Poly::var(n, k).add(&Poly::constant(n, mean[k]))).collect();
    let shifted = p.substitute(&images);
    let mut memo: BTreeMap<Mono, C64> = BTreeMap::new();
    let mut total = ZERO;
    for (m, &c) in &shifted.terms {
        total += c * moment(n, *m, &cov, &mut memo);
    }
    Ok(total * norm)
}

/// `E[y^α]` for a centred Gaussian with (complex) covariance `cov`.
fn moment(n: usize, alpha: Mono, cov: &DMatrix<C64>, memo: &mut BTreeMap<Mono, C64>) -> C64 {
    let deg: u32 = alpha.iter().map(|&e| e as u32).sum();
    if deg == 0 {
        return ONE;
    }
    if deg % 2 == 1 {
        return ZERO;
    }
    if let Some(&v) = memo.get(&alpha) {
        return v;
    }
    let k = (0..n).find(|&k| alpha[k] > 0).unwrap();
    let mut rest = alpha;
    rest[k] -= 1;
    let mut s = ZERO;
    for l in 0..n {
        if rest[l] > 0 {
            let mut r2 = rest;
            r2[l] -= 1;
            s += cov[(k, l)] * rest[l] as f64 * moment(n, r2, cov, memo);
        }
    }
    memo.insert(alpha, s);
    s
}

/// Residuals of the ten oscillator commutation relations, maximised over the
/// coordinates (and, for the mixed pairs, over all coordinate pairs).
/// Order: [H,A], [H,A*], [H,B], [H,B*], [A,A*], [B,B*], [A,B], [A,B*], [A*,B], [A*,B*].
pub fn commutation_residuals(prm: &LadderParams, f: &PolyGauss) -> [f64; 10] {
    let g = f.g;
    let lad = |k: Ladder, j: usize, u: &PolyGauss| ladder(k, j, prm, u);
    let comm = |x: &dyn Fn(&PolyGauss) -> PolyGauss, y: &dyn Fn(&PolyGauss) -> PolyGauss| -> PolyGauss {
        x(&y(f)).sub(&y(&x(f))).expect("same exponent")
    };
    let size = |u: &PolyGauss| u.p.max_abs();
    let scale = 1.0 + size(f);
    let mut out = [0.0f64; 10];
    let h = |u: &PolyGauss| hamiltonian(prm, u);
    for j in 0..g {
        for (slot, (k, e)) in [(Ladder::A, -TWO_PI), (Ladder::AStar, TWO_PI), (Ladder::B, -TWO_PI), (Ladder::BStar, TWO_PI)]
            .into_iter()
            .enumerate()
        {
            let c = comm(&h, &|u| lad(k, j, u));
            let r = c.sub(&lad(k, j, f).scale(C64::new(e, 0.0))).unwrap();
            out[slot] = out[slot].max(size(&r) / scale);
        }
        for (slot, (x, y)) in [(4, (Ladder::A, Ladder::AStar)), (5, (Ladder::B, Ladder::BStar))] {
            let c = comm(&|u| lad(x, j, u), &|u| lad(y, j, u));
            let r = c.sub(&f.scale(C64::new(2.0 * TWO_PI, 0.0))).unwrap();
            out[slot] = out[slot].max(size(&r) / scale);
        }
    }
    // mixed relations, plus cross-coordinate commutativity of every pair
    let mixed = [(Ladder::A, Ladder::B), (Ladder::A, Ladder::BStar), (Ladder::AStar, Ladder::B), (Ladder::AStar, Ladder::BStar)];
    for j in 0..g {
        for k in 0..g {
            for (slot, &(x, y)) in mixed.iter().enumerate() {
                let c = comm(&|u| lad(x, j, u), &|u| lad(y, k, u));
                out[6 + slot] = out[6 + slot].max(size(&c) / scale);
            }
            if j != k {
                for x in Ladder::ALL {
                    for y in Ladder::ALL {
                        let c = comm(&|u| lad(x, j, u), &|u| lad(y, k, u));
                        out[4] = out[4].max(size(&c) / scale);
                    }
                }
            }
        }
    }
    out
}
