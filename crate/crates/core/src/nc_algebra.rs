//! The twisted group algebra `A(Λ;σ)` on a finite lattice window and its
//! Dolbeault DGA `A^{0,•}(Λ;σ) = A(Λ;σ) ⊗ Λ•V_{1,0}`.
//!
//! Lattice points are integer coordinate vectors `n ∈ ℤ^{2g}` with respect to the
//! lattice basis; `[n] ∘ [m] = σ(n, m)[n + m]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exterior::Blade;
use crate::field::{Deriv, DerivScheme, Grid};
use crate::math::{e2pii, C64, I, TWO_PI, ZERO};
use crate::torus::{ComplexProjection, TorusData};

pub type LatticeIndex = Vec<i64>;

fn linf(n: &[i64]) -> i64 {
    n.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Finitely supported function on `{n : ‖n‖_∞ ≤ window}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NCTorusElement {
    pub g: usize,
    pub window: i64,
    pub coeffs: BTreeMap<LatticeIndex, C64>,
}

impl NCTorusElement {
    pub fn zero(g: usize, window: i64) -> Self {
        NCTorusElement { g, window, coeffs: BTreeMap::new() }
    }

    /// The unit `[0]`.
    pub fn unit(g: usize) -> Self {
        Self::basis(g, &vec![0; 2 * g])
    }

    /// `[n]` in the smallest window containing it.
    pub fn basis(g: usize, n: &[i64]) -> Self {
        let mut e = Self::zero(g, linf(n));
        e.coeffs.insert(n.to_vec(), C64::new(1.0, 0.0));
        e
    }

    pub fn get(&self, n: &[i64]) -> C64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn set(&mut self, n: &[i64], v: C64) -> Result<()> {
        if n.len() != 2 * self.g {
            return Err(Error::Dimension(format!("lattice index of length {} for g = {}", n.len(), self.g)));
        }
        if linf(n) > self.window {
            return Err(Error::WindowOverflow { needed: linf(n), window: self.window });
        }
        if v == ZERO {
            self.coeffs.remove(n);
        } else {
            self.coeffs.insert(n.to_vec(), v);
        }
        Ok(())
    }

    /// Support radius `max ‖n‖_∞` over nonzero coefficients.
    pub fn support_radius(&self) -> i64 {
        self.coeffs.keys().map(|n| linf(n)).max().unwrap_or(0)
    }

    /// Same coefficients in a different window (error if the support does not fit).
    pub fn with_window(&self, window: i64) -> Result<Self> {
        if self.support_radius() > window {
            return Err(Error::WindowOverflow { needed: self.support_radius(), window });
        }
        Ok(NCTorusElement { window, ..self.clone() })
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = NCTorusElement { window: self.window.max(other.window), ..self.clone() };
        for (n, &v) in &other.coeffs {
            let e = out.coeffs.entry(n.clone()).or_insert(ZERO);
            *e += v;
            if *e == ZERO {
                out.coeffs.remove(n);
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|v| *v *= s);
        out.coeffs.retain(|_, v| *v != ZERO);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_g(t: &TorusData, g: usize) -> Result<()> {
    if t.g != g {
        return Err(Error::Dimension(format!("element has g = {g}, torus has g = {}", t.g)));
    }
    Ok(())
}

/// Twisted convolution into an explicit window; errors instead of truncating.
pub fn nc_mul_in(t: &TorusData, f: &NCTorusElement, h: &NCTorusElement, window: i64) -> Result<NCTorusElement> {
    check_g(t, f.g)?;
    check_g(t, h.g)?;
    let mut out = NCTorusElement::zero(f.g, window);
    // terms are summed in value order so that untwisted products commute bit-exactly
    let mut acc: BTreeMap<LatticeIndex, Vec<C64>> = BTreeMap::new();
    for (n1, &a) in &f.coeffs {
        let v1 = t.lattice_point(n1);
        for (n2, &b) in &h.coeffs {
            let s: LatticeIndex = n1.iter().zip(n2).map(|(x, y)| x + y).collect();
            if linf(&s) > window {
                return Err(Error::WindowOverflow { needed: linf(&s), window });
            }
            let phase = t.sigma(&v1, &t.lattice_point(n2));
            acc.entry(s).or_default().push(a * b * phase);
        }
    }
    for (n, mut terms) in acc {
        terms.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let v: C64 = terms.into_iter().fold(ZERO, |s, x| s + x);
        if v != ZERO {
            out.coeffs.insert(n, v);
        }
    }
    Ok(out)
}

/// Twisted convolution with the result window `W₁ + W₂`.
pub fn nc_mul(t: &TorusData, f: &NCTorusElement, h: &NCTorusElement) -> Result<NCTorusElement> {
    nc_mul_in(t, f, h, f.window + h.window)
}

/// `f*(n) = conj(f(−n))`.
pub fn involution(f: &NCTorusElement) -> NCTorusElement {
    let mut out = NCTorusElement::zero(f.g, f.window);
    for (n, v) in &f.coeffs {
        out.coeffs.insert(n.iter().map(|x| -x).collect(), v.conj());
    }
    out
}

/// `ξ(f)(λ) = 2πi ⟨ξ, λ⟩ f(λ)` for a real covector `ξ` on V.
pub fn derivation_xi(t: &TorusData, xi: &[f64], f: &NCTorusElement) -> NCTorusElement {
    let mut out = NCTorusElement::zero(f.g, f.window);
    for (n, &v) in &f.coeffs {
        let lam = t.lattice_point(n);
        let pairing: f64 = xi.iter().zip(&lam).map(|(a, b)| a * b).sum();
        let w = I * TWO_PI * pairing * v;
        if w != ZERO {
            out.coeffs.insert(n.clone(), w);
        }
    }
    out
}

/// Element of `A(Λ;σ) ⊗ Λ•V_{1,0}`, keyed by a mask over the g generators of V_{1,0}.
#[derive(Clone, Debug, PartialEq)]
pub struct NCDolbeaultElement {
    pub g: usize,
    pub terms: BTreeMap<u32, NCTorusElement>,
}

impl NCDolbeaultElement {
    pub fn zero(g: usize) -> Self {
        NCDolbeaultElement { g, terms: BTreeMap::new() }
    }

    pub fn from_scalar(f: NCTorusElement) -> Self {
        let mut x = Self::zero(f.g);
        x.terms.insert(0, f);
        x
    }

    /// `f ⊗ e_mask`.
    pub fn term(mask: u32, f: NCTorusElement) -> Self {
        let mut x = Self::zero(f.g);
        x.terms.insert(mask, f);
        x
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, f) in &other.terms {
            let e = out.terms.remove(&m);
            let s = match e {
                Some(x) => x.add(f),
                None => f.clone(),
            };
            if !s.coeffs.is_empty() {
                out.terms.insert(m, s);
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.g);
        for (&m, f) in &self.terms {
            out.terms.insert(m, f.scale(s));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    pub fn degree_max(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }
}

fn mask_wedge(a: u32, b: u32) -> Option<(u32, f64)> {
    Blade::new(a, 0, 0).wedge(Blade::new(b, 0, 0)).map(|(bl, s)| (bl.zeta, s))
}

/// `(x ⊗ α)(y ⊗ β) = (x ∘ y) ⊗ (α ∧ β)`.
pub fn dolbeault_mul(t: &TorusData, a: &NCDolbeaultElement, b: &NCDolbeaultElement) -> Result<NCDolbeaultElement> {
    let mut out = NCDolbeaultElement::zero(a.g);
    for (&ma, fa) in &a.terms {
        for (&mb, fb) in &b.terms {
            if let Some((m, sign)) = mask_wedge(ma, mb) {
                let prod = nc_mul(t, fa, fb)?.scale(C64::new(sign, 0.0));
                out = out.add(&NCDolbeaultElement::term(m, prod));
            }
        }
    }
    Ok(out)
}

/// `∂̄[λ] = 2πi [λ] ⊗ D′(λ)`, extended as a derivation (generators are closed).
pub fn dbar_nc(t: &TorusData, x: &NCDolbeaultElement) -> NCDolbeaultElement {
    let proj = ComplexProjection::new(t.g);
    let mut out = NCDolbeaultElement::zero(x.g);
    for (&m, f) in &x.terms {
        for (n, &v) in &f.coeffs {
            let lam: Vec<C64> = t.lattice_point(n).into_iter().map(|r| C64::new(r, 0.0)).collect();
            let dl = proj.dprime_coords(&lam);
            for (j, &lj) in dl.iter().enumerate() {
                if lj == ZERO {
                    continue;
                }
                if let Some((nm, sign)) = mask_wedge(1 << j, m) {
                    let mut e = NCTorusElement::zero(x.g, f.window);
                    e.coeffs.insert(n.clone(), I * TWO_PI * lj * v * sign);
                    out = out.add(&NCDolbeaultElement::term(nm, e));
                }
            }
        }
    }
    out
}

/// Max residuals of the classical (B = 0) Fourier model on a periodic grid of
/// `n` points per axis of the dual torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalLimitReport {
    /// `(f∘h)^ − f̂ ĥ`.
    pub product: f64,
    /// `(∂̄f)^ − ∂̄f̂` with the spectral derivative on the dual torus.
    pub dbar: f64,
    /// `‖f∘h − h∘f‖`.
    pub commutator: f64,
}

/// Characters `χ_n(x) = e^{2πi x·n}` on `x ∈ [0,1)^{2g}` turn the product into
/// the pointwise product and `∂̄_nc` into `Σ_k (L_{2j,k} + i L_{2j+1,k}) ∂/∂x_k`.
pub fn classical_limit_check(t: &TorusData, f: &NCTorusElement, h: &NCTorusElement, n: usize) -> Result<ClassicalLimitReport> {
    if !t.is_untwisted() {
        return Err(Error::Precondition("classical limit requires B = 0".into()));
    }
    let dim = t.dim();
    let radius = (n as f64 - 1.0) / (2.0 * n as f64);
    let grid = Grid::new(dim, radius, 1.0 / n as f64)?;
    let sample = |e: &NCTorusElement| -> Vec<C64> {
        let mut x = vec![0.0; dim];
        (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                e.coeffs.iter().map(|(k, &v)| v * e2pii(k.iter().zip(&x).map(|(a, b)| *a as f64 * b).sum())).sum()
            })
            .collect()
    };
    let fh = nc_mul(t, f, h)?;
    let hf = nc_mul(t, h, f)?;
    let (sf, sh, sfh) = (sample(f), sample(h), sample(&fh));
    let product = sfh.iter().zip(sf.iter().zip(&sh)).map(|(a, (b, c))| (a - b * c).norm()).fold(0.0, f64::max);
    let commutator = fh.sub(&hf).max_abs();

    let deriv = Deriv::new(&grid, DerivScheme::Fourier);
    let partials: Vec<Vec<C64>> = (0..dim).map(|k| deriv.partial(&sf, k)).collect();
    let df = dbar_nc(t, &NCDolbeaultElement::from_scalar(f.clone()));
    let mut dbar: f64 = 0.0;
    for j in 0..t.g {
        let comp = df.terms.get(&(1 << j)).cloned().unwrap_or_else(|| NCTorusElement::zero(t.g, f.window));
        let sd = sample(&comp);
        for i in 0..grid.len() {
            let mut s = ZERO;
            for (k, p) in partials.iter().enumerate() {
                s += C64::new(t.lattice[(2 * j, k)], t.lattice[(2 * j + 1, k)]) * p[i];
            }
            dbar = dbar.max((s - sd[i]).norm());
        }
    }
    Ok(ClassicalLimitReport { product, dbar, commutator })
}
