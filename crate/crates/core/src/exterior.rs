//! Exterior algebra on three anticommuting families of g generators.
//!
//! Generators are globally ordered dζ̄₁ < … < dζ̄_g < dz̄₁ < … < dz̄_g < dτ̄₁ < … < dτ̄_g
//! and a [`Blade`] always stores its generators in that order with sign +1.
//! The third family is the second copy of V_{1,0} on the X side; the Y-side
//! models reuse it for dw̄.
//!
//! The same storage also holds values in the e^± eigenbasis of `L`
//! (see [`to_pm_basis`]): there the first slot carries e⁺ and the second e⁻.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{C64, I, ONE, ZERO};

/// Maximum supported g (one bit per generator in a `u32` mask).
pub const MAX_G: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Zeta,
    Zbar,
    Tau,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Zeta, Family::Zbar, Family::Tau];

    fn offset(self) -> u32 {
        match self {
            Family::Zeta => 0,
            Family::Zbar => 32,
            Family::Tau => 64,
        }
    }
}

/// A sorted wedge of generators, one bitmask per family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Blade {
    pub zeta: u32,
    pub zbar: u32,
    pub tau: u32,
}

impl Blade {
    pub const ONE: Blade = Blade { zeta: 0, zbar: 0, tau: 0 };

    pub fn new(zeta: u32, zbar: u32, tau: u32) -> Self {
        Blade { zeta, zbar, tau }
    }

    pub fn gen(family: Family, j: usize) -> Self {
        Self::from_packed(1u128 << (family.offset() + j as u32))
    }

    fn packed(self) -> u128 {
        self.zeta as u128 | (self.zbar as u128) << 32 | (self.tau as u128) << 64
    }

    fn from_packed(p: u128) -> Self {
        Blade { zeta: p as u32, zbar: (p >> 32) as u32, tau: (p >> 64) as u32 }
    }

    pub fn degree(self) -> u32 {
        self.zeta.count_ones() + self.zbar.count_ones() + self.tau.count_ones()
    }

    pub fn mask(self, family: Family) -> u32 {
        match family {
            Family::Zeta => self.zeta,
            Family::Zbar => self.zbar,
            Family::Tau => self.tau,
        }
    }

    pub fn with_mask(mut self, family: Family, m: u32) -> Self {
        match family {
            Family::Zeta => self.zeta = m,
            Family::Zbar => self.zbar = m,
            Family::Tau => self.tau = m,
        }
        self
    }

    /// `self ∧ other`, or `None` if they share a generator.
    pub fn wedge(self, other: Blade) -> Option<(Blade, f64)> {
        let (a, b) = (self.packed(), other.packed());
        if a & b != 0 {
            return None;
        }
        // sign = (-1)^{#pairs (p in a, q in b) with p > q}
        let mut swaps = 0u32;
        let mut rest = b;
        while rest != 0 {
            let q = rest.trailing_zeros();
            rest &= rest - 1;
            let above = if q >= 127 { 0 } else { a >> (q + 1) };
            swaps += above.count_ones();
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        Some((Self::from_packed(a | b), sign))
    }

    /// Left wedge by a single generator.
    pub fn wedge_gen(self, family: Family, j: usize) -> Option<(Blade, f64)> {
        Blade::gen(family, j).wedge(self)
    }

    /// Left contraction by the dual of a generator: the generator is moved to
    /// the front (sign) and removed.
    pub fn contract_gen(self, family: Family, j: usize) -> Option<(Blade, f64)> {
        let pos = family.offset() + j as u32;
        let a = self.packed();
        if a & (1u128 << pos) == 0 {
            return None;
        }
        let below = a & ((1u128 << pos) - 1);
        let sign = if below.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some((Self::from_packed(a & !(1u128 << pos)), sign))
    }

    /// All blades on g generators per family restricted to the given families.
    pub fn enumerate(g: usize, families: &[Family]) -> Vec<Blade> {
        let mut out = alloc::vec![Blade::ONE];
        for &f in families {
            let mut next = Vec::new();
            for b in &out {
                for m in 0..(1u32 << g) {
                    next.push(b.with_mask(f, m));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

/// Finite linear combination of blades.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedValue {
    pub g: usize,
    pub terms: BTreeMap<Blade, C64>,
}

impl GradedValue {
    pub fn zero(g: usize) -> Self {
        GradedValue { g, terms: BTreeMap::new() }
    }

    pub fn scalar(g: usize, s: C64) -> Self {
        Self::blade(g, Blade::ONE, s)
    }

    pub fn blade(g: usize, b: Blade, s: C64) -> Self {
        let mut v = Self::zero(g);
        v.add_term(b, s);
        v
    }

    pub fn gen(g: usize, family: Family, j: usize) -> Result<Self> {
        check_index(g, j)?;
        Ok(Self::blade(g, Blade::gen(family, j), ONE))
    }

    pub fn add_term(&mut self, b: Blade, s: C64) {
        let e = self.terms.entry(b).or_insert(ZERO);
        *e += s;
        if *e == ZERO {
            self.terms.remove(&b);
        }
    }

    pub fn coeff(&self, b: Blade) -> C64 {
        self.terms.get(&b).copied().unwrap_or(ZERO)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_g(self.g, other.g)?;
        let mut out = self.clone();
        for (&b, &s) in &other.terms {
            out.add_term(b, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.g);
        for (&b, &x) in &self.terms {
            out.add_term(b, x * s);
        }
        out
    }

    /// Sup norm of the coefficients.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Component of homogeneous degree `d`.
    pub fn degree_part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.g);
        for (&b, &s) in &self.terms {
            if b.degree() == d {
                out.add_term(b, s);
            }
        }
        out
    }
}

fn same_g(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("g = {a} vs g = {b}")));
    }
    Ok(())
}

fn check_index(g: usize, j: usize) -> Result<()> {
    if j >= g || g > MAX_G {
        return Err(Error::Index { index: j, g });
    }
    Ok(())
}

pub fn wedge(a: &GradedValue, b: &GradedValue) -> Result<GradedValue> {
    same_g(a.g, b.g)?;
    let mut out = GradedValue::zero(a.g);
    for (&ba, &sa) in &a.terms {
        for (&bb, &sb) in &b.terms {
            if let Some((blade, sign)) = ba.wedge(bb) {
                out.add_term(blade, sa * sb * sign);
            }
        }
    }
    Ok(out)
}

/// Contraction ι with the dual vector of generator `(family, j)`.
pub fn contract(family: Family, j: usize, a: &GradedValue) -> Result<GradedValue> {
    check_index(a.g, j)?;
    let mut out = GradedValue::zero(a.g);
    for (&b, &s) in &a.terms {
        if let Some((nb, sign)) = b.contract_gen(family, j) {
            out.add_term(nb, s * sign);
        }
    }
    Ok(out)
}

fn wedge_gen_value(family: Family, j: usize, a: &GradedValue) -> GradedValue {
    let mut out = GradedValue::zero(a.g);
    for (&b, &s) in &a.terms {
        if let Some((nb, sign)) = b.wedge_gen(family, j) {
            out.add_term(nb, s * sign);
        }
    }
    out
}

/// `L = Σ_j dz̄_j ∘ ι_{ζ̄_j} + ι_{z̄_j} ∘ dζ̄_j` (the τ factor is a spectator).
pub fn l_apply(a: &GradedValue) -> GradedValue {
    let mut out = GradedValue::zero(a.g);
    for j in 0..a.g {
        let t1 = wedge_gen_value(Family::Zbar, j, &contract(Family::Zeta, j, a).expect("index"));
        let t2 = contract(Family::Zbar, j, &wedge_gen_value(Family::Zeta, j, a)).expect("index");
        for (b, s) in t1.terms.into_iter().chain(t2.terms) {
            out.add_term(b, s);
        }
    }
    out
}

/// Replace every (ζ, z̄) generator by a 1-form image and expand.
fn substitute(a: &GradedValue, zeta_img: &[GradedValue], zbar_img: &[GradedValue]) -> GradedValue {
    let g = a.g;
    let mut out = GradedValue::zero(g);
    for (&b, &s) in &a.terms {
        let mut acc = GradedValue::scalar(g, s);
        for j in 0..g {
            if b.zeta >> j & 1 == 1 {
                acc = wedge(&acc, &zeta_img[j]).expect("same g");
            }
        }
        for j in 0..g {
            if b.zbar >> j & 1 == 1 {
                acc = wedge(&acc, &zbar_img[j]).expect("same g");
            }
        }
        let tau = GradedValue::blade(g, Blade::new(0, 0, b.tau), ONE);
        acc = wedge(&acc, &tau).expect("same g");
        for (nb, ns) in acc.terms {
            out.add_term(nb, ns);
        }
    }
    out
}

/// Rewrite a value from {dζ̄, dz̄} blades into {e⁺, e⁻} blades, where
/// e_j^± = dz̄_j ± i dζ̄_j. Slot `zeta` holds e⁺, slot `zbar` holds e⁻.
pub fn to_pm_basis(a: &GradedValue) -> GradedValue {
    let g = a.g;
    // dζ̄ = (e⁺ − e⁻)/(2i),  dz̄ = (e⁺ + e⁻)/2
    let half = C64::new(0.5, 0.0);
    let inv2i = C64::new(0.0, -0.5);
    let zeta: Vec<_> = (0..g)
        .map(|j| {
            let mut v = GradedValue::blade(g, Blade::gen(Family::Zeta, j), inv2i);
            v.add_term(Blade::gen(Family::Zbar, j), -inv2i);
            v
        })
        .collect();
    let zbar: Vec<_> = (0..g)
        .map(|j| {
            let mut v = GradedValue::blade(g, Blade::gen(Family::Zeta, j), half);
            v.add_term(Blade::gen(Family::Zbar, j), half);
            v
        })
        .collect();
    substitute(a, &zeta, &zbar)
}

/// Inverse of [`to_pm_basis`].
pub fn from_pm_basis(a: &GradedValue) -> GradedValue {
    let g = a.g;
    let plus: Vec<_> = (0..g)
        .map(|j| {
            let mut v = GradedValue::blade(g, Blade::gen(Family::Zbar, j), ONE);
            v.add_term(Blade::gen(Family::Zeta, j), I);
            v
        })
        .collect();
    let minus: Vec<_> = (0..g)
        .map(|j| {
            let mut v = GradedValue::blade(g, Blade::gen(Family::Zbar, j), ONE);
            v.add_term(Blade::gen(Family::Zeta, j), -I);
            v
        })
        .collect();
    substitute(a, &plus, &minus)
}

/// `e_I⁺ ∧ e_J⁻ ∧ dτ̄_T` expressed in standard blades.
pub fn pm_blade(g: usize, plus: u32, minus: u32, tau: u32) -> GradedValue {
    from_pm_basis(&GradedValue::blade(g, Blade::new(plus, minus, tau), ONE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_value(rng: &mut ChaCha8Rng, g: usize, terms: usize) -> GradedValue {
        let mut v = GradedValue::zero(g);
        let m = (1u32 << g) - 1;
        for _ in 0..terms {
            let b = Blade::new(rng.gen::<u32>() & m, rng.gen::<u32>() & m, rng.gen::<u32>() & m);
            v.add_term(b, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        v
    }

    /// Expand blades into explicit generator words and sort by bubble sort,
    /// counting transpositions.
    fn word_product(words: &[Vec<u32>]) -> Option<(Vec<u32>, f64)> {
        let mut w: Vec<u32> = words.concat();
        let mut sign = 1.0;
        for i in 0..w.len() {
            for j in 0..w.len() - 1 - i {
                if w[j] == w[j + 1] {
                    return None;
                }
                if w[j] > w[j + 1] {
                    w.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if w.windows(2).any(|p| p[0] == p[1]) {
            return None;
        }
        Some((w, sign))
    }

    fn word(b: Blade) -> Vec<u32> {
        (0..96).filter(|&p| b.packed() >> p & 1 == 1).collect()
    }

    #[test]
    fn anticommutation_basics() {
        let g = 2;
        let dz1 = GradedValue::gen(g, Family::Zbar, 0).unwrap();
        let dzeta1 = GradedValue::gen(g, Family::Zeta, 0).unwrap();
        assert!(wedge(&dz1, &dz1).unwrap().terms.is_empty());
        let a = wedge(&dz1, &dzeta1).unwrap();
        let b = wedge(&dzeta1, &dz1).unwrap();
        assert_eq!(a, b.scale(-ONE));
    }

    #[test]
    fn wedge_matches_word_sorting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let m = 0b111;
            let a = Blade::new(rng.gen::<u32>() & m, rng.gen::<u32>() & m, rng.gen::<u32>() & m);
            let b = Blade::new(rng.gen::<u32>() & m, rng.gen::<u32>() & m, rng.gen::<u32>() & m);
            let fast = a.wedge(b).map(|(bl, s)| (word(bl), s));
            assert_eq!(fast, word_product(&[word(a), word(b)]));
        }
    }

    #[test]
    fn associativity_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_value(&mut rng, 2, 4);
            let b = random_value(&mut rng, 2, 4);
            let c = random_value(&mut rng, 2, 4);
            let l = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
            let r = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
            assert!(l.sub(&r).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn triple_blade_sign() {
        let g = 2;
        let x = wedge(
            &wedge(&GradedValue::gen(g, Family::Zbar, 0).unwrap(), &GradedValue::gen(g, Family::Zeta, 1).unwrap()).unwrap(),
            &GradedValue::gen(g, Family::Tau, 0).unwrap(),
        )
        .unwrap();
        // dz̄₁ dζ̄₂ dτ̄₁ = −dζ̄₂ dz̄₁ dτ̄₁
        assert_eq!(x.coeff(Blade::new(0b10, 0b01, 0b01)), -ONE);
    }

    #[test]
    fn contraction_rules() {
        let g = 1;
        let dzeta = GradedValue::gen(g, Family::Zeta, 0).unwrap();
        let dz = GradedValue::gen(g, Family::Zbar, 0).unwrap();
        assert_eq!(contract(Family::Zeta, 0, &dzeta).unwrap(), GradedValue::scalar(g, ONE));
        assert!(contract(Family::Zeta, 0, &dz).unwrap().terms.is_empty());
        assert!(contract(Family::Zeta, 3, &dz).is_err());
    }

    #[test]
    fn contraction_is_antiderivation_and_squares_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = 2;
            let mut a = random_value(&mut rng, g, 1);
            let d = a.terms.keys().next().map(|b| b.degree()).unwrap_or(0);
            a = a.degree_part(d);
            let b = random_value(&mut rng, g, 3);
            let fam = Family::ALL[rng.gen_range(0..3)];
            let j = rng.gen_range(0..g);
            let lhs = contract(fam, j, &wedge(&a, &b).unwrap()).unwrap();
            let sgn = if d % 2 == 0 { ONE } else { -ONE };
            let rhs = wedge(&contract(fam, j, &a).unwrap(), &b)
                .unwrap()
                .add(&wedge(&a, &contract(fam, j, &b).unwrap()).unwrap().scale(sgn))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-14);
            let twice = contract(fam, j, &contract(fam, j, &b).unwrap()).unwrap();
            assert!(twice.terms.is_empty());
        }
    }

    #[test]
    fn l_eigenvalues_on_pm_blades_exhaustive() {
        for g in 1..=3 {
            let full = (1u32 << g) - 1;
            for plus in 0..=full {
                for minus in 0..=full {
                    let v = pm_blade(g, plus, minus, 0);
                    let k = plus.count_ones() as f64;
                    let l = minus.count_ones() as f64;
                    let expect = v.scale(I * (k - l));
                    assert!(l_apply(&v).sub(&expect).unwrap().max_abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pm_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = random_value(&mut rng, 2, 6);
            let back = from_pm_basis(&to_pm_basis(&a));
            assert!(back.sub(&a).unwrap().max_abs() < 1e-14);
        }
        let e1p = pm_blade(1, 1, 0, 0);
        assert_eq!(e1p.coeff(Blade::gen(Family::Zbar, 0)), ONE);
        assert_eq!(e1p.coeff(Blade::gen(Family::Zeta, 0)), I);
        assert_eq!(l_apply(&GradedValue::scalar(1, ONE)).terms.len(), 0);
    }

    #[test]
    fn pm_basis_diagonalises_l() {
        for g in 1..=2 {
            for b in Blade::enumerate(g, &[Family::Zeta, Family::Zbar]) {
                let v = GradedValue::blade(g, b, ONE);
                let lpm = to_pm_basis(&l_apply(&from_pm_basis(&v)));
                let k = b.zeta.count_ones() as f64 - b.zbar.count_ones() as f64;
                assert!(lpm.sub(&v.scale(I * k)).unwrap().max_abs() < 1e-14);
            }
        }
    }
}
