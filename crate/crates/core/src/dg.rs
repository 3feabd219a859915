//! Finite curved DGAs given by structure constants, twisted complexes over
//! them, Hom differentials, twisted bimodules and the functors they induce.
//!
//! A free right module `E ⊗ A` with basis `f_i` lives on `ℂ^{m·n}`, index
//! `i·n + b` for `f_i ⊗ e_b`. A Z-connection is fixed by a matrix `M` with
//! entries in `A`:
//!
//! ```text
//! 𝔼(f_i ⊗ a) = Σ_j f_j ⊗ M_ji a + (−1)^{|f_i|} f_i ⊗ da
//! ```
//!
//! Right-linear maps are `f_i ↦ Σ_j f_j ⊗ P_ji`; they compose as matrices over
//! `A` with no signs. A bimodule stores its left action as one such matrix per
//! basis element of the left algebra.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::Blade;
use crate::math::{C64, ONE, ZERO};

/// Coordinates in the basis of an algebra.
pub type Elem = Vec<C64>;

/// Axiom residuals above this reject an instance at construction.
pub const LOAD_TOL: f64 = 1e-10;

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn max_abs_mat(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn max_abs_vec(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest violation of each curved-DGA axiom.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DgaAxioms {
    /// Structure constants, d or c outside the allowed degrees.
    pub grading: f64,
    pub unit: f64,
    pub associativity: f64,
    pub leibniz: f64,
    /// `d² − [c,·]`.
    pub curvature: f64,
    /// `dc`.
    pub bianchi: f64,
}

impl DgaAxioms {
    pub fn max(&self) -> f64 {
        [self.grading, self.unit, self.associativity, self.leibniz, self.curvature, self.bianchi].into_iter().fold(0.0, f64::max)
    }
}

/// `(𝒜•, d, c)` on a finite graded basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvedDGA {
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    /// `e_i e_j = Σ_k mul[(i·n + j)·n + k] e_k`.
    mul: Vec<C64>,
    /// Column `j` is `d(e_j)`.
    pub d: DMatrix<C64>,
    pub c: Elem,
    pub unit: Elem,
    /// Basis indices generating the algebra together with the unit.
    gens: Vec<usize>,
}

impl CurvedDGA {
    /// Build from sparse data and validate every axiom.
    pub fn new(names: Vec<String>, degrees: Vec<i32>, mul: &[(usize, usize, usize, C64)], d: &[(usize, usize, C64)], c: Elem) -> Result<Self> {
        let n = degrees.len();
        if names.len() != n || c.len() != n {
            return Err(Error::Dimension(format!("{} names, {} degrees, {} curvature coefficients", names.len(), n, c.len())));
        }
        let mut m = vec![ZERO; n * n * n];
        for &(i, j, k, v) in mul {
            if i >= n || j >= n || k >= n {
                return Err(Error::Index { index: i.max(j).max(k), g: n });
            }
            m[(i * n + j) * n + k] += v;
        }
        let mut dm = DMatrix::zeros(n, n);
        for &(r, col, v) in d {
            if r >= n || col >= n {
                return Err(Error::Index { index: r.max(col), g: n });
            }
            dm[(r, col)] += v;
        }
        Self::from_dense(names, degrees, m, dm, c)
    }

    fn from_dense(names: Vec<String>, degrees: Vec<i32>, mul: Vec<C64>, d: DMatrix<C64>, c: Elem) -> Result<Self> {
        let n = degrees.len();
        let mut a = CurvedDGA { names, degrees, mul, d, c, unit: vec![ZERO; n], gens: Vec::new() };
        a.unit = a.solve_unit()?;
        a.gens = a.find_generators();
        let ax = a.axioms();
        if ax.max() > LOAD_TOL {
            return Err(Error::Validation(format!("curved DGA axioms fail: {ax:?}")));
        }
        Ok(a)
    }

    /// Least-squares solution of `u e_j = e_j u = e_j`.
    fn solve_unit(&self) -> Result<Elem> {
        let n = self.dim();
        let mut sys = DMatrix::<C64>::zeros(2 * n * n, n);
        let mut rhs = DMatrix::<C64>::zeros(2 * n * n, 1);
        for j in 0..n {
            for k in 0..n {
                let r = j * n + k;
                for a in 0..n {
                    sys[(r, a)] = self.mul[(a * n + j) * n + k];
                    sys[(n * n + r, a)] = self.mul[(j * n + a) * n + k];
                }
                if j == k {
                    rhs[(r, 0)] = ONE;
                    rhs[(n * n + r, 0)] = ONE;
                }
            }
        }
        let normal = sys.adjoint() * &sys;
        let u = normal.lu().solve(&(sys.adjoint() * &rhs)).ok_or_else(|| Error::Validation("algebra has no unit".to_string()))?;
        let res = max_abs_mat(&(&sys * &u - &rhs));
        if res > LOAD_TOL {
            return Err(Error::Validation(format!("algebra has no unit (residual {res:e})")));
        }
        Ok(u.column(0).iter().copied().collect())
    }

    /// Greedy generating set: walk the basis by degree and keep each element
    /// not already in the subalgebra spanned by the words in earlier picks.
    fn find_generators(&self) -> Vec<usize> {
        let n = self.dim();
        let mut span: Vec<Elem> = Vec::new();
        let reduce = |span: &[Elem], v: &[C64]| -> Elem {
            let mut r = v.to_vec();
            for q in span {
                let p: C64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
            r
        };
        let push = |span: &mut Vec<Elem>, v: &[C64]| -> bool {
            let r = reduce(span, v);
            let norm = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm <= 1e-9 {
                return false;
            }
            span.push(r.iter().map(|x| x / norm).collect());
            true
        };
        push(&mut span, &self.unit);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (self.degrees[i], i));
        let mut gens = Vec::new();
        for i in order {
            if span.len() == n {
                break;
            }
            if !push(&mut span, &self.basis(i)) {
                continue;
            }
            gens.push(i);
            // close under right multiplication by the generators
            let mut k = 0;
            while k < span.len() {
                for &g in &gens {
                    let w = self.mul(&span[k].clone(), &self.basis(g));
                    push(&mut span, &w);
                }
                k += 1;
            }
        }
        gens
    }

    /// Basis indices that generate the algebra together with the unit.
    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn zero(&self) -> Elem {
        vec![ZERO; self.dim()]
    }

    pub fn basis(&self, i: usize) -> Elem {
        let mut e = self.zero();
        e[i] = ONE;
        e
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> C64 {
        let n = self.dim();
        self.mul[(i * n + j) * n + k]
    }

    pub fn mul(&self, a: &[C64], b: &[C64]) -> Elem {
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (i, &x) in a.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == ZERO {
                    continue;
                }
                let xy = x * y;
                let row = &self.mul[(i * n + j) * n..(i * n + j + 1) * n];
                for (o, &s) in out.iter_mut().zip(row) {
                    *o += xy * s;
                }
            }
        }
        out
    }

    pub fn dif(&self, a: &[C64]) -> Elem {
        (0..self.dim()).map(|r| (0..self.dim()).map(|k| self.d[(r, k)] * a[k]).sum()).collect()
    }

    /// `a b − (−1)^{|a||b|} b a`, extended bilinearly from the basis.
    pub fn gcomm(&self, a: &[C64], b: &[C64]) -> Elem {
        let n = self.dim();
        let mut out = self.zero();
        for i in 0..n {
            if a[i] == ZERO {
                continue;
            }
            for j in 0..n {
                if b[j] == ZERO {
                    continue;
                }
                let s = sign(self.degrees[i] * self.degrees[j]);
                let (ei, ej) = (self.basis(i), self.basis(j));
                let ab = self.mul(&ei, &ej);
                let ba = self.mul(&ej, &ei);
                for k in 0..n {
                    out[k] += a[i] * b[j] * (ab[k] - ba[k] * s);
                }
            }
        }
        out
    }

    /// Matrix of `x ↦ a x`.
    pub fn lmul(&self, a: &[C64]) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for b in 0..n {
            let col = self.mul(a, &self.basis(b));
            for k in 0..n {
                m[(k, b)] = col[k];
            }
        }
        m
    }

    /// Matrix of `x ↦ x b`.
    pub fn rmul(&self, b: &[C64]) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            let col = self.mul(&self.basis(a), b);
            for k in 0..n {
                m[(k, a)] = col[k];
            }
        }
        m
    }

    /// Degree of a homogeneous element (`None` for zero).
    pub fn degree_of(&self, a: &[C64]) -> Result<Option<i32>> {
        let mut deg = None;
        for (i, x) in a.iter().enumerate() {
            if x.norm() > 0.0 {
                match deg {
                    None => deg = Some(self.degrees[i]),
                    Some(d) if d != self.degrees[i] => return Err(Error::Validation("element is not homogeneous".to_string())),
                    _ => {}
                }
            }
        }
        Ok(deg)
    }

    /// Basis indices of degree `k`.
    pub fn of_degree(&self, k: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == k).collect()
    }

    pub fn axioms(&self) -> DgaAxioms {
        let n = self.dim();
        let deg = &self.degrees;
        let mut ax = DgaAxioms::default();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if deg[k] != deg[i] + deg[j] {
                        ax.grading = ax.grading.max(self.structure(i, j, k).norm());
                    }
                }
            }
            for r in 0..n {
                if deg[r] != deg[i] + 1 {
                    ax.grading = ax.grading.max(self.d[(r, i)].norm());
                }
            }
            if deg[i] != 2 {
                ax.grading = ax.grading.max(self.c[i].norm());
            }
            if deg[i] != 0 {
                ax.grading = ax.grading.max(self.unit[i].norm());
            }
        }
        let basis: Vec<Elem> = (0..n).map(|i| self.basis(i)).collect();
        let dd: Vec<Elem> = basis.iter().map(|e| self.dif(e)).collect();
        for i in 0..n {
            let l = self.mul(&self.unit, &basis[i]);
            let r = self.mul(&basis[i], &self.unit);
            ax.unit = ax.unit.max(max_abs_vec(&sub(&l, &basis[i]))).max(max_abs_vec(&sub(&r, &basis[i])));
            for j in 0..n {
                let ij = self.mul(&basis[i], &basis[j]);
                let lhs = self.dif(&ij);
                let t1 = self.mul(&dd[i], &basis[j]);
                let t2 = self.mul(&basis[i], &dd[j]);
                let rhs: Elem = t1.iter().zip(&t2).map(|(a, b)| *a + *b * sign(deg[i])).collect();
                ax.leibniz = ax.leibniz.max(max_abs_vec(&sub(&lhs, &rhs)));
                for k in 0..n {
                    let a = self.mul(&ij, &basis[k]);
                    let b = self.mul(&basis[i], &self.mul(&basis[j], &basis[k]));
                    ax.associativity = ax.associativity.max(max_abs_vec(&sub(&a, &b)));
                }
            }
            let d2 = self.dif(&dd[i]);
            let comm = sub(&self.mul(&self.c, &basis[i]), &self.mul(&basis[i], &self.c));
            ax.curvature = ax.curvature.max(max_abs_vec(&sub(&d2, &comm)));
        }
        ax.bianchi = max_abs_vec(&self.dif(&self.c));
        ax
    }

    /// Same algebra and differential with a new curvature (validated).
    pub fn with_curvature(&self, c: Elem) -> Result<Self> {
        Self::from_dense(self.names.clone(), self.degrees.clone(), self.mul.clone(), self.d.clone(), c)
    }

    /// `Λ[ε₁,…,ε_k]` with `dε_i = dgen[i]`, extended as a derivation, and no curvature.
    pub fn exterior(k: usize, dgen: &[Elem]) -> Result<Self> {
        if k > 4 {
            return Err(Error::Config(format!("exterior algebra on {k} generators is too large")));
        }
        let n = 1usize << k;
        if dgen.len() != k || dgen.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension(format!("need {k} generator differentials of length {n}")));
        }
        let names = (0..n)
            .map(|m| {
                if m == 0 {
                    return "1".to_string();
                }
                (0..k).filter(|i| m >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect::<Vec<_>>().join("^")
            })
            .collect();
        let degrees = (0..n).map(|m| (m as u32).count_ones() as i32).collect();
        let mut mul = vec![ZERO; n * n * n];
        for a in 0..n {
            for b in 0..n {
                if let Some((bl, s)) = Blade::new(a as u32, 0, 0).wedge(Blade::new(b as u32, 0, 0)) {
                    mul[(a * n + b) * n + bl.zeta as usize] = C64::new(s, 0.0);
                }
            }
        }
        // d(ε_i ∧ rest) = dε_i ∧ rest − ε_i ∧ d(rest), i the lowest generator
        let wedge = |x: &[C64], y: &[C64]| -> Elem {
            let mut out = vec![ZERO; n];
            for a in 0..n {
                for b in 0..n {
                    let s = mul[(a * n + b) * n..(a * n + b + 1) * n].iter().position(|v| *v != ZERO);
                    if let Some(kk) = s {
                        out[kk] += x[a] * y[b] * mul[(a * n + b) * n + kk];
                    }
                }
            }
            out
        };
        let mut dcols: Vec<Elem> = vec![vec![ZERO; n]; n];
        for m in 1..n {
            let i = m.trailing_zeros() as usize;
            let rest = m & !(1 << i);
            let mut eps = vec![ZERO; n];
            eps[1 << i] = ONE;
            let mut er = vec![ZERO; n];
            er[rest] = ONE;
            let a = wedge(&dgen[i], &er);
            let b = wedge(&eps, &dcols[rest]);
            dcols[m] = a.iter().zip(&b).map(|(x, y)| *x - *y).collect();
        }
        let d = DMatrix::from_fn(n, n, |r, col| dcols[col][r]);
        Self::from_dense(names, degrees, mul, d, vec![ZERO; n])
    }

    /// `Mat_r(ℂ)` in degree 0.
    pub fn matrices(r: usize) -> Result<Self> {
        let n = r * r;
        let names = (0..n).map(|k| format!("E{}{}", k / r + 1, k % r + 1)).collect();
        let mut mul = vec![ZERO; n * n * n];
        for i in 0..r {
            for j in 0..r {
                for l in 0..r {
                    mul[((i * r + j) * n + (j * r + l)) * n + (i * r + l)] = ONE;
                }
            }
        }
        Self::from_dense(names, vec![0; n], mul, DMatrix::zeros(n, n), vec![ZERO; n])
    }

    /// Graded tensor product: `(a⊗b)(a'⊗b') = (−1)^{|b||a'|} aa' ⊗ bb'`,
    /// `d(a⊗b) = da⊗b + (−1)^{|a|} a⊗db`, `c = c₁⊗1 + 1⊗c₂`.
    pub fn tensor(x: &CurvedDGA, y: &CurvedDGA) -> Result<Self> {
        let (n1, n2) = (x.dim(), y.dim());
        let n = n1 * n2;
        let idx = |a: usize, b: usize| a * n2 + b;
        let mut names = Vec::with_capacity(n);
        let mut degrees = Vec::with_capacity(n);
        for a in 0..n1 {
            for b in 0..n2 {
                names.push(format!("{}*{}", x.names[a], y.names[b]));
                degrees.push(x.degrees[a] + y.degrees[b]);
            }
        }
        let mut mul = vec![ZERO; n * n * n];
        for a in 0..n1 {
            for b in 0..n2 {
                for a2 in 0..n1 {
                    for b2 in 0..n2 {
                        let s = sign(y.degrees[b] * x.degrees[a2]);
                        for ka in 0..n1 {
                            let u = x.structure(a, a2, ka);
                            if u == ZERO {
                                continue;
                            }
                            for kb in 0..n2 {
                                let v = y.structure(b, b2, kb);
                                if v != ZERO {
                                    mul[(idx(a, b) * n + idx(a2, b2)) * n + idx(ka, kb)] += u * v * s;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut d = DMatrix::zeros(n, n);
        for a in 0..n1 {
            for b in 0..n2 {
                for r in 0..n1 {
                    d[(idx(r, b), idx(a, b))] += x.d[(r, a)];
                }
                for r in 0..n2 {
                    d[(idx(a, r), idx(a, b))] += y.d[(r, b)] * sign(x.degrees[a]);
                }
            }
        }
        let mut c = vec![ZERO; n];
        for a in 0..n1 {
            for b in 0..n2 {
                c[idx(a, b)] += x.c[a] * y.unit[b] + x.unit[a] * y.c[b];
            }
        }
        Self::from_dense(names, degrees, mul, d, c)
    }

    /// Twist by a degree-one element: `d + [ω,·]` with curvature `c + dω + ω²`.
    pub fn twist(&self, omega: &[C64]) -> Result<Self> {
        match self.degree_of(omega)? {
            None | Some(1) => {}
            Some(k) => return Err(Error::Validation(format!("twisting element has degree {k}, expected 1"))),
        }
        let n = self.dim();
        let mut d = self.d.clone();
        for j in 0..n {
            let col = self.gcomm(omega, &self.basis(j));
            for r in 0..n {
                d[(r, j)] += col[r];
            }
        }
        let dw = self.dif(omega);
        let w2 = self.mul(omega, omega);
        let c: Elem = (0..n).map(|k| self.c[k] + dw[k] + w2[k]).collect();
        Self::from_dense(self.names.clone(), self.degrees.clone(), self.mul.clone(), d, c)
    }
}

fn sub(a: &[C64], b: &[C64]) -> Elem {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// Matrix with entries in an algebra of dimension `n`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgMatrix {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    pub entries: Vec<Elem>,
}

impl AlgMatrix {
    pub fn zeros(rows: usize, cols: usize, n: usize) -> Self {
        AlgMatrix { rows, cols, n, entries: vec![vec![ZERO; n]; rows * cols] }
    }

    pub fn identity(alg: &CurvedDGA, m: usize) -> Self {
        let mut out = Self::zeros(m, m, alg.dim());
        for i in 0..m {
            out.set(i, i, alg.unit.clone());
        }
        out
    }

    /// 1×1 matrix.
    pub fn scalar(x: Elem) -> Self {
        AlgMatrix { rows: 1, cols: 1, n: x.len(), entries: vec![x] }
    }

    pub fn get(&self, r: usize, c: usize) -> &Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn add(&self, o: &Self) -> Self {
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x + *y).collect()).collect();
        AlgMatrix { entries, ..self.clone() }
    }

    pub fn scale(&self, s: C64) -> Self {
        let entries = self.entries.iter().map(|a| a.iter().map(|x| *x * s).collect()).collect();
        AlgMatrix { entries, ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| max_abs_vec(e)).fold(0.0, f64::max)
    }

    /// Product over the algebra.
    pub fn mul(&self, alg: &CurvedDGA, o: &Self) -> Self {
        let mut out = Self::zeros(self.rows, o.cols, self.n);
        for r in 0..self.rows {
            for c in 0..o.cols {
                let mut acc = alg.zero();
                for k in 0..self.cols {
                    let p = alg.mul(self.get(r, k), o.get(k, c));
                    acc.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    /// Dense matrix of the right-linear map `f_i ↦ Σ_j f_j ⊗ M_ji` on `ℂ^{m·n}`.
    pub fn big(&self, alg: &CurvedDGA) -> DMatrix<C64> {
        let n = alg.dim();
        let mut out = DMatrix::zeros(self.rows * n, self.cols * n);
        for j in 0..self.rows {
            for i in 0..self.cols {
                let e = self.get(j, i);
                if e.iter().all(|x| *x == ZERO) {
                    continue;
                }
                out.view_mut((j * n, i * n), (n, n)).copy_from(&alg.lmul(e));
            }
        }
        out
    }

    /// Inverse of [`AlgMatrix::big`] on right-linear maps: reads `M_ji` off `f_i ⊗ 1`.
    pub fn extract(alg: &CurvedDGA, big: &DMatrix<C64>, rows: usize, cols: usize) -> Self {
        let n = alg.dim();
        let mut out = Self::zeros(rows, cols, n);
        for j in 0..rows {
            for i in 0..cols {
                let blk = big.view((j * n, i * n), (n, n));
                let v: Elem = (0..n).map(|k| (0..n).map(|a| blk[(k, a)] * alg.unit[a]).sum()).collect();
                out.set(j, i, v);
            }
        }
        out
    }

    /// Largest entry whose degree is not `deg(j, i)`.
    pub fn grading_defect(&self, alg: &CurvedDGA, deg: impl Fn(usize, usize) -> i32) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.rows {
            for i in 0..self.cols {
                let want = deg(j, i);
                for (k, x) in self.get(j, i).iter().enumerate() {
                    if alg.degrees[k] != want {
                        m = m.max(x.norm());
                    }
                }
            }
        }
        m
    }
}

/// `f_i ⊗ a ↦ (−1)^{|f_i|} f_i ⊗ da`.
pub fn big_d(alg: &CurvedDGA, degrees: &[i32]) -> DMatrix<C64> {
    let n = alg.dim();
    let mut out = DMatrix::zeros(degrees.len() * n, degrees.len() * n);
    for (i, &k) in degrees.iter().enumerate() {
        out.view_mut((i * n, i * n), (n, n)).copy_from(&(&alg.d * C64::new(sign(k), 0.0)));
    }
    out
}

/// `x ↦ x·b` on `E ⊗ A`.
pub fn big_right(alg: &CurvedDGA, m: usize, b: &[C64]) -> DMatrix<C64> {
    let n = alg.dim();
    let r = alg.rmul(b);
    let mut out = DMatrix::zeros(m * n, m * n);
    for i in 0..m {
        out.view_mut((i * n, i * n), (n, n)).copy_from(&r);
    }
    out
}

fn alg_block_diag(a: &AlgMatrix, b: &AlgMatrix) -> AlgMatrix {
    let mut out = AlgMatrix::zeros(a.rows + b.rows, a.cols + b.cols, a.n);
    for r in 0..a.rows {
        for c in 0..a.cols {
            out.set(r, c, a.get(r, c).clone());
        }
    }
    for r in 0..b.rows {
        for c in 0..b.cols {
            out.set(a.rows + r, a.cols + c, b.get(r, c).clone());
        }
    }
    out
}

/// Finite twisted complex `(E•⊗𝒜, 𝔼)` with `𝔼² = −(·c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedComplex {
    pub degrees: Vec<i32>,
    pub conn: AlgMatrix,
}

impl TwistedComplex {
    pub fn new(alg: &CurvedDGA, degrees: Vec<i32>, conn: AlgMatrix) -> Result<Self> {
        let m = degrees.len();
        if conn.rows != m || conn.cols != m || conn.n != alg.dim() {
            return Err(Error::Dimension(format!("connection is {}x{} over dimension {}, module has rank {m}", conn.rows, conn.cols, conn.n)));
        }
        let e = TwistedComplex { degrees, conn };
        let gd = e.grading_defect(alg);
        if gd > LOAD_TOL {
            return Err(Error::Validation(format!("connection is not of total degree one (defect {gd:e})")));
        }
        let r = e.curvature_residual(alg);
        if r > LOAD_TOL {
            return Err(Error::Validation(format!("E∘E + (·c) = {r:e}")));
        }
        Ok(e)
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn grading_defect(&self, alg: &CurvedDGA) -> f64 {
        self.conn.grading_defect(alg, |j, i| self.degrees[i] + 1 - self.degrees[j])
    }

    /// Dense matrix of 𝔼.
    pub fn big(&self, alg: &CurvedDGA) -> DMatrix<C64> {
        self.conn.big(alg) + big_d(alg, &self.degrees)
    }

    /// The part of 𝔼 raising 𝒜-degree by `k`; `d` belongs to `k = 1`.
    pub fn component(&self, alg: &CurvedDGA, k: i32) -> DMatrix<C64> {
        let mut part = self.conn.clone();
        for e in part.entries.iter_mut() {
            for (b, x) in e.iter_mut().enumerate() {
                if alg.degrees[b] != k {
                    *x = ZERO;
                }
            }
        }
        let mut out = part.big(alg);
        if k == 1 {
            out += big_d(alg, &self.degrees);
        }
        out
    }

    /// `‖𝔼∘𝔼 + (·c)‖_max`.
    pub fn curvature_residual(&self, alg: &CurvedDGA) -> f64 {
        let e = self.big(alg);
        max_abs_mat(&(&e * &e + big_right(alg, self.rank(), &alg.c)))
    }

    /// `E[k]`: degrees raised by k, `𝔼 ↦ (−1)^k 𝔼`.
    pub fn shifted(&self, k: i32) -> Self {
        TwistedComplex { degrees: self.degrees.iter().map(|d| d + k).collect(), conn: self.conn.scale(C64::new(sign(k), 0.0)) }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut degrees = self.degrees.clone();
        degrees.extend(&o.degrees);
        TwistedComplex { degrees, conn: alg_block_diag(&self.conn, &o.conn) }
    }

    /// `G⁻¹ 𝔼 G` for an invertible degree-zero right-linear `G`.
    pub fn conjugate(&self, alg: &CurvedDGA, gmat: &AlgMatrix) -> Result<Self> {
        let (gb, gi) = invert_big(alg, gmat)?;
        let e = &gi * self.big(alg) * &gb;
        let conn = AlgMatrix::extract(alg, &(&e - big_d(alg, &self.degrees)), self.rank(), self.rank());
        TwistedComplex::new(alg, self.degrees.clone(), conn)
    }
}

fn invert_big(alg: &CurvedDGA, g: &AlgMatrix) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let gb = g.big(alg);
    let gi = gb.clone().try_inverse().ok_or_else(|| Error::Validation("gauge transformation is not invertible".to_string()))?;
    Ok((gb, gi))
}

fn check_morphism(alg: &CurvedDGA, e1: &TwistedComplex, e2: &TwistedComplex, phi: &AlgMatrix, p: i32) -> Result<()> {
    if phi.rows != e2.rank() || phi.cols != e1.rank() || phi.n != alg.dim() {
        return Err(Error::Dimension(format!("morphism is {}x{}, expected {}x{}", phi.rows, phi.cols, e2.rank(), e1.rank())));
    }
    let gd = phi.grading_defect(alg, |j, i| e1.degrees[i] + p - e2.degrees[j]);
    if gd > LOAD_TOL {
        return Err(Error::Validation(format!("morphism is not homogeneous of degree {p} (defect {gd:e})")));
    }
    Ok(())
}

/// `d(φ) = 𝔼₂∘φ − (−1)^{|φ|} φ∘𝔼₁` as a dense matrix.
pub fn hom_differential_big(alg: &CurvedDGA, e1: &TwistedComplex, e2: &TwistedComplex, phi: &DMatrix<C64>, p: i32) -> DMatrix<C64> {
    e2.big(alg) * phi - phi * e1.big(alg) * C64::new(sign(p), 0.0)
}

/// `d(φ)` of a degree-p morphism `E₁ → E₂`, as a matrix over the algebra.
pub fn hom_differential(alg: &CurvedDGA, e1: &TwistedComplex, e2: &TwistedComplex, phi: &AlgMatrix, p: i32) -> Result<AlgMatrix> {
    check_morphism(alg, e1, e2, phi, p)?;
    let dphi = hom_differential_big(alg, e1, e2, &phi.big(alg), p);
    Ok(AlgMatrix::extract(alg, &dphi, e2.rank(), e1.rank()))
}

/// Residuals of the Hom complex at one morphism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomCheck {
    /// `‖d(d(φ))‖`.
    pub d_squared: f64,
    /// Distance of `d(φ)` from a right-linear map.
    pub linearity: f64,
}

pub fn hom_check(alg: &CurvedDGA, e1: &TwistedComplex, e2: &TwistedComplex, phi: &AlgMatrix, p: i32) -> Result<HomCheck> {
    check_morphism(alg, e1, e2, phi, p)?;
    let dphi = hom_differential_big(alg, e1, e2, &phi.big(alg), p);
    let ddphi = hom_differential_big(alg, e1, e2, &dphi, p + 1);
    let lin = AlgMatrix::extract(alg, &dphi, e2.rank(), e1.rank()).big(alg);
    Ok(HomCheck { d_squared: max_abs_mat(&ddphi), linearity: max_abs_mat(&(lin - dphi)) })
}

/// Twisted `𝒜₁`–`𝒜₂` bimodule `X•⊗𝒜₂` with connection `𝕏 = L_N + D`
/// and left action `ρ(e_a)` per basis element of `𝒜₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedBimodule {
    pub degrees: Vec<i32>,
    pub conn: AlgMatrix,
    pub action: Vec<AlgMatrix>,
}

/// Largest violation of each bimodule axiom.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BimoduleAxioms {
    pub grading: f64,
    /// `𝕏² − ρ(c₁) + (·c₂)`.
    pub curvature: f64,
    /// `𝕏ρ(a) − (−1)^{|a|}ρ(a)𝕏 − ρ(da)`.
    pub leibniz: f64,
    pub homomorphism: f64,
    pub unit: f64,
}

impl BimoduleAxioms {
    pub fn max(&self) -> f64 {
        [self.grading, self.curvature, self.leibniz, self.homomorphism, self.unit].into_iter().fold(0.0, f64::max)
    }
}

impl TwistedBimodule {
    pub fn new(a1: &CurvedDGA, a2: &CurvedDGA, degrees: Vec<i32>, conn: AlgMatrix, action: Vec<AlgMatrix>) -> Result<Self> {
        Self::new_with_axioms(a1, a2, degrees, conn, action).map(|(x, _)| x)
    }

    /// As [`TwistedBimodule::new`], also returning the residuals it validated.
    pub fn new_with_axioms(a1: &CurvedDGA, a2: &CurvedDGA, degrees: Vec<i32>, conn: AlgMatrix, action: Vec<AlgMatrix>) -> Result<(Self, BimoduleAxioms)> {
        let m = degrees.len();
        if conn.rows != m || conn.cols != m || conn.n != a2.dim() || action.len() != a1.dim() {
            return Err(Error::Dimension("bimodule data does not match the algebras".to_string()));
        }
        if action.iter().any(|r| r.rows != m || r.cols != m || r.n != a2.dim()) {
            return Err(Error::Dimension("left action matrices do not match the module rank".to_string()));
        }
        let x = TwistedBimodule { degrees, conn, action };
        let ax = x.axioms(a1, a2);
        if ax.max() > LOAD_TOL {
            return Err(Error::Validation(format!("bimodule axioms fail: {ax:?}")));
        }
        Ok((x, ax))
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    /// `ρ(a)` as a matrix over `𝒜₂`.
    pub fn rho(&self, a: &[C64]) -> AlgMatrix {
        let mut out = AlgMatrix::zeros(self.rank(), self.rank(), self.conn.n);
        for (k, &x) in a.iter().enumerate() {
            if x != ZERO {
                out = out.add(&self.action[k].scale(x));
            }
        }
        out
    }

    pub fn big(&self, a2: &CurvedDGA) -> DMatrix<C64> {
        self.conn.big(a2) + big_d(a2, &self.degrees)
    }

    pub fn axioms(&self, a1: &CurvedDGA, a2: &CurvedDGA) -> BimoduleAxioms {
        let mut ax = BimoduleAxioms {
            grading: self.conn.grading_defect(a2, |j, i| self.degrees[i] + 1 - self.degrees[j]),
            ..Default::default()
        };
        for (a, r) in self.action.iter().enumerate() {
            ax.grading = ax.grading.max(r.grading_defect(a2, |j, i| self.degrees[i] + a1.degrees[a] - self.degrees[j]));
        }
        let x = self.big(a2);
        let rho: Vec<DMatrix<C64>> = self.action.iter().map(|r| r.big(a2)).collect();
        let rho_of = |v: &[C64]| -> DMatrix<C64> {
            let mut out = DMatrix::zeros(x.nrows(), x.ncols());
            for (k, &s) in v.iter().enumerate() {
                if s != ZERO {
                    out += &rho[k] * s;
                }
            }
            out
        };
        let curv = &x * &x - rho_of(&a1.c) + big_right(a2, self.rank(), &a2.c);
        ax.curvature = max_abs_mat(&curv);
        let id = DMatrix::<C64>::identity(x.nrows(), x.ncols());
        ax.unit = max_abs_mat(&(rho_of(&a1.unit) - id));
        // Both laws propagate from generators: ρ(a)ρ(g) = ρ(ag) for every basis
        // a and generator g gives multiplicativity on all words, and the graded
        // commutator with 𝕏 is a derivation, so Leibniz on generators suffices.
        for &a in a1.generators() {
            let s = C64::new(sign(a1.degrees[a]), 0.0);
            let l = &x * &rho[a] - &rho[a] * &x * s - rho_of(&a1.dif(&a1.basis(a)));
            ax.leibniz = ax.leibniz.max(max_abs_mat(&l));
        }
        for a in 0..a1.dim() {
            for &b in a1.generators() {
                let h = &rho[a] * &rho[b] - rho_of(&a1.mul(&a1.basis(a), &a1.basis(b)));
                ax.homomorphism = ax.homomorphism.max(max_abs_mat(&h));
            }
        }
        ax
    }

    /// The identity bimodule `(𝒜, d)`.
    pub fn identity(alg: &CurvedDGA) -> Self {
        let action = (0..alg.dim()).map(|a| AlgMatrix::scalar(alg.basis(a))).collect();
        TwistedBimodule { degrees: vec![0], conn: AlgMatrix::scalar(alg.zero()), action }
    }

    /// `𝒳_f = 𝒜₂` with `𝕏(a₂) = d₂a₂ + ω a₂` and `a₁·x = f(a₁) x`, after checking
    /// `f(d₁a) = d₂f(a) + [ω, f(a)]` and `f(c₁) = c₂ + d₂ω + ω²`.
    /// `f` is the `n₂ × n₁` matrix of the algebra map.
    pub fn homomorphism(a1: &CurvedDGA, a2: &CurvedDGA, f: &DMatrix<C64>, omega: &[C64]) -> Result<Self> {
        if f.nrows() != a2.dim() || f.ncols() != a1.dim() || omega.len() != a2.dim() {
            return Err(Error::Dimension("homomorphism data does not match the algebras".to_string()));
        }
        let r = homomorphism_residuals(a1, a2, f, omega);
        if r.iter().fold(0.0f64, |m, x| m.max(*x)) > LOAD_TOL {
            return Err(Error::NotHomomorphism(format!(
                "grading {:e}, multiplicative {:e}, unit {:e}, differential {:e}, curvature {:e}",
                r[0], r[1], r[2], r[3], r[4]
            )));
        }
        let fa = |a: usize| -> Elem { (0..a2.dim()).map(|k| f[(k, a)]).collect() };
        let action = (0..a1.dim()).map(|a| AlgMatrix::scalar(fa(a))).collect();
        Self::new(a1, a2, vec![0], AlgMatrix::scalar(omega.to_vec()), action)
    }

    /// `X[k]`: degrees raised by k, `𝕏 ↦ (−1)^k 𝕏`, `ρ(a) ↦ (−1)^{k|a|} ρ(a)`.
    pub fn shifted(&self, a1: &CurvedDGA, k: i32) -> Self {
        let action = self.action.iter().enumerate().map(|(a, r)| r.scale(C64::new(sign(k * a1.degrees[a]), 0.0))).collect();
        TwistedBimodule { degrees: self.degrees.iter().map(|d| d + k).collect(), conn: self.conn.scale(C64::new(sign(k), 0.0)), action }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut degrees = self.degrees.clone();
        degrees.extend(&o.degrees);
        let action = self.action.iter().zip(&o.action).map(|(a, b)| alg_block_diag(a, b)).collect();
        TwistedBimodule { degrees, conn: alg_block_diag(&self.conn, &o.conn), action }
    }

    /// Transport along an invertible degree-zero right-linear `G` over `𝒜₂`.
    pub fn conjugate(&self, a1: &CurvedDGA, a2: &CurvedDGA, gmat: &AlgMatrix) -> Result<Self> {
        let (gb, gi) = invert_big(a2, gmat)?;
        let m = self.rank();
        let x = &gi * self.big(a2) * &gb;
        let conn = AlgMatrix::extract(a2, &(&x - big_d(a2, &self.degrees)), m, m);
        let action = self.action.iter().map(|r| AlgMatrix::extract(a2, &(&gi * r.big(a2) * &gb), m, m)).collect();
        Self::new(a1, a2, self.degrees.clone(), conn, action)
    }

    /// `𝒳 ⊗_{𝒜₂} 𝒴` with `(𝕏#𝕐)(x⊗y) = 𝕏(x)·y + (−1)^{|x|} x⊗𝕐(y)`, basis `x_k⊗y_l`.
    pub fn compose(&self, y: &TwistedBimodule, a1: &CurvedDGA, a2: &CurvedDGA, a3: &CurvedDGA) -> Result<Self> {
        self.compose_with_axioms(y, a1, a2, a3).map(|(x, _)| x)
    }

    /// [`TwistedBimodule::compose`] together with the axiom residuals of the result.
    pub fn compose_with_axioms(&self, y: &TwistedBimodule, a1: &CurvedDGA, a2: &CurvedDGA, a3: &CurvedDGA) -> Result<(Self, BimoduleAxioms)> {
        if y.action.len() != a2.dim() || self.conn.n != a2.dim() {
            return Err(Error::Dimension("middle algebras do not match".to_string()));
        }
        let degrees = self.degrees.iter().flat_map(|dx| y.degrees.iter().map(move |dy| dx + dy)).collect();
        let mut conn = y.lift(&self.conn);
        for (k, &dx) in self.degrees.iter().enumerate() {
            place(&mut conn, k, k, y.rank(), &y.conn.scale(C64::new(sign(dx), 0.0)));
        }
        let action = self.action.iter().map(|r| y.lift(r)).collect();
        TwistedBimodule::new_with_axioms(a1, a3, degrees, conn, action)
    }

    /// `𝒳_*(E) = E ⊗_{𝒜₁} 𝒳` with `𝔼₂(e⊗x) = 𝔼(e)·x + (−1)^{|e|} e⊗𝕏(x)`, basis `f_i⊗x_k`.
    pub fn apply(&self, e: &TwistedComplex, a1: &CurvedDGA, a2: &CurvedDGA) -> Result<TwistedComplex> {
        if e.conn.n != a1.dim() {
            return Err(Error::Dimension("complex lives over a different algebra".to_string()));
        }
        let degrees = e.degrees.iter().flat_map(|df| self.degrees.iter().map(move |dx| df + dx)).collect();
        let mut conn = self.lift(&e.conn);
        for (i, &df) in e.degrees.iter().enumerate() {
            place(&mut conn, i, i, self.rank(), &self.conn.scale(C64::new(sign(df), 0.0)));
        }
        TwistedComplex::new(a2, degrees, conn)
    }

    /// The same functor straight from its defining formula, as a dense matrix:
    /// block `(j,i)` is `ρ(M_ji)` plus `(−1)^{|f_i|} 𝕏` on the diagonal.
    pub fn apply_big(&self, e: &TwistedComplex, a2: &CurvedDGA) -> DMatrix<C64> {
        let s = self.rank() * a2.dim();
        let m = e.rank();
        let mut out = DMatrix::zeros(m * s, m * s);
        let x = self.big(a2);
        for j in 0..m {
            for i in 0..m {
                let mut blk = self.rho(e.conn.get(j, i)).big(a2);
                if i == j {
                    blk += &x * C64::new(sign(e.degrees[i]), 0.0);
                }
                out.view_mut((j * s, i * s), (s, s)).copy_from(&blk);
            }
        }
        out
    }

    /// `P ↦ [ρ(P_rc)]`: a matrix over `𝒜₁` becomes one over `𝒜₂`.
    fn lift(&self, p: &AlgMatrix) -> AlgMatrix {
        let m = self.rank();
        let mut out = AlgMatrix::zeros(p.rows * m, p.cols * m, self.conn.n);
        for r in 0..p.rows {
            for c in 0..p.cols {
                place(&mut out, r, c, m, &self.rho(p.get(r, c)));
            }
        }
        out
    }
}

/// Add `blk` into block `(r, c)` of block size `m`.
fn place(out: &mut AlgMatrix, r: usize, c: usize, m: usize, blk: &AlgMatrix) {
    for i in 0..m {
        for j in 0..m {
            let cur = out.get(r * m + i, c * m + j);
            let v = cur.iter().zip(blk.get(i, j)).map(|(a, b)| *a + *b).collect();
            out.set(r * m + i, c * m + j, v);
        }
    }
}

/// `[grading, multiplicativity, unit, f∘d₁ − d₂∘f − [ω,f], f(c₁) − c₂ − d₂ω − ω²]`.
pub fn homomorphism_residuals(a1: &CurvedDGA, a2: &CurvedDGA, f: &DMatrix<C64>, omega: &[C64]) -> [f64; 5] {
    let fa = |v: &[C64]| -> Elem { (0..a2.dim()).map(|k| (0..a1.dim()).map(|a| f[(k, a)] * v[a]).sum()).collect() };
    let mut r = [0.0f64; 5];
    for a in 0..a1.dim() {
        for k in 0..a2.dim() {
            if a2.degrees[k] != a1.degrees[a] {
                r[0] = r[0].max(f[(k, a)].norm());
            }
        }
    }
    for (k, x) in omega.iter().enumerate() {
        if a2.degrees[k] != 1 {
            r[0] = r[0].max(x.norm());
        }
    }
    for a in 0..a1.dim() {
        let ea = a1.basis(a);
        for b in 0..a1.dim() {
            let eb = a1.basis(b);
            r[1] = r[1].max(max_abs_vec(&sub(&fa(&a1.mul(&ea, &eb)), &a2.mul(&fa(&ea), &fa(&eb)))));
        }
        let lhs = fa(&a1.dif(&ea));
        let fe = fa(&ea);
        let rhs: Elem = a2.dif(&fe).iter().zip(&a2.gcomm(omega, &fe)).map(|(x, y)| *x + *y).collect();
        r[3] = r[3].max(max_abs_vec(&sub(&lhs, &rhs)));
    }
    r[2] = max_abs_vec(&sub(&fa(&a1.unit), &a2.unit));
    let dw = a2.dif(omega);
    let w2 = a2.mul(omega, omega);
    let rhs: Elem = (0..a2.dim()).map(|k| a2.c[k] + dw[k] + w2[k]).collect();
    r[4] = max_abs_vec(&sub(&fa(&a1.c), &rhs));
    r
}

/// Residuals of the gauge-change argument on a common module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeCheck {
    /// `‖(𝕏⁰)² − c‖`.
    pub curvature: f64,
    /// `‖[𝕏⁰,Φ] + Φ∘Φ + c‖` with the graded commutator of odd maps.
    pub hypothesis: f64,
    /// `‖(𝕏⁰ + Φ)²‖`.
    pub square: f64,
}

pub fn gauge_square_zero_check(x0: &DMatrix<C64>, phi: &DMatrix<C64>, c: &DMatrix<C64>) -> Result<GaugeCheck> {
    if x0.shape() != phi.shape() || x0.shape() != c.shape() || x0.nrows() != x0.ncols() {
        return Err(Error::Dimension("gauge check needs square matrices of one size".to_string()));
    }
    let comm = x0 * phi + phi * x0;
    let s = x0 + phi;
    Ok(GaugeCheck {
        curvature: max_abs_mat(&(x0 * x0 - c)),
        hypothesis: max_abs_mat(&(comm + phi * phi + c)),
        square: max_abs_mat(&(&s * &s)),
    })
}

fn crand<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random element supported on basis elements of degree `k`.
pub fn random_elem<R: Rng + ?Sized>(alg: &CurvedDGA, k: i32, rng: &mut R) -> Elem {
    let mut v = alg.zero();
    for i in alg.of_degree(k) {
        v[i] = crand(rng);
    }
    v
}

/// `Λ[ε₁,ε₂] ⊗ Mat_r` with `dε₁ = a ε₁ε₂`, `dε₂ = b ε₁ε₂`, twisted by a
/// connection `A = ε₁⊗A₁ + ε₂⊗A₂`, so `c = dA + A²`. `conn` holds the
/// entries of `A₁` then `A₂`, row-major.
pub fn forms_with_endomorphisms(r: usize, a: C64, b: C64, conn: &[C64]) -> Result<(CurvedDGA, Elem)> {
    if conn.len() != 2 * r * r {
        return Err(Error::Dimension(format!("connection needs {} entries", 2 * r * r)));
    }
    let top = |s: C64| -> Elem {
        let mut v = vec![ZERO; 4];
        v[3] = s;
        v
    };
    let base = CurvedDGA::tensor(&CurvedDGA::exterior(2, &[top(a), top(b)])?, &CurvedDGA::matrices(r)?)?;
    let rr = r * r;
    let mut omega = base.zero();
    for k in 0..rr {
        omega[rr + k] = conn[k];
        omega[2 * rr + k] = conn[rr + k];
    }
    Ok((base.twist(&omega)?, omega))
}

/// The prototype instance: `Λ[ε₁,ε₂] ⊗ Mat₂` with a fixed connection.
pub fn prototype() -> Result<(CurvedDGA, Elem)> {
    let c = |re, im| C64::new(re, im);
    let conn = [c(0.5, 0.0), c(1.0, -0.5), c(0.0, 0.3), c(-0.5, 0.0), c(0.2, 0.1), c(0.0, 0.0), c(1.0, 0.0), c(-0.2, -0.1)];
    forms_with_endomorphisms(2, c(1.0, 0.0), c(0.0, 0.0), &conn)
}

/// Constant-coefficient truncation of the gerby torus: `Λ•V^{0,1}` (the Fourier
/// zero mode of `𝒜^{0,•}(X;B)`) with `d = 0` and curvature `2πi B^{0,2}`.
pub fn gerby_zero_mode(t: &crate::torus::TorusData) -> Result<CurvedDGA> {
    let g = t.g;
    let base = CurvedDGA::exterior(g, &vec![vec![ZERO; 1 << g]; g])?;
    let mut c = base.zero();
    for (b, v) in &t.b02().terms {
        c[b.zbar as usize] = *v * C64::new(0.0, crate::math::TWO_PI);
    }
    base.with_curvature(c)
}

/// A random instance of [`forms_with_endomorphisms`] with rank in `1..=2`.
pub fn random_dga<R: Rng + ?Sized>(rng: &mut R) -> Result<(CurvedDGA, Elem)> {
    let r = rng.gen_range(1..=2);
    let conn: Vec<C64> = (0..2 * r * r).map(|_| crand(rng)).collect();
    forms_with_endomorphisms(r, crand(rng), crand(rng), &conn)
}

/// Unipotent degree-zero gauge transformation: identity plus random entries
/// above the diagonal wherever the degrees allow one.
pub fn random_unipotent<R: Rng + ?Sized>(alg: &CurvedDGA, degrees: &[i32], rng: &mut R) -> AlgMatrix {
    let m = degrees.len();
    let mut g = AlgMatrix::identity(alg, m);
    for j in 0..m {
        for i in (j + 1)..m {
            g.set(j, i, random_elem(alg, degrees[i] - degrees[j], rng));
        }
    }
    g
}

/// Sum of shifted copies of the rank-one complex `(𝒜, 𝔼 = −A + d)`, conjugated
/// by a random unipotent gauge transformation. `omega` is the connection `A`
/// of a twist of a flat algebra.
pub fn random_complex<R: Rng + ?Sized>(alg: &CurvedDGA, omega: &[C64], rng: &mut R) -> Result<TwistedComplex> {
    let neg: Elem = omega.iter().map(|x| -*x).collect();
    let one = TwistedComplex::new(alg, vec![0], AlgMatrix::scalar(neg))?;
    let m = rng.gen_range(1..=3);
    let mut e = one.shifted(rng.gen_range(-1..=1));
    for _ in 1..m {
        e = e.direct_sum(&one.shifted(rng.gen_range(-1..=1)));
    }
    let g = random_unipotent(alg, &e.degrees, rng);
    e.conjugate(alg, &g)
}

/// Random homogeneous morphism of degree `p`.
pub fn random_morphism<R: Rng + ?Sized>(alg: &CurvedDGA, e1: &TwistedComplex, e2: &TwistedComplex, p: i32, rng: &mut R) -> AlgMatrix {
    let mut phi = AlgMatrix::zeros(e2.rank(), e1.rank(), alg.dim());
    for j in 0..e2.rank() {
        for i in 0..e1.rank() {
            phi.set(j, i, random_elem(alg, e1.degrees[i] + p - e2.degrees[j], rng));
        }
    }
    phi
}

/// Gauge bimodule `𝒜 → 𝒜'` with `f = id` and random `ω`, where `𝒜'` has
/// `d' = d − [ω,·]` and `c' = c − d'ω − ω²`; enlarged by a shifted copy and
/// conjugated by a random unipotent transformation.
pub fn random_gauge_bimodule<R: Rng + ?Sized>(alg: &CurvedDGA, rng: &mut R) -> Result<(CurvedDGA, TwistedBimodule)> {
    let omega = random_elem(alg, 1, rng);
    let neg: Elem = omega.iter().map(|x| -*x).collect();
    let target = alg.twist(&neg)?;
    let id = DMatrix::<C64>::identity(alg.dim(), alg.dim());
    let x = TwistedBimodule::homomorphism(alg, &target, &id, &omega)?;
    let x = x.direct_sum(&x.shifted(alg, rng.gen_range(-1..=1)));
    let g = random_unipotent(&target, &x.degrees, rng);
    Ok((target.clone(), x.conjugate(alg, &target, &g)?))
}
