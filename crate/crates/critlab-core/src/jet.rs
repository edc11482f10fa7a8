//! Multivariate truncated Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_alpha = d^alpha f / alpha!` of a
//! smooth function at a point, truncated at a fixed total order. Arithmetic on
//! jets satisfies the product and chain rules exactly, so every derivative we
//! extract is exact up to floating-point roundoff — there is no finite-difference
//! truncation error anywhere in the curvature stack.
//!
//! Order is capped at [`MAX_ORDER`] = 4: the Bach tensor needs two derivatives of
//! the Weyl tensor, i.e. four of the metric, and nothing in the catalog needs more.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_ORDER: usize = 4;
pub const MAX_DIM: usize = 6;

/// Shared layout data for jets of a given (dim, order): exponent enumeration and
/// the truncated-product index table.
pub struct JetSpace {
    pub dim: usize,
    pub order: usize,
    /// Exponent multi-indices, graded then lexicographic.
    pub exps: Vec<[u8; MAX_DIM]>,
    index: HashMap<[u8; MAX_DIM], usize>,
    /// (out, a, b) triples with exps[a] + exps[b] = exps[out].
    mul_table: Vec<(u32, u32, u32)>,
    /// factorial(alpha) per coefficient, for derivative extraction.
    fact: Vec<f64>,
    /// per-direction partial-derivative shifts: (src, tgt, multiplicity).
    pd_table: Vec<Vec<(u32, u32, f64)>>,
}

fn gen_exps(dim: usize, order: usize) -> Vec<[u8; MAX_DIM]> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = [0u8; MAX_DIM];
        gen_rec(dim, total, 0, &mut cur, &mut out);
    }
    out
}

fn gen_rec(dim: usize, left: usize, pos: usize, cur: &mut [u8; MAX_DIM], out: &mut Vec<[u8; MAX_DIM]>) {
    if pos == dim {
        if left == 0 {
            out.push(*cur);
        }
        return;
    }
    if pos == dim - 1 {
        cur[pos] = left as u8;
        out.push(*cur);
        cur[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        gen_rec(dim, left - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

impl JetSpace {
    fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "jet dim out of range");
        assert!(order <= MAX_ORDER, "jet order capped at {MAX_ORDER}");
        let exps = gen_exps(dim, order);
        let mut index = HashMap::with_capacity(exps.len());
        for (i, e) in exps.iter().enumerate() {
            index.insert(*e, i);
        }
        let mut mul_table = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            let da: usize = ea.iter().map(|&x| x as usize).sum();
            for (b, eb) in exps.iter().enumerate() {
                let db: usize = eb.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let mut es = [0u8; MAX_DIM];
                for k in 0..dim {
                    es[k] = ea[k] + eb[k];
                }
                let out = index[&es];
                mul_table.push((out as u32, a as u32, b as u32));
            }
        }
        mul_table.sort_unstable();
        let fact = exps
            .iter()
            .map(|e| e.iter().map(|&x| (1..=x as u64).product::<u64>() as f64).product())
            .collect();
        let mut pd_table = vec![Vec::new(); dim];
        for (k, e) in exps.iter().enumerate() {
            for (i, tbl) in pd_table.iter_mut().enumerate() {
                if e[i] > 0 {
                    let mut src = *e;
                    src[i] -= 1;
                    tbl.push((k as u32, index[&src] as u32, e[i] as f64));
                }
            }
        }
        JetSpace { dim, order, exps, index, mul_table, fact, pd_table }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn get(dim: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(JetSpace::new(dim, order)))
            .clone()
    }

    fn idx(&self, e: &[u8; MAX_DIM]) -> usize {
        self.index[e]
    }
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    pub space: Arc<JetSpace>,
    pub c: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(val={}, dim={}, ord={})", self.c[0], self.space.dim, self.space.order)
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    /// Project to a (usually lower-order) space of the same dimension. The
    /// exponent enumeration is graded, so truncation is a prefix copy.
    pub fn truncate(&self, order: usize) -> Jet {
        let sp = JetSpace::get(self.space.dim, order);
        let n = sp.len();
        let mut c = vec![0.0; n];
        let m = n.min(self.c.len());
        c[..m].copy_from_slice(&self.c[..m]);
        Jet { space: sp, c }
    }

    /// The i-th coordinate as a jet centered at x0.
    pub fn var(space: &Arc<JetSpace>, i: usize, x0: f64) -> Jet {
        assert!(i < space.dim);
        let mut c = vec![0.0; space.len()];
        c[0] = x0;
        if space.order >= 1 {
            let mut e = [0u8; MAX_DIM];
            e[i] = 1;
            c[space.idx(&e)] = 1.0;
        }
        Jet { space: space.clone(), c }
    }

    pub fn vars(space: &Arc<JetSpace>, x: &[f64]) -> Vec<Jet> {
        (0..space.dim).map(|i| Jet::var(space, i, x[i])).collect()
    }

    pub fn val(&self) -> f64 {
        self.c[0]
    }

    /// Exact partial derivative d^alpha f at the base point.
    pub fn deriv(&self, alpha: &[usize]) -> f64 {
        let mut e = [0u8; MAX_DIM];
        for (k, &a) in alpha.iter().enumerate() {
            e[k] = a as u8;
        }
        let i = self.space.idx(&e);
        self.c[i] * self.space.fact[i]
    }

    /// First partial in direction i.
    pub fn d1(&self, i: usize) -> f64 {
        let mut a = [0usize; MAX_DIM];
        a[i] = 1;
        self.deriv(&a[..self.space.dim])
    }

    /// Second partial d_i d_j.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let mut a = [0usize; MAX_DIM];
        a[i] += 1;
        a[j] += 1;
        self.deriv(&a[..self.space.dim])
    }

    /// Partial-derivative jet: same space, top-order coefficients zeroed (one
    /// order of information is consumed; callers must budget total derivatives).
    pub fn pd(&self, i: usize) -> Jet {
        let sp = &self.space;
        let mut c = vec![0.0; sp.len()];
        // Taylor coeff of df/dx_i at beta is (beta_i + 1) * c_{beta + e_i}
        for &(src, tgt, mult) in &sp.pd_table[i] {
            c[tgt as usize] = self.c[src as usize] * mult;
        }
        Jet { space: sp.clone(), c }
    }

    fn mul_jet(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.space.len(), rhs.space.len());
        let mut c = vec![0.0; self.space.len()];
        // indices come from the precomputed table and are in range by construction
        unsafe {
            for &(out, a, b) in &self.space.mul_table {
                *c.get_unchecked_mut(out as usize) +=
                    self.c.get_unchecked(a as usize) * rhs.c.get_unchecked(b as usize);
            }
        }
        Jet { space: self.space.clone(), c }
    }

    /// Compose with a univariate function given by the Taylor coefficients of f
    /// at self.val(): tay[k] = f^(k)(u0)/k!.
    pub fn compose(&self, tay: &[f64]) -> Jet {
        let mut tilde = self.clone();
        tilde.c[0] = 0.0;
        let ord = self.space.order;
        let mut res = Jet::constant(&self.space, tay[ord]);
        for k in (0..ord).rev() {
            res = res.mul_jet(&tilde);
            res.c[0] += tay[k];
        }
        res
    }

    pub fn exp(&self) -> Jet {
        let e = self.val().exp();
        let mut tay = vec![0.0; self.space.order + 1];
        let mut f = 1.0;
        for (k, tk) in tay.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            *tk = e / f;
        }
        self.compose(&tay)
    }

    pub fn ln(&self) -> Jet {
        let u = self.val();
        assert!(u > 0.0, "ln of non-positive jet value");
        let mut tay = vec![0.0; self.space.order + 1];
        tay[0] = u.ln();
        // d^k ln u = (-1)^(k-1) (k-1)! u^-k ; /k! -> (-1)^(k-1)/(k u^k)
        for (k, tk) in tay.iter_mut().enumerate().skip(1) {
            *tk = if k % 2 == 1 { 1.0 } else { -1.0 } / (k as f64 * u.powi(k as i32));
        }
        self.compose(&tay)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.val().sin_cos();
        let cyc = [s, c, -s, -c];
        let mut tay = vec![0.0; self.space.order + 1];
        let mut f = 1.0;
        for (k, tk) in tay.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            *tk = cyc[k % 4] / f;
        }
        self.compose(&tay)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.val().sin_cos();
        let cyc = [c, -s, -c, s];
        let mut tay = vec![0.0; self.space.order + 1];
        let mut f = 1.0;
        for (k, tk) in tay.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            *tk = cyc[k % 4] / f;
        }
        self.compose(&tay)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        self.powf(-1.0)
    }

    /// u^r for real r (u > 0 required unless r is a small non-negative integer).
    pub fn powf(&self, r: f64) -> Jet {
        let u = self.val();
        if r == r.trunc() && (0.0..=4.0).contains(&r) {
            // exact small integer powers work at u = 0 too
            let n = r as usize;
            let mut res = Jet::constant(&self.space, 1.0);
            for _ in 0..n {
                res = res.mul_jet(self);
            }
            return res;
        }
        assert!(u > 0.0, "powf of non-positive jet value (r = {r})");
        // tay[k] = r(r-1)...(r-k+1) u^(r-k) / k!
        let mut tay = vec![0.0; self.space.order + 1];
        let mut coef = u.powf(r);
        let mut rk = r;
        let mut f = 1.0;
        for (k, tk) in tay.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
                coef = coef / u * rk;
                rk -= 1.0;
            }
            *tk = coef / f;
        }
        self.compose(&tay)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n >= 0 {
            let mut res = Jet::constant(&self.space, 1.0);
            for _ in 0..n {
                res = res.mul_jet(self);
            }
            res
        } else {
            self.recip().powi(-n)
        }
    }

    pub fn atan(&self) -> Jet {
        // tay from derivatives of atan at u0
        let u = self.val();
        let ord = self.space.order;
        // derivatives of atan: d1 = 1/(1+u^2); compute symbolically via small recurrence on
        // p_k(u)/(1+u^2)^k with numeric evaluation
        let mut tay = vec![0.0; ord + 1];
        tay[0] = u.atan();
        let q = 1.0 + u * u;
        if ord >= 1 {
            tay[1] = 1.0 / q;
        }
        if ord >= 2 {
            tay[2] = -u / (q * q); // (1/2) d2 = (1/2)(-2u/q^2)
        }
        if ord >= 3 {
            tay[3] = (3.0 * u * u - 1.0) / (3.0 * q * q * q); // d3/6 = (6u^2-2)/q^3 /6
        }
        if ord >= 4 {
            tay[4] = (u - u * u * u) / (q * q * q * q); // d4/24 = (24u-24u^3)/q^4 /24
        }
        self.compose(&tay)
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet { space: self.space.clone(), c }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet { space: self.space.clone(), c }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let c = self.c.iter().map(|x| -x).collect();
        Jet { space: self.space.clone(), c }
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        let c = self.c.iter().map(|x| x * s).collect();
        Jet { space: self.space.clone(), c }
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { space: self.space.clone(), c }
    }
}

impl Add<&Jet> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: &Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Add<Jet> for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self + &rhs
    }
}

impl Add<Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<&Jet> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: &Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Sub<Jet> for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self - &rhs
    }
}

impl Sub<Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self - &rhs
    }
}

impl Mul<&Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        (&self).mul_jet(rhs)
    }
}

impl Mul<Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        (&self).mul_jet(&rhs)
    }
}

impl Mul<Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: f64) -> Jet {
        for a in self.c.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Div<&Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        (&self).mul_jet(&rhs.recip())
    }
}

impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        (&self).mul_jet(&rhs.recip())
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
    }
}

/// Accumulate `dst += a*b` without allocating.
pub fn mul_acc(dst: &mut Jet, a: &Jet, b: &Jet) {
    debug_assert_eq!(dst.space.len(), a.space.len());
    debug_assert_eq!(dst.space.len(), b.space.len());
    unsafe {
        for &(out, i, j) in &dst.space.mul_table {
            *dst.c.get_unchecked_mut(out as usize) +=
                a.c.get_unchecked(i as usize) * b.c.get_unchecked(j as usize);
        }
    }
}

/// Accumulate `dst += s*a*b`.
pub fn mul_acc_scaled(dst: &mut Jet, s: f64, a: &Jet, b: &Jet) {
    debug_assert_eq!(dst.space.len(), a.space.len());
    debug_assert_eq!(dst.space.len(), b.space.len());
    unsafe {
        for &(out, i, j) in &dst.space.mul_table {
            *dst.c.get_unchecked_mut(out as usize) +=
                s * a.c.get_unchecked(i as usize) * b.c.get_unchecked(j as usize);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(dim: usize, order: usize) -> Arc<JetSpace> {
        JetSpace::get(dim, order)
    }

    #[test]
    fn polynomial_derivatives_exact() {
        let s = sp(2, 4);
        let x = Jet::var(&s, 0, 2.0);
        let y = Jet::var(&s, 1, -1.0);
        // f = x^3 y^2 + 5 x y
        let f = &(&x.powi(3) * &y.powi(2)) + &(&(&x * &y) * 5.0);
        assert_eq!(f.val(), 8.0 * 1.0 + 5.0 * -2.0);
        // df/dx = 3x^2 y^2 + 5y = 12 - 5 = 7
        assert_eq!(f.deriv(&[1, 0]), 7.0);
        // d3f/dx2dy = 6x*2y = -24
        assert_eq!(f.deriv(&[2, 1]), -24.0);
        // d4 f / dx3 dy = 6*2y = -12
        assert_eq!(f.deriv(&[3, 1]), -12.0);
    }

    #[test]
    fn transcendental_derivatives_match_analytic() {
        let s = sp(1, 4);
        let x = Jet::var(&s, 0, 0.7);
        // f = sin(x) * exp(2x)
        let f = &x.sin() * &(&x * 2.0).exp();
        let x0: f64 = 0.7;
        let e = (2.0 * x0).exp();
        let f0 = x0.sin() * e;
        let f1 = (x0.cos() + 2.0 * x0.sin()) * e;
        let f2 = (4.0 * x0.cos() + 3.0 * x0.sin()) * e;
        let f3 = (11.0 * x0.cos() + 2.0 * x0.sin()) * e;
        let f4 = (24.0 * x0.cos() - 7.0 * x0.sin()) * e;
        for (k, want) in [f0, f1, f2, f3, f4].iter().enumerate() {
            let got = f.deriv(&[k]);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "order {k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn rational_and_sqrt_chain_rule() {
        let s = sp(2, 4);
        let x = Jet::var(&s, 0, 0.3);
        let y = Jet::var(&s, 1, 0.4);
        // f = sqrt(1 + x^2 + y^2); at (0.3, 0.4): 1 + 0.25 = 1.25
        let f = (&(&x.powi(2) + &y.powi(2)) + 1.0).sqrt();
        let r2: f64 = 1.25;
        assert!((f.val() - r2.sqrt()).abs() < 1e-15);
        // df/dx = x / sqrt(1+x^2+y^2)
        let want = 0.3 / r2.sqrt();
        assert!((f.d1(0) - want).abs() < 1e-14);
        // d2f/dxdy = -xy (1+x^2+y^2)^{-3/2}
        let want = -0.3 * 0.4 * r2.powf(-1.5);
        assert!((f.d2(0, 1) - want).abs() < 1e-13);
        // mixed partials symmetric by construction
        assert_eq!(f.d2(0, 1), f.d2(1, 0));
    }

    #[test]
    fn division_and_recip() {
        let s = sp(1, 4);
        let x = Jet::var(&s, 0, 1.5);
        let f = &Jet::constant(&s, 1.0) / &(&x.powi(2) + 1.0);
        // f = 1/(1+x^2), f'(x) = -2x/(1+x^2)^2
        let q: f64 = 1.0 + 2.25;
        assert!((f.val() - 1.0 / q).abs() < 1e-15);
        assert!((f.deriv(&[1]) + 3.0 / (q * q)).abs() < 1e-14);
        // 4th derivative of 1/(1+x^2): check against atan'' chain: f = d/dx atan
        let g = x.atan();
        assert!((g.deriv(&[2]) - f.deriv(&[1])).abs() < 1e-12);
        assert!((g.deriv(&[4]) - f.deriv(&[3])).abs() < 1e-10);
    }

    #[test]
    fn pd_shifts_coefficients() {
        let s = sp(2, 4);
        let x = Jet::var(&s, 0, 0.5);
        let y = Jet::var(&s, 1, 0.25);
        let f = &(&x.powi(2) * &y.powi(2)) * 3.0;
        let fx = f.pd(0); // 6 x y^2
        assert!((fx.val() - 6.0 * 0.5 * 0.0625).abs() < 1e-15);
        assert!((fx.d1(1) - 12.0 * 0.5 * 0.25).abs() < 1e-15);
        assert!((fx.d2(0, 1) - 12.0 * 0.25).abs() < 1e-15);
    }
}
