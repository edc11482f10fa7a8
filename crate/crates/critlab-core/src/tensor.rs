//! Dense dimension-generic tensor values at a point, with index gymnastics.
//!
//! Entries are stored row-major over multi-indices, each index running over
//! `0..dim`. Values are immutable after construction; all operations are pure.

use crate::error::{CritError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

#[derive(Clone, Debug)]
pub struct TensorValue {
    pub dim: usize,
    pub variance: Vec<Variance>,
    pub entries: Vec<f64>,
}

/// Declared symmetries checked by [`TensorValue::check_symmetry`].
#[derive(Clone, Copy, Debug)]
pub enum SymmetrySpec {
    /// t[..i..j..] == t[..j..i..] for the given slot pair.
    SymmetricPair(usize, usize),
    /// t[..i..j..] == -t[..j..i..].
    AntisymmetricPair(usize, usize),
    /// Full algebraic Riemann symmetries plus the first Bianchi identity.
    Riemann,
}

impl TensorValue {
    pub fn zeros(dim: usize, variance: &[Variance]) -> TensorValue {
        let n = dim.pow(variance.len() as u32);
        TensorValue { dim, variance: variance.to_vec(), entries: vec![0.0; n] }
    }

    pub fn scalar_rank2(dim: usize, variance: [Variance; 2]) -> TensorValue {
        TensorValue::zeros(dim, &variance)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    #[inline]
    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for &i in idx {
            f = f * self.dim + i;
        }
        f
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat(idx);
        self.entries[f] = v;
    }

    pub fn from_fn2(dim: usize, var: [Variance; 2], f: impl Fn(usize, usize) -> f64) -> TensorValue {
        let mut t = TensorValue::zeros(dim, &var);
        for i in 0..dim {
            for j in 0..dim {
                t.set(&[i, j], f(i, j));
            }
        }
        t
    }

    pub fn from_fn4(
        dim: usize,
        var: [Variance; 4],
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> TensorValue {
        let mut t = TensorValue::zeros(dim, &var);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        t.set(&[i, j, k, l], f(i, j, k, l));
                    }
                }
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            entries: self.entries.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &TensorValue) -> TensorValue {
        assert_eq!(self.variance, o.variance);
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &TensorValue) -> TensorValue {
        self.add(&o.scale(-1.0))
    }

    /// Contract two slots. If the slots have opposite variance the trace is
    /// direct; if they share a variance a rank-2 metric of the complementary
    /// variance must be supplied (the inverse metric to contract two lower
    /// slots, the metric itself for two upper slots).
    pub fn contract(&self, slot_a: usize, slot_b: usize, metric: Option<&TensorValue>) -> Result<TensorValue> {
        let r = self.rank();
        if slot_a >= r || slot_b >= r || slot_a == slot_b {
            return Err(CritError::InvalidParameter(format!(
                "contract slots ({slot_a},{slot_b}) out of range for rank {r}"
            )));
        }
        let (sa, sb) = (slot_a.min(slot_b), slot_a.max(slot_b));
        let same = self.variance[sa] == self.variance[sb];
        let m = if same {
            let m = metric.ok_or_else(|| {
                CritError::InvalidParameter("contracting equal-variance slots requires a metric".into())
            })?;
            let want = match self.variance[sa] {
                Variance::Lower => Variance::Upper,
                Variance::Upper => Variance::Lower,
            };
            if m.rank() != 2 || m.variance[0] != want || m.variance[1] != want {
                return Err(CritError::InvalidParameter(
                    "metric supplied to contract has wrong variance".into(),
                ));
            }
            Some(m)
        } else {
            None
        };

        let d = self.dim;
        let mut var = Vec::new();
        for (s, v) in self.variance.iter().enumerate() {
            if s != sa && s != sb {
                var.push(*v);
            }
        }
        let mut out = TensorValue::zeros(d, &var);
        let out_rank = var.len();
        let n_out = d.pow(out_rank as u32);
        let mut idx = vec![0usize; r];
        let mut oidx = vec![0usize; out_rank];
        for f in 0..n_out {
            let mut rem = f;
            for s in (0..out_rank).rev() {
                oidx[s] = rem % d;
                rem /= d;
            }
            let mut k = 0;
            for s in 0..r {
                if s != sa && s != sb {
                    idx[s] = oidx[k];
                    k += 1;
                }
            }
            let mut acc = 0.0;
            for p in 0..d {
                for q in 0..d {
                    idx[sa] = p;
                    idx[sb] = q;
                    let w = match m {
                        Some(mm) => mm.get(&[p, q]),
                        None => {
                            if p == q {
                                1.0
                            } else {
                                0.0
                            }
                        }
                    };
                    if w != 0.0 {
                        acc += w * self.get(&idx);
                    }
                }
            }
            out.entries[f] = acc;
        }
        Ok(out)
    }

    /// Raise or lower one slot with the given rank-2 (metric or inverse).
    pub fn flip_slot(&self, slot: usize, metric2: &TensorValue) -> TensorValue {
        let d = self.dim;
        let mut var = self.variance.clone();
        var[slot] = match var[slot] {
            Variance::Lower => Variance::Upper,
            Variance::Upper => Variance::Lower,
        };
        let mut out = TensorValue::zeros(d, &var);
        let r = self.rank();
        let n = self.entries.len();
        let mut idx = vec![0usize; r];
        for f in 0..n {
            // decode
            let mut rem = f;
            for s in (0..r).rev() {
                idx[s] = rem % d;
                rem /= d;
            }
            let mut acc = 0.0;
            let mut jdx = idx.clone();
            for p in 0..d {
                jdx[slot] = p;
                acc += metric2.get(&[idx[slot], p]) * self.get(&jdx);
            }
            out.entries[f] = acc;
        }
        out
    }

    /// Full inner product of t with itself, all indices raised/lowered by the
    /// metric. Uses the tensor norm convention (|W|^2 = 4 * |What|^2 for the
    /// curvature-operator norm on 2-forms).
    pub fn norm_sq(&self, metric: &TensorValue, metric_inv: &TensorValue) -> f64 {
        let raised = self.fully_flip(metric, metric_inv);
        self.entries.iter().zip(&raised.entries).map(|(a, b)| a * b).sum()
    }

    fn fully_flip(&self, metric: &TensorValue, metric_inv: &TensorValue) -> TensorValue {
        let mut t = self.clone();
        for s in 0..self.rank() {
            let m2 = match self.variance[s] {
                Variance::Lower => metric_inv,
                Variance::Upper => metric,
            };
            t = t.flip_slot(s, m2);
        }
        t
    }

    pub fn check_symmetry(&self, spec: SymmetrySpec) -> f64 {
        let scale = self.max_abs().max(1e-300);
        let d = self.dim;
        let mut worst: f64 = 0.0;
        match spec {
            SymmetrySpec::SymmetricPair(a, b) | SymmetrySpec::AntisymmetricPair(a, b) => {
                let sign = match spec {
                    SymmetrySpec::SymmetricPair(..) => 1.0,
                    _ => -1.0,
                };
                let r = self.rank();
                let n = self.entries.len();
                let mut idx = vec![0usize; r];
                for f in 0..n {
                    let mut rem = f;
                    for s in (0..r).rev() {
                        idx[s] = rem % d;
                        rem /= d;
                    }
                    let mut jdx = idx.clone();
                    jdx.swap(a, b);
                    worst = worst.max((self.get(&idx) - sign * self.get(&jdx)).abs());
                }
            }
            SymmetrySpec::Riemann => {
                assert_eq!(self.rank(), 4);
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            for l in 0..d {
                                let r = self.get(&[i, j, k, l]);
                                worst = worst.max((r + self.get(&[j, i, k, l])).abs());
                                worst = worst.max((r + self.get(&[i, j, l, k])).abs());
                                worst = worst.max((r - self.get(&[k, l, i, j])).abs());
                                let bianchi =
                                    r + self.get(&[i, k, l, j]) + self.get(&[i, l, j, k]);
                                worst = worst.max(bianchi.abs());
                            }
                        }
                    }
                }
            }
        }
        worst / scale
    }
}

/// Kulkarni-Nomizu product of two symmetric rank-2 lower tensors:
/// (A /\ B)_{ijkl} = A_ik B_jl - A_jk B_il - A_il B_jk + A_jl B_ik.
pub fn kulkarni_nomizu(a: &TensorValue, b: &TensorValue) -> Result<TensorValue> {
    if a.dim != b.dim {
        return Err(CritError::InvalidParameter("kulkarni_nomizu: dimension mismatch".into()));
    }
    if a.rank() != 2 || b.rank() != 2 {
        return Err(CritError::InvalidParameter("kulkarni_nomizu: inputs must be rank 2".into()));
    }
    let d = a.dim;
    Ok(TensorValue::from_fn4(d, [Variance::Lower; 4], |i, j, k, l| {
        a.get(&[i, k]) * b.get(&[j, l]) - a.get(&[j, k]) * b.get(&[i, l]) - a.get(&[i, l]) * b.get(&[j, k])
            + a.get(&[j, l]) * b.get(&[i, k])
    }))
}

/// Trace-free part of a symmetric rank-2 tensor: t - (tr_g t / n) g.
pub fn traceless_part(t: &TensorValue, metric: &TensorValue, metric_inv: &TensorValue) -> TensorValue {
    let d = t.dim;
    let mut tr = 0.0;
    for i in 0..d {
        for j in 0..d {
            tr += metric_inv.get(&[i, j]) * t.get(&[i, j]);
        }
    }
    t.sub(&metric.scale(tr / d as f64))
}

pub fn symmetrize2(t: &TensorValue) -> TensorValue {
    TensorValue::from_fn2(t.dim, [t.variance[0], t.variance[1]], |i, j| {
        0.5 * (t.get(&[i, j]) + t.get(&[j, i]))
    })
}

/// Hodge star on 2-forms of a 4-dimensional metric at a point:
/// (*w)_{ij} = (1/2) sqrt(det g) eps_{ijkl} w^{kl}, with the sign of
/// `orientation` deciding which coordinate frame counts as positively oriented.
pub fn hodge_star_2form(
    metric: &TensorValue,
    orientation: f64,
    omega: &TensorValue,
) -> Result<TensorValue> {
    let d = metric.dim;
    if d != 4 {
        return Err(CritError::Unsupported(format!("hodge_star_2form needs dim 4, got {d}")));
    }
    let g = metric;
    let det = det4(g);
    if det <= 0.0 {
        return Err(CritError::Degenerate("hodge star: metric not positive definite".into()));
    }
    let ginv = invert4(g)?;
    // raise omega
    let up = omega.flip_slot(0, &ginv).flip_slot(1, &ginv);
    let s = det.sqrt() * orientation.signum();
    let mut out = TensorValue::zeros(4, &[Variance::Lower; 2]);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    let e = levi_civita4(i, j, k, l);
                    if e != 0.0 {
                        acc += e * up.get(&[k, l]);
                    }
                }
            }
            out.set(&[i, j], 0.5 * s * acc);
        }
    }
    Ok(out)
}

pub fn levi_civita4(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let p = [i, j, k, l];
    let mut sign = 1.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            if p[a] == p[b] {
                return 0.0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

pub fn det4(g: &TensorValue) -> f64 {
    let d = g.dim;
    assert!(d <= 4);
    let mut m = [[0.0; 4]; 4];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = g.get(&[i, j]);
        }
    }
    match d {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        4 => {
            let mut det = 0.0;
            for j in 0..4 {
                let mut sub = [[0.0; 3]; 3];
                for r in 1..4 {
                    let mut c = 0;
                    for cc in 0..4 {
                        if cc != j {
                            sub[r - 1][c] = m[r][cc];
                            c += 1;
                        }
                    }
                }
                let minor = sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
                    - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
                    + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
                det += if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * minor;
            }
            det
        }
        _ => unreachable!(),
    }
}

/// Inverse of a rank-2 lower metric (returns upper-upper).
pub fn invert4(g: &TensorValue) -> Result<TensorValue> {
    let d = g.dim;
    let mut a = vec![vec![0.0; 2 * d]; d];
    for i in 0..d {
        for j in 0..d {
            a[i][j] = g.get(&[i, j]);
        }
        a[i][d + i] = 1.0;
    }
    for col in 0..d {
        let mut piv = col;
        for r in (col + 1)..d {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return Err(CritError::Degenerate("singular metric".into()));
        }
        a.swap(col, piv);
        let p = a[col][col];
        for c in 0..2 * d {
            a[col][c] /= p;
        }
        for r in 0..d {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut out = TensorValue::zeros(d, &[Variance::Upper; 2]);
    for i in 0..d {
        for j in 0..d {
            out.set(&[i, j], a[i][d + j]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(d: usize) -> TensorValue {
        TensorValue::from_fn2(d, [Variance::Upper, Variance::Lower], |i, j| if i == j { 1.0 } else { 0.0 })
    }

    fn euclid(d: usize) -> TensorValue {
        TensorValue::from_fn2(d, [Variance::Lower, Variance::Lower], |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn trace_of_identity_is_dim() {
        let t = identity(4);
        let tr = t.contract(0, 1, None).unwrap();
        assert_eq!(tr.rank(), 0);
        assert_eq!(tr.entries[0], 4.0);
    }

    #[test]
    fn constant_curvature_ricci_contraction() {
        // Rm_{ijkl} = g_ik g_jl - g_jk g_il on the unit round S^4 (orthonormal data);
        // g^{lm} R_{limj} must equal 3 g_{ij}.
        let g = euclid(4);
        let ginv = invert4(&g).unwrap();
        let rm = TensorValue::from_fn4(4, [Variance::Lower; 4], |i, j, k, l| {
            g.get(&[i, k]) * g.get(&[j, l]) - g.get(&[j, k]) * g.get(&[i, l])
        });
        // contract slots 0 and 2 with inverse metric
        let ric = rm.contract(0, 2, Some(&ginv)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = 3.0 * g.get(&[i, j]);
                assert!((ric.get(&[i, j]) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn antisymmetric_trace_of_symmetric_is_zero() {
        // T_{ijk} = s_{ij} a_k with contraction over an antisymmetrized pair of a
        // symmetric tensor vanishes: emulate by contracting sym 2-tensor against
        // antisym metric-slot pattern via a rank-4 combination.
        let d = 3;
        let s = TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| (i + j) as f64);
        let anti = TensorValue::from_fn2(d, [Variance::Upper; 2], |i, j| i as f64 - j as f64);
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += s.get(&[i, j]) * anti.get(&[i, j]);
            }
        }
        assert_eq!(acc, 0.0);
    }

    #[test]
    fn kn_of_metric_with_itself() {
        let g = euclid(4);
        let gg = kulkarni_nomizu(&g, &g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let want = 2.0
                            * (g.get(&[i, k]) * g.get(&[j, l]) - g.get(&[i, l]) * g.get(&[j, k]));
                        assert_eq!(gg.get(&[i, j, k, l]), want);
                    }
                }
            }
        }
        assert!(gg.check_symmetry(SymmetrySpec::Riemann) < 1e-15);
    }

    #[test]
    fn kn_bilinear_zero() {
        let g = euclid(3);
        let z = TensorValue::zeros(3, &[Variance::Lower; 2]);
        let kn = kulkarni_nomizu(&g, &z).unwrap();
        assert_eq!(kn.max_abs(), 0.0);
    }

    #[test]
    fn norms() {
        let g = euclid(4);
        let ginv = invert4(&g).unwrap();
        assert!((g.norm_sq(&g, &ginv) - 4.0).abs() < 1e-15);
        let ric = g.scale(3.0);
        assert!((ric.norm_sq(&g, &ginv) - 36.0).abs() < 1e-15);
    }

    #[test]
    fn traceless() {
        let g = euclid(4);
        let ginv = invert4(&g).unwrap();
        let t = traceless_part(&g, &g, &ginv);
        assert!(t.max_abs() < 1e-15);
    }

    #[test]
    fn hodge_star_basis() {
        let g = euclid(4);
        // omega1+- = e1^e2 +- e3^e4 as antisymmetric matrices
        let mk = |pairs: &[(usize, usize, f64)]| {
            let mut w = TensorValue::zeros(4, &[Variance::Lower; 2]);
            for &(i, j, v) in pairs {
                w.set(&[i, j], v);
                w.set(&[j, i], -v);
            }
            w
        };
        let wp = mk(&[(0, 1, 1.0), (2, 3, 1.0)]);
        let wm = mk(&[(0, 1, 1.0), (2, 3, -1.0)]);
        let sp = hodge_star_2form(&g, 1.0, &wp).unwrap();
        let sm = hodge_star_2form(&g, 1.0, &wm).unwrap();
        assert!(sp.sub(&wp).max_abs() < 1e-15, "self-dual form fixed by star");
        assert!(sm.add(&wm).max_abs() < 1e-15, "anti-self-dual form negated");
        // involution on a random 2-form
        let mut w = TensorValue::zeros(4, &[Variance::Lower; 2]);
        let vals = [0.3, -1.2, 0.7, 2.2, -0.4, 0.9];
        let mut k = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                w.set(&[i, j], vals[k]);
                w.set(&[j, i], -vals[k]);
                k += 1;
            }
        }
        let ss = hodge_star_2form(&g, 1.0, &hodge_star_2form(&g, 1.0, &w).unwrap()).unwrap();
        assert!(ss.sub(&w).max_abs() < 1e-14);
    }
}
