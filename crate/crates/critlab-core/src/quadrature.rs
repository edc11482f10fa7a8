//! Numerical integration over the compact catalog manifolds.
//!
//! Product Gauss-Legendre rules in the non-periodic chart coordinates and
//! uniform (trapezoid) rules on periodic angles; CP^2's improper affine-chart
//! integral uses the substitution r = tan(s). Summation is pairwise over a
//! node-ordered buffer, so results are identical for any thread count.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::catalog::{CatalogRecord, MetricPatch};

use crate::error::{CritError, Result};
use crate::tensor::det4;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess (Chebyshev-like)
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pd(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pd(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Clone, Copy, Debug)]
pub enum Axis {
    /// Gauss-Legendre rule on the open interval (a, b).
    Gauss(f64, f64),
    /// Uniform rule with weight period/n for a periodic coordinate.
    Periodic(f64),
}

/// One chart's worth of nodes with coordinate-measure weights.
pub struct PatchRule {
    pub patch: MetricPatch,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub struct QuadratureAtlas {
    pub record: CatalogRecord,
    pub fine: Vec<PatchRule>,
    pub coarse: Vec<PatchRule>,
    pub resolution: usize,
}

/// Unit S^3 point from Euler angles; the coordinate measure on S^3 is
/// (1/8) sin(theta) dtheta dphi dpsi with theta in (0,pi), phi in (0,2pi),
/// psi in (0,4pi).
pub fn s3_euler_point(th: f64, ph: f64, ps: f64) -> [f64; 4] {
    let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
    let a = (ps + ph) / 2.0;
    let b = (ph - ps) / 2.0;
    [c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]
}

fn axis_rule(axis: Axis, n: usize) -> (Vec<f64>, Vec<f64>) {
    match axis {
        Axis::Gauss(a, b) => {
            let (x, w) = gauss_legendre(n);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            (
                x.iter().map(|t| mid + half * t).collect(),
                w.iter().map(|t| t * half).collect(),
            )
        }
        Axis::Periodic(period) => {
            let w = period / n as f64;
            ((0..n).map(|i| (i as f64 + 0.5) * w).collect(), vec![w; n])
        }
    }
}

fn product_rule(patch: &MetricPatch, axes: &[Axis], counts: &[usize]) -> PatchRule {
    let per_axis: Vec<(Vec<f64>, Vec<f64>)> =
        axes.iter().zip(counts).map(|(a, &n)| axis_rule(*a, n)).collect();
    let total: usize = counts.iter().product();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let d = axes.len();
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut x = Vec::with_capacity(d);
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            x.push(per_axis[k].0[i]);
            w *= per_axis[k].1[i];
        }
        nodes.push(x);
        weights.push(w);
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    PatchRule { patch: patch.clone(), nodes, weights }
}

/// CP^2 rule. The projective plane is covered by the three regions where one
/// homogeneous coordinate dominates; each region is the closed unit polydisc
/// {|w1| <= 1, |w2| <= 1} of an affine chart, and all three charts carry the
/// identical Fubini-Study component formula. Geometric integrands built from
/// the metric therefore integrate to three times the polydisc-region integral
/// in the single affine chart. Nodes stay at |w| <= sqrt(2), where the jet
/// curvature holds full double precision (the one-chart improper integral
/// puts nodes at r ~ 1e2 and loses eight digits to cancellation).
fn cp2_rule(patch: &MetricPatch, counts: &[usize]) -> PatchRule {
    let (r1n, r1w) = axis_rule(Axis::Gauss(0.0, 1.0), counts[0]);
    let (t1n, t1w) = axis_rule(Axis::Periodic(2.0 * PI), counts[1]);
    let (r2n, r2w) = axis_rule(Axis::Gauss(0.0, 1.0), counts[2]);
    let (t2n, t2w) = axis_rule(Axis::Periodic(2.0 * PI), counts[3]);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (i1, r1) in r1n.iter().enumerate() {
        for (j1, t1) in t1n.iter().enumerate() {
            for (i2, r2) in r2n.iter().enumerate() {
                for (j2, t2) in t2n.iter().enumerate() {
                    nodes.push(vec![r1 * t1.cos(), r1 * t1.sin(), r2 * t2.cos(), r2 * t2.sin()]);
                    // x3 for the three symmetric chart regions
                    weights.push(3.0 * r1 * r2 * r1w[i1] * t1w[j1] * r2w[i2] * t2w[j2]);
                }
            }
        }
    }
    PatchRule { patch: patch.clone(), nodes, weights }
}

fn rules_for(record: &CatalogRecord, res: usize) -> Result<Vec<PatchRule>> {
    let r = res.max(2);
    let patch = record.primary();
    let rule = match record.key.as_str() {
        "round_sphere" => {
            let n = record.params.iter().find(|(k, _)| k == "n").map(|(_, v)| *v as usize).unwrap_or(4);
            match n {
                2 => product_rule(patch, &[Axis::Gauss(0.0, PI), Axis::Periodic(2.0 * PI)], &[6 * r, 4 * r]),
                3 => product_rule(
                    patch,
                    &[Axis::Gauss(0.0, PI), Axis::Gauss(0.0, PI), Axis::Periodic(2.0 * PI)],
                    &[4 * r, 4 * r, 3 * r],
                ),
                _ => product_rule(
                    patch,
                    &[
                        Axis::Gauss(0.0, PI),
                        Axis::Gauss(0.0, PI),
                        Axis::Periodic(2.0 * PI),
                        Axis::Periodic(4.0 * PI),
                    ],
                    &[4 * r, 3 * r, 2 * r, 3 * r],
                ),
            }
        }
        "product_s2s2" => product_rule(
            patch,
            &[
                Axis::Gauss(0.0, PI),
                Axis::Periodic(2.0 * PI),
                Axis::Gauss(0.0, PI),
                Axis::Periodic(2.0 * PI),
            ],
            &[3 * r, 3 * r, 3 * r, 3 * r],
        ),
        "fubini_study" => cp2_rule(patch, &[3 * r, 2 * r, 3 * r, 2 * r]),
        "s1_x_s3" => product_rule(
            patch,
            &[
                Axis::Periodic(2.0 * PI),
                Axis::Gauss(0.0, PI),
                Axis::Periodic(2.0 * PI),
                Axis::Periodic(4.0 * PI),
            ],
            &[2 * r, 4 * r, 2 * r, 3 * r],
        ),
        "flat_torus" => {
            let n = record.params.iter().find(|(k, _)| k == "n").map(|(_, v)| *v as usize).unwrap_or(4);
            let axes = vec![Axis::Periodic(2.0 * PI); n];
            let counts = vec![2 * r; n];
            product_rule(patch, &axes, &counts)
        }
        _ => {
            return Err(CritError::Unsupported(format!(
                "no quadrature atlas for non-compact metric '{}'",
                record.key
            )))
        }
    };
    Ok(vec![rule])
}

impl QuadratureAtlas {
    pub fn new(record: &CatalogRecord, resolution: usize) -> Result<QuadratureAtlas> {
        if !record.reference.compact {
            return Err(CritError::Unsupported(format!(
                "quadrature atlas requires a compact metric, got '{}'",
                record.key
            )));
        }
        let fine = rules_for(record, resolution)?;
        let coarse = rules_for(record, (2 * resolution) / 3)?;
        Ok(QuadratureAtlas { record: record.clone(), fine, coarse, resolution })
    }

    /// Integral of f dV with an error estimate from the coarse rule.
    pub fn integrate<F>(&self, f: F) -> (f64, f64)
    where
        F: Fn(&MetricPatch, &[f64]) -> f64 + Sync,
    {
        let fine = integrate_rules(&self.fine, &f);
        let coarse = integrate_rules(&self.coarse, &f);
        (fine, (fine - coarse).abs())
    }

    pub fn volume(&self) -> (f64, f64) {
        self.integrate(|_, _| 1.0)
    }
}

/// Deterministic pairwise summation of an ordered buffer.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

pub fn integrate_rules<F>(rules: &[PatchRule], f: &F) -> f64
where
    F: Fn(&MetricPatch, &[f64]) -> f64 + Sync,
{
    let mut total = 0.0;
    for rule in rules {
        let vals: Vec<f64> = rule
            .nodes
            .par_iter()
            .zip(rule.weights.par_iter())
            .map(|(x, w)| {
                let g = rule.patch.metric_jets(x, 0);
                let d = rule.patch.dim();
                let gv = crate::tensor::TensorValue::from_fn2(
                    d,
                    [crate::tensor::Variance::Lower; 2],
                    |i, j| g[i][j].val(),
                );
                let dens = det4(&gv).sqrt();
                w * dens * f(&rule.patch, x)
            })
            .collect();
        total += pairwise_sum(&vals);
    }
    total
}

pub use crate::curvature::ScalarInvariants as NodeCurvature;

pub fn node_curvature(patch: &MetricPatch, x: &[f64]) -> NodeCurvature {
    crate::curvature::scalar_invariants(patch, x).expect("curvature at quadrature node")
}

/// Values of the curvature functionals plus topological residuals.
#[derive(Clone, Debug)]
pub struct FunctionalReport {
    pub key: String,
    pub resolution: usize,
    pub volume: f64,
    pub volume_err: f64,
    pub e_tilde: f64,
    pub weyl_fn: f64,
    pub ricci_fn: f64,
    pub scal_fn: f64,
    pub rm_fn: f64,
    pub sigma2_fn: f64,
    pub int_wplus2: f64,
    pub int_wminus2: f64,
    pub int_e2: f64,
    pub f_tau: Vec<(f64, f64)>,
    pub b_t: Vec<(f64, f64)>,
    pub chi: f64,
    pub signature: f64,
    pub hitchin_thorpe: f64,
    pub asd_index: f64,
    pub chi_residual: Option<f64>,
    pub signature_residual: Option<f64>,
    pub optimal_residual: f64,
    pub weyl_split_residual: f64,
    pub rm_identity_residual: f64,
    pub quadrature_err: f64,
}

struct SweepIntegrals {
    vol: f64,
    scal: f64,
    scal2: f64,
    ric2: f64,
    e2: f64,
    wplus2: f64,
    wminus2: f64,
    w2: f64,
    rm2: f64,
    sigma2: f64,
}

fn sweep(rules: &[PatchRule]) -> SweepIntegrals {
    let mut acc = [0.0f64; 10];
    for rule in rules {
        let vals: Vec<[f64; 10]> = rule
            .nodes
            .par_iter()
            .zip(rule.weights.par_iter())
            .map(|(x, w)| {
                let g = rule.patch.metric_jets(x, 0);
                let d = rule.patch.dim();
                let gv = crate::tensor::TensorValue::from_fn2(
                    d,
                    [crate::tensor::Variance::Lower; 2],
                    |i, j| g[i][j].val(),
                );
                let dens = w * det4(&gv).sqrt();
                let nc = node_curvature(&rule.patch, x);
                [
                    dens,
                    dens * nc.scal,
                    dens * nc.scal * nc.scal,
                    dens * nc.ric2,
                    dens * nc.e2,
                    dens * nc.wplus2,
                    dens * nc.wminus2,
                    dens * nc.w2,
                    dens * nc.rm2,
                    dens * nc.sigma2,
                ]
            })
            .collect();
        for k in 0..10 {
            let col: Vec<f64> = vals.iter().map(|v| v[k]).collect();
            acc[k] += pairwise_sum(&col);
        }
    }
    SweepIntegrals {
        vol: acc[0],
        scal: acc[1],
        scal2: acc[2],
        ric2: acc[3],
        e2: acc[4],
        wplus2: acc[5],
        wminus2: acc[6],
        w2: acc[7],
        rm2: acc[8],
        sigma2: acc[9],
    }
}

pub fn functional_report(
    atlas: &QuadratureAtlas,
    tau_list: &[f64],
    t_list: &[f64],
) -> Result<FunctionalReport> {
    let n = atlas.record.primary().dim() as f64;
    let fine = sweep(&atlas.fine);
    let coarse = sweep(&atlas.coarse);
    let four_d = (n - 4.0).abs() < 1e-12;

    let e_tilde = fine.vol.powf((2.0 - n) / n) * fine.scal;
    let weyl_fn = fine.wplus2 + fine.wminus2;
    let f_tau: Vec<(f64, f64)> = tau_list.iter().map(|&t| (t, fine.ric2 + t * fine.scal2)).collect();
    let b_t: Vec<(f64, f64)> = t_list.iter().map(|&t| (t, weyl_fn + t * fine.scal2)).collect();

    let (chi, sig, chi_res, sig_res) = if four_d {
        let chi = (fine.w2 - 2.0 * fine.ric2 + (2.0 / 3.0) * fine.scal2) / (32.0 * PI * PI);
        let sig = (fine.wplus2 - fine.wminus2) / (48.0 * PI * PI);
        let chi_res = atlas.record.reference.chi.map(|c| (chi - c).abs());
        let sig_res = atlas.record.reference.signature.map(|s| (sig - s).abs());
        (chi, sig, chi_res, sig_res)
    } else {
        (0.0, 0.0, None, None)
    };
    let hitchin_thorpe = 2.0 * chi - 3.0 * sig.abs();
    let asd_index = 0.5 * (15.0 * chi + 29.0 * sig);
    let optimal_residual = if four_d {
        (fine.rm2 + 32.0 * PI * PI * (chi + 3.0 * sig) - (fine.scal2 / 3.0 + 4.0 * fine.wplus2)).abs()
    } else {
        0.0
    };

    Ok(FunctionalReport {
        key: atlas.record.key.clone(),
        resolution: atlas.resolution,
        volume: fine.vol,
        volume_err: (fine.vol - coarse.vol).abs(),
        e_tilde,
        weyl_fn,
        ricci_fn: fine.ric2,
        scal_fn: fine.scal2,
        rm_fn: fine.rm2,
        sigma2_fn: fine.sigma2,
        int_wplus2: fine.wplus2,
        int_wminus2: fine.wminus2,
        int_e2: fine.e2,
        f_tau,
        b_t,
        chi,
        signature: sig,
        hitchin_thorpe,
        asd_index,
        chi_residual: chi_res,
        signature_residual: sig_res,
        optimal_residual,
        weyl_split_residual: (fine.w2 - weyl_fn).abs(),
        rm_identity_residual: (fine.rm2 - (fine.w2 + 2.0 * fine.ric2 - fine.scal2 / 3.0)).abs(),
        quadrature_err: (fine.w2 - coarse.w2).abs().max((fine.ric2 - coarse.ric2).abs()),
    })
}

pub fn euler_characteristic_cgb(atlas: &QuadratureAtlas) -> Result<f64> {
    if atlas.record.primary().dim() != 4 {
        return Err(CritError::Unsupported("Chern-Gauss-Bonnet integral needs n = 4".into()));
    }
    let s = sweep(&atlas.fine);
    Ok((s.w2 - 2.0 * s.ric2 + (2.0 / 3.0) * s.scal2) / (32.0 * PI * PI))
}

pub fn signature_hirzebruch(atlas: &QuadratureAtlas) -> Result<f64> {
    if atlas.record.primary().dim() != 4 {
        return Err(CritError::Unsupported("signature integral needs n = 4".into()));
    }
    let s = sweep(&atlas.fine);
    Ok((s.wplus2 - s.wminus2) / (48.0 * PI * PI))
}

pub fn hitchin_thorpe_and_index(atlas: &QuadratureAtlas) -> Result<(f64, f64)> {
    let chi = euler_characteristic_cgb(atlas)?;
    let sig = signature_hirzebruch(atlas)?;
    Ok((2.0 * chi - 3.0 * sig.abs(), 0.5 * (15.0 * chi + 29.0 * sig)))
}

pub fn optimal_identity_check(atlas: &QuadratureAtlas) -> Result<f64> {
    if atlas.record.primary().dim() != 4 {
        return Err(CritError::Unsupported("optimal-metric identity needs n = 4".into()));
    }
    let s = sweep(&atlas.fine);
    let chi = (s.w2 - 2.0 * s.ric2 + (2.0 / 3.0) * s.scal2) / (32.0 * PI * PI);
    let sig = (s.wplus2 - s.wminus2) / (48.0 * PI * PI);
    let lhs = s.rm2;
    let rhs = -32.0 * PI * PI * (chi + 3.0 * sig) + s.scal2 / 3.0 + 4.0 * s.wplus2;
    Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_metric_key;

    #[test]
    fn gl_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn s3_euler_measure() {
        // pull back the flat metric under x = r n(theta,phi,psi) and check the
        // sphere volume 2 pi^2 via the (1/8) sin(theta) coordinate measure
        let (tn, tw) = axis_rule(Axis::Gauss(0.0, PI), 24);
        let mut vol = 0.0;
        for (t, w) in tn.iter().zip(&tw) {
            vol += w * t.sin() / 8.0 * (2.0 * PI) * (4.0 * PI);
        }
        assert!((vol - 2.0 * PI * PI).abs() < 1e-10);
        // and |n| = 1
        let n = s3_euler_point(1.0, 2.0, 3.0);
        let r: f64 = n.iter().map(|v| v * v).sum();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn volumes_match_references() {
        for (key, res) in [
            ("round_sphere:n=4,k0=1", 4),
            ("product_s2s2:a=1,b=1", 4),
            ("fubini_study", 4),
            ("s1_x_s3", 4),
            ("flat_torus:n=4", 2),
            ("round_sphere:n=2,k0=1", 4),
        ] {
            let rec = parse_metric_key(key).unwrap();
            let atlas = QuadratureAtlas::new(&rec, res).unwrap();
            let (vol, _) = atlas.volume();
            let want = rec.reference.volume.unwrap();
            assert!(
                (vol - want).abs() / want < 1e-8,
                "{key}: vol {vol} want {want}"
            );
        }
    }

    #[test]
    fn topology_integrals() {
        for (key, chi, sig) in [
            ("round_sphere:n=4,k0=1", 2.0, 0.0),
            ("product_s2s2:a=1,b=1", 4.0, 0.0),
            ("fubini_study", 3.0, 1.0),
            ("s1_x_s3", 0.0, 0.0),
        ] {
            let rec = parse_metric_key(key).unwrap();
            let atlas = QuadratureAtlas::new(&rec, 4).unwrap();
            let c = euler_characteristic_cgb(&atlas).unwrap();
            let s = signature_hirzebruch(&atlas).unwrap();
            assert!((c - chi).abs() < 1e-6, "{key}: chi {c} want {chi}");
            assert!((s - sig).abs() < 1e-6, "{key}: tau {s} want {sig}");
            let r = optimal_identity_check(&atlas).unwrap();
            assert!(r < 1e-5, "{key}: optimal identity residual {r}");
        }
    }

    #[test]
    fn e_tilde_values() {
        let rec = parse_metric_key("round_sphere:n=4,k0=1").unwrap();
        let atlas = QuadratureAtlas::new(&rec, 4).unwrap();
        let rep = functional_report(&atlas, &[], &[]).unwrap();
        let want = 12.0 * (8.0 * PI * PI / 3.0).sqrt();
        assert!((rep.e_tilde - want).abs() < 1e-7);
        // S(g) on the unit S^4: 144 * vol
        assert!((rep.scal_fn - 144.0 * 8.0 * PI * PI / 3.0).abs() < 1e-6);

        let rec = parse_metric_key("product_s2s2:a=2,b=0.5").unwrap();
        let atlas = QuadratureAtlas::new(&rec, 4).unwrap();
        let rep = functional_report(&atlas, &[], &[]).unwrap();
        let want = 8.0 * PI * ((0.5_f64 / 2.0).sqrt() + (2.0_f64 / 0.5).sqrt());
        assert!((rep.e_tilde - want).abs() / want < 1e-8, "{} vs {want}", rep.e_tilde);
    }

    #[test]
    fn sigma2_cgb_identity_on_s4() {
        // 16 * int sigma_2 + int |W|^2 = 32 pi^2 chi on Einstein 4-manifolds
        let rec = parse_metric_key("round_sphere:n=4,k0=1").unwrap();
        let atlas = QuadratureAtlas::new(&rec, 4).unwrap();
        let rep = functional_report(&atlas, &[], &[]).unwrap();
        let lhs = 16.0 * rep.sigma2_fn + rep.weyl_fn;
        assert!((lhs - 32.0 * PI * PI * 2.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_reduces_chi_residual() {
        let rec = parse_metric_key("fubini_study").unwrap();
        let low = QuadratureAtlas::new(&rec, 2).unwrap();
        let high = QuadratureAtlas::new(&rec, 4).unwrap();
        let rl = (euler_characteristic_cgb(&low).unwrap() - 3.0).abs();
        let rh = (euler_characteristic_cgb(&high).unwrap() - 3.0).abs();
        assert!(rh <= rl.max(1e-12), "refinement: {rl} -> {rh}");
        assert!(rh < 1e-6);
    }

    #[test]
    fn w_functional_global_minimum_fs() {
        let rec = parse_metric_key("fubini_study").unwrap();
        let atlas = QuadratureAtlas::new(&rec, 4).unwrap();
        let rep = functional_report(&atlas, &[], &[]).unwrap();
        // W(FS) = 48 pi^2 tau since W- = 0
        assert!((rep.weyl_fn - 48.0 * PI * PI).abs() < 1e-6);
        assert!(rep.int_wminus2.abs() < 1e-9);
    }

    #[test]
    fn f_tau_scale_invariance() {
        // quadratic functionals in n = 4 are scale invariant: F_tau(c g) = F_tau(g)
        let rec1 = parse_metric_key("product_s2s2:a=1,b=1").unwrap();
        let rec2 = parse_metric_key("product_s2s2:a=2,b=2").unwrap();
        let a1 = QuadratureAtlas::new(&rec1, 4).unwrap();
        let a2 = QuadratureAtlas::new(&rec2, 4).unwrap();
        for tau in [-0.5, 0.0, 0.3] {
            let r1 = functional_report(&a1, &[tau], &[]).unwrap();
            let r2 = functional_report(&a2, &[tau], &[]).unwrap();
            assert!(
                (r1.f_tau[0].1 - r2.f_tau[0].1).abs() < 1e-8 * r1.f_tau[0].1.abs().max(1.0),
                "tau={tau}"
            );
        }
    }
}
