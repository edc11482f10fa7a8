//! Closed-form metric charts and the catalog of reference metrics.
//!
//! Every metric is given by exact component functions of chart coordinates,
//! evaluable as jets to order 4. Charts cover their manifold up to measure
//! zero; coordinate singularities (poles, bolts) are excluded from the stated
//! domain and quadrature rules never place nodes there.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{CritError, Result};
use crate::jet::{Jet, JetSpace};
use crate::tensor::{TensorValue, Variance};

pub type JetMat = Vec<Vec<Jet>>;

/// A coordinate chart with smooth metric components evaluable with exact
/// derivatives up to order 4.
pub trait MetricChart: Send + Sync {
    fn dim(&self) -> usize;
    /// Metric components g_ij as jets at x (symmetric; full matrix returned).
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat;
    fn domain(&self) -> CoordBox;
    fn orientation(&self) -> f64 {
        1.0
    }
    /// Complex structure J^i_j in chart coordinates at x, when the chart carries
    /// a Kaehler structure (used for the Kaehler form and adapted frames).
    fn complex_structure(&self, _x: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }
    fn label(&self) -> String;
}

#[derive(Clone, Debug)]
pub struct CoordBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Optional radial bounds |x| in (r_lo, r_hi) for annulus-type Cartesian charts.
    pub radial: Option<(f64, f64)>,
}

impl CoordBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        CoordBox { lo, hi, radial: None }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let inbox = x
            .iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(v, (l, h))| v > l && v < h);
        if !inbox {
            return false;
        }
        if let Some((rl, rh)) = self.radial {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            return r > rl && r < rh;
        }
        true
    }

    /// A sub-box safely inside the chart, used for random sampling.
    pub fn sample_box(&self, margin: f64) -> (Vec<f64>, Vec<f64>) {
        let lo: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l + margin * (h - l).min(1e6))
            .collect();
        let hi: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - margin * (h - l).min(1e6))
            .collect();
        (lo, hi)
    }
}

pub struct MetricPatch {
    pub chart: Arc<dyn MetricChart>,
    pub label: String,
}

impl Clone for MetricPatch {
    fn clone(&self) -> Self {
        MetricPatch { chart: self.chart.clone(), label: self.label.clone() }
    }
}

impl MetricPatch {
    pub fn new(chart: Arc<dyn MetricChart>) -> Self {
        let label = chart.label();
        MetricPatch { chart, label }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        self.chart.metric_jets(x, order)
    }

    /// Metric value as a tensor at x.
    pub fn metric_at(&self, x: &[f64]) -> TensorValue {
        let g = self.metric_jets(x, 0);
        let d = self.dim();
        TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| g[i][j].val())
    }
}

// ---------------------------------------------------------------------------
// Scalar / vector / symmetric-tensor fields on a chart
// ---------------------------------------------------------------------------

pub trait ScalarField: Send + Sync {
    fn jet_at(&self, x: &[f64], order: usize) -> Jet;
}

pub trait VectorField: Send + Sync {
    /// Covariant components alpha_i of the dual 1-form, as jets.
    fn oneform_jets(&self, x: &[f64], order: usize) -> Vec<Jet>;
}

/// Helpers to build the S^3 Euler-angle machinery shared by several charts.
/// Unit-sphere coframe convention: sigma_1^2+sigma_2^2+sigma_3^2 is the round
/// metric of radius 1, i.e. the (1/4)-scaled Euler-angle forms.
pub fn s3_round_block(th: &Jet, _order: usize) -> [[Jet; 3]; 3] {
    // coordinates (theta, phi, psi); unit round S^3 is (1/4)(dth^2 + sin^2 dph^2
    // + (dpsi + cos th dph)^2), so g_phph = g_psps = g_thth = 1/4 and the only
    // angular coupling is g_phps = cos(th)/4.
    let space = th.space.clone();
    let zero = Jet::constant(&space, 0.0);
    let quarter = Jet::constant(&space, 0.25);
    let cross = &th.cos() * 0.25;
    [
        [quarter.clone(), zero.clone(), zero.clone()],
        [zero.clone(), quarter.clone(), cross.clone()],
        [zero, cross, quarter],
    ]
}

// ---------------------------------------------------------------------------
// Chart implementations
// ---------------------------------------------------------------------------

/// Geodesic polar chart on the round S^2 of sectional curvature k0.
pub struct SpherePolar2 {
    pub k0: f64,
}

impl MetricChart for SpherePolar2 {
    fn dim(&self) -> usize {
        2
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(2, order);
        let th = Jet::var(&sp, 0, x[0]);
        let s = 1.0 / self.k0;
        let zero = Jet::constant(&sp, 0.0);
        let sin = th.sin();
        vec![
            vec![Jet::constant(&sp, s), zero.clone()],
            vec![zero, &(&sin * &sin) * s],
        ]
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0, 0.0], vec![PI, 2.0 * PI])
    }
    fn label(&self) -> String {
        format!("round_sphere(n=2,k0={})", self.k0)
    }
}

/// Geodesic polar chart on round S^3: (a, theta, phi), metric
/// (da^2 + sin^2 a * unitS2) / k0.
pub struct SpherePolar3 {
    pub k0: f64,
}

impl MetricChart for SpherePolar3 {
    fn dim(&self) -> usize {
        3
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(3, order);
        let a = Jet::var(&sp, 0, x[0]);
        let th = Jet::var(&sp, 1, x[1]);
        let s = 1.0 / self.k0;
        let zero = Jet::constant(&sp, 0.0);
        let sa2 = {
            let s = a.sin();
            &s * &s
        };
        let sth2 = {
            let s = th.sin();
            &s * &s
        };
        vec![
            vec![Jet::constant(&sp, s), zero.clone(), zero.clone()],
            vec![zero.clone(), &sa2 * s, zero.clone()],
            vec![zero.clone(), zero.clone(), &(&sa2 * &sth2) * s],
        ]
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0, 0.0, 0.0], vec![PI, PI, 2.0 * PI])
    }
    fn label(&self) -> String {
        format!("round_sphere(n=3,k0={})", self.k0)
    }
}

/// Geodesic polar chart on round S^4: (rho, theta, phi, psi), metric
/// (drho^2 + sin^2 rho * unitS3) / k0 with the Euler-angle S^3 block.
pub struct SpherePolar4 {
    pub k0: f64,
}

impl MetricChart for SpherePolar4 {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let rho = Jet::var(&sp, 0, x[0]);
        let th = Jet::var(&sp, 1, x[1]);
        let s = 1.0 / self.k0;
        let zero = Jet::constant(&sp, 0.0);
        let sr = rho.sin();
        let sr2 = &sr * &sr;
        let blk = s3_round_block(&th, order);
        let mut g = vec![vec![zero.clone(); 4]; 4];
        g[0][0] = Jet::constant(&sp, s);
        for i in 0..3 {
            for j in 0..3 {
                g[i + 1][j + 1] = &(&sr2 * &blk[i][j]) * s;
            }
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0, 0.0, 0.0, 0.0], vec![PI, PI, 2.0 * PI, 4.0 * PI])
    }
    fn label(&self) -> String {
        format!("round_sphere(n=4,k0={})", self.k0)
    }
}

/// Stereographic chart on round S^n (n = 4 in practice): g = (4/k0)(1+|x|^2)^-2 dx^2.
pub struct SphereStereo {
    pub n: usize,
    pub k0: f64,
}

impl MetricChart for SphereStereo {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(self.n, order);
        let xs = Jet::vars(&sp, x);
        let mut s = Jet::constant(&sp, 1.0);
        for xi in &xs {
            s += &(xi * xi);
        }
        let conf = &(&s * &s).recip() * (4.0 / self.k0);
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; self.n]; self.n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = conf.clone();
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![-40.0; self.n], vec![40.0; self.n])
    }
    fn label(&self) -> String {
        format!("round_sphere_stereo(n={},k0={})", self.n, self.k0)
    }
}

/// Product of round 2-spheres with inverse curvatures a and b:
/// g = a*(dth1^2 + sin^2 th1 dph1^2) + b*(dth2^2 + sin^2 th2 dph2^2).
pub struct ProductS2S2 {
    pub a: f64,
    pub b: f64,
}

impl MetricChart for ProductS2S2 {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let th1 = Jet::var(&sp, 0, x[0]);
        let th2 = Jet::var(&sp, 2, x[2]);
        let zero = Jet::constant(&sp, 0.0);
        let s1 = th1.sin();
        let s2 = th2.sin();
        let mut g = vec![vec![zero; 4]; 4];
        g[0][0] = Jet::constant(&sp, self.a);
        g[1][1] = &(&s1 * &s1) * self.a;
        g[2][2] = Jet::constant(&sp, self.b);
        g[3][3] = &(&s2 * &s2) * self.b;
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0, 0.0, 0.0, 0.0], vec![PI, 2.0 * PI, PI, 2.0 * PI])
    }
    fn complex_structure(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        // J dtheta = (1/sin th) dphi direction per factor (product complex structure)
        let mut j = vec![vec![0.0; 4]; 4];
        let s1 = x[0].sin();
        let s2 = x[2].sin();
        j[1][0] = 1.0 / s1; // J(d/dth1) = (1/sin) d/dph1
        j[0][1] = -s1;
        j[3][2] = 1.0 / s2;
        j[2][3] = -s2;
        Some(j)
    }
    fn label(&self) -> String {
        format!("product_s2s2(a={},b={})", self.a, self.b)
    }
}

/// Fubini-Study metric on CP^2 in the affine chart C^2 = R^4, normalized so
/// Ric = 6 g (Kaehler potential (1/2) log(1 + |z|^2)).
pub struct FubiniStudyAffine;

impl FubiniStudyAffine {
    /// Hermitian components H_{i jbar} as (re, im) jets, i,j in {0,1}.
    fn hermitian(&self, xs: &[Jet]) -> [[(Jet, Jet); 2]; 2] {
        let sp = xs[0].space.clone();
        // z1 = x0 + i x1, z2 = x2 + i x3 ; s = |z|^2
        let mut s = Jet::constant(&sp, 1.0);
        for xi in xs {
            s += &(xi * xi);
        }
        // s = 1 + |z|^2 here
        let denom = (&s * &s).recip();
        let c = 0.5;
        // zbar_i z_j : re/im parts
        let re = |i: usize, j: usize| -> Jet {
            // Re(zbar_i z_j) = x_{2i} x_{2j} + x_{2i+1} x_{2j+1}
            &(&xs[2 * i] * &xs[2 * j]) + &(&xs[2 * i + 1] * &xs[2 * j + 1])
        };
        let im = |i: usize, j: usize| -> Jet {
            // Im(zbar_i z_j) = x_{2i} x_{2j+1} - x_{2i+1} x_{2j}
            &(&xs[2 * i] * &xs[2 * j + 1]) - &(&xs[2 * i + 1] * &xs[2 * j])
        };
        let mut h: [[(Jet, Jet); 2]; 2] = [
            [
                (Jet::constant(&sp, 0.0), Jet::constant(&sp, 0.0)),
                (Jet::constant(&sp, 0.0), Jet::constant(&sp, 0.0)),
            ],
            [
                (Jet::constant(&sp, 0.0), Jet::constant(&sp, 0.0)),
                (Jet::constant(&sp, 0.0), Jet::constant(&sp, 0.0)),
            ],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                // H = c [ s*delta - zbar_i z_j ] / s^2   (s = 1+|z|^2)
                let re_num = &(&s * delta) - &re(i, j);
                let im_num = -&im(i, j);
                h[i][j] = (&(&re_num * &denom) * c, &(&im_num * &denom) * c);
            }
        }
        h
    }
}

impl MetricChart for FubiniStudyAffine {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let xs = Jet::vars(&sp, x);
        let h = self.hermitian(&xs);
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; 4]; 4];
        // real metric from Hermitian blocks:
        // g(x_i, x_j) = 2 Re H_ij ; g(x_i, y_j) = 2 Im H_ij ;
        // g(y_i, x_j) = -2 Im H_ij ; g(y_i, y_j) = 2 Re H_ij
        for i in 0..2 {
            for j in 0..2 {
                let (re, im) = &h[i][j];
                g[2 * i][2 * j] = re * 2.0;
                g[2 * i + 1][2 * j + 1] = re * 2.0;
                g[2 * i][2 * j + 1] = im * 2.0;
                g[2 * i + 1][2 * j] = im * -2.0;
            }
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![-1e6; 4], vec![1e6; 4])
    }
    fn complex_structure(&self, _x: &[f64]) -> Option<Vec<Vec<f64>>> {
        // standard J: d/dx_{2i} -> d/dx_{2i+1}
        let mut j = vec![vec![0.0; 4]; 4];
        j[1][0] = 1.0;
        j[0][1] = -1.0;
        j[3][2] = 1.0;
        j[2][3] = -1.0;
        Some(j)
    }
    fn label(&self) -> String {
        "fubini_study".into()
    }
}

/// S^1 x S^3 product with unit round factors; coordinates (t, theta, phi, psi).
pub struct S1xS3;

impl MetricChart for S1xS3 {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let th = Jet::var(&sp, 1, x[1]);
        let zero = Jet::constant(&sp, 0.0);
        let blk = s3_round_block(&th, order);
        let mut g = vec![vec![zero; 4]; 4];
        g[0][0] = Jet::constant(&sp, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                g[i + 1][j + 1] = blk[i][j].clone();
            }
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0, 0.0, 0.0, 0.0], vec![2.0 * PI, PI, 2.0 * PI, 4.0 * PI])
    }
    fn label(&self) -> String {
        "s1_x_s3".into()
    }
}

/// Flat torus (R/2pi Z)^n.
pub struct FlatTorus {
    pub n: usize,
}

impl MetricChart for FlatTorus {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(self.n, order);
        let _ = x;
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; self.n]; self.n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = Jet::constant(&sp, 1.0);
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![0.0; self.n], vec![2.0 * PI; self.n])
    }
    fn label(&self) -> String {
        format!("flat_torus(n={})", self.n)
    }
}

/// Poincare-ball chart of hyperbolic space H^n, sectional curvature -1:
/// g = 4 (1-|x|^2)^-2 dx^2. Local chart only; never integrated.
pub struct HyperbolicBall {
    pub n: usize,
}

impl MetricChart for HyperbolicBall {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(self.n, order);
        let xs = Jet::vars(&sp, x);
        let mut s = Jet::constant(&sp, 1.0);
        for xi in &xs {
            s -= &(xi * xi);
        }
        let conf = &(&s * &s).recip() * 4.0;
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; self.n]; self.n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = conf.clone();
        }
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![-0.8; self.n], vec![0.8; self.n])
    }
    fn label(&self) -> String {
        format!("hyperbolic_space(n={})", self.n)
    }
}

/// Bianchi-IX cohomogeneity-one family in the radial profile
/// f(r) = 1 + A r^-2 + B r^-4:
///   g = f^-1 dr^2 + r^2 (sigma_1^2 + sigma_2^2) + r^2 f sigma_3^2,
/// with sigma_i the unit-normalized left-invariant coframe (Euler angles).
/// A = 0, B = -1 is Eguchi-Hanson; A = n-2, B = 1-n is the LeBrun family.
pub struct BianchiNine {
    pub a_coef: f64,
    pub b_coef: f64,
    pub name: String,
}

impl MetricChart for BianchiNine {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let r = Jet::var(&sp, 0, x[0]);
        let th = Jet::var(&sp, 1, x[1]);
        let zero = Jet::constant(&sp, 0.0);
        let r2 = &r * &r;
        let rm2 = r2.recip();
        let rm4 = &rm2 * &rm2;
        let f = &(&(&rm2 * self.a_coef) + &(&rm4 * self.b_coef)) + 1.0;
        let sin = th.sin();
        let cos = th.cos();
        // sigma_1^2 + sigma_2^2 = (dth^2 + sin^2 th dph^2)/4
        // sigma_3 = (dpsi + cos th dph)/2
        let q = 0.25;
        let mut g = vec![vec![zero; 4]; 4];
        g[0][0] = f.recip();
        g[1][1] = &r2 * q;
        let r2f4 = &(&r2 * &f) * q;
        g[2][2] = &(&(&sin * &sin) * &r2) * q + &(&(&cos * &cos) * &r2f4);
        let cross = &cos * &r2f4;
        g[2][3] = cross.clone();
        g[3][2] = cross;
        g[3][3] = r2f4;
        g
    }
    fn domain(&self) -> CoordBox {
        CoordBox::new(vec![1.0, 0.0, 0.0, 0.0], vec![1e9, PI, 2.0 * PI, 4.0 * PI])
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Asymptotic Cartesian chart for the Bianchi-IX profiles:
/// g_ij = delta_ij + (1/f - 1) x_i x_j / r^2 + (f - 1) (Jx)_i (Jx)_j / r^2,
/// where J is the fixed complex structure generating the Hopf fibre.
pub struct AleCartesian {
    pub a_coef: f64,
    pub b_coef: f64,
    pub inner_radius: f64,
    pub name: String,
}

pub const HOPF_J: [[f64; 4]; 4] = [
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
];

impl MetricChart for AleCartesian {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let xs = Jet::vars(&sp, x);
        let mut r2 = Jet::constant(&sp, 0.0);
        for xi in &xs {
            r2 += &(xi * xi);
        }
        let rm2 = r2.recip();
        let rm4 = &rm2 * &rm2;
        let f = &(&(&rm2 * self.a_coef) + &(&rm4 * self.b_coef)) + 1.0;
        let finv_m1 = &f.recip() - &Jet::constant(&sp, 1.0);
        let f_m1 = &f - &Jet::constant(&sp, 1.0);
        // zeta_i = (J x)_i
        let zeta: Vec<Jet> = (0..4)
            .map(|i| {
                let mut acc = Jet::constant(&sp, 0.0);
                for (j, xj) in xs.iter().enumerate() {
                    if HOPF_J[i][j] != 0.0 {
                        acc += &(xj * HOPF_J[i][j]);
                    }
                }
                acc
            })
            .collect();
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; 4]; 4];
        let a_part = &finv_m1 * &rm2;
        let b_part = &f_m1 * &rm2;
        for i in 0..4 {
            for j in i..4 {
                let mut e = &(&a_part * &xs[i]) * &xs[j];
                e += &(&(&b_part * &zeta[i]) * &zeta[j]);
                if i == j {
                    e.c[0] += 1.0;
                }
                g[i][j] = e.clone();
                g[j][i] = e;
            }
        }
        g
    }
    fn domain(&self) -> CoordBox {
        let mut b = CoordBox::new(vec![-1e9; 4], vec![1e9; 4]);
        b.radial = Some((self.inner_radius, 1e9));
        b
    }
    fn label(&self) -> String {
        format!("{}[cartesian]", self.name)
    }
}

/// Euclidean Schwarzschild: g = (1 + m/r^2)^2 dx^2 on R^4 minus a ball.
pub struct SchwarzschildCartesian {
    pub m: f64,
}

impl MetricChart for SchwarzschildCartesian {
    fn dim(&self) -> usize {
        4
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(4, order);
        let xs = Jet::vars(&sp, x);
        let mut r2 = Jet::constant(&sp, 0.0);
        for xi in &xs {
            r2 += &(xi * xi);
        }
        let u = &r2.recip() * self.m + 1.0;
        let conf = &u * &u;
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = conf.clone();
        }
        g
    }
    fn domain(&self) -> CoordBox {
        let mut b = CoordBox::new(vec![-1e9; 4], vec![1e9; 4]);
        b.radial = Some((self.m.sqrt().max(0.5), 1e9));
        b
    }
    fn label(&self) -> String {
        format!("schwarzschild(m={})", self.m)
    }
}

/// Flat Cartesian chart scaled by a constant factor.
pub struct FlatCartesian {
    pub n: usize,
    pub scale: f64,
    pub name: String,
}

impl MetricChart for FlatCartesian {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let sp = JetSpace::get(self.n, order);
        let _ = x;
        let zero = Jet::constant(&sp, 0.0);
        let mut g = vec![vec![zero; self.n]; self.n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = Jet::constant(&sp, self.scale);
        }
        g
    }
    fn domain(&self) -> CoordBox {
        let mut b = CoordBox::new(vec![-1e9; self.n], vec![1e9; self.n]);
        b.radial = Some((0.1, 1e9));
        b
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Conformal rescale g~ = u^{4/(n-2)} g of a base chart by a positive scalar field.
pub struct RescaledChart {
    pub base: Arc<dyn MetricChart>,
    pub factor: Arc<dyn ScalarField>,
    pub name: String,
}

impl MetricChart for RescaledChart {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let n = self.base.dim();
        let g = self.base.metric_jets(x, order);
        let u = self.factor.jet_at(x, order);
        assert!(u.val() > 0.0, "conformal factor must be positive");
        let p = 4.0 / (n as f64 - 2.0);
        let conf = u.powf(p);
        g.iter()
            .map(|row| row.iter().map(|e| &conf * e).collect())
            .collect()
    }
    fn domain(&self) -> CoordBox {
        self.base.domain()
    }
    fn orientation(&self) -> f64 {
        self.base.orientation()
    }
    fn complex_structure(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        self.base.complex_structure(x)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// g + t h for a symmetric 2-tensor field h (variation paths).
pub struct PerturbedChart {
    pub base: Arc<dyn MetricChart>,
    pub h: Arc<dyn SymTensorField>,
    pub t: f64,
}

pub trait SymTensorField: Send + Sync {
    fn jets_at(&self, x: &[f64], order: usize) -> JetMat;
    /// Support box; None means global.
    fn support(&self) -> Option<CoordBox> {
        None
    }
}

impl MetricChart for PerturbedChart {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn metric_jets(&self, x: &[f64], order: usize) -> JetMat {
        let mut g = self.base.metric_jets(x, order);
        if self.t != 0.0 {
            let h = self.h.jets_at(x, order);
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let ht = &h[i][j] * self.t;
                    g[i][j] += &ht;
                }
            }
        }
        g
    }
    fn domain(&self) -> CoordBox {
        self.base.domain()
    }
    fn orientation(&self) -> f64 {
        self.base.orientation()
    }
    fn label(&self) -> String {
        format!("{}+t*h", self.base.label())
    }
}

// ---------------------------------------------------------------------------
// Catalog records
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct ReferenceData {
    pub einstein_lambda: Option<f64>,
    pub scalar_curvature: Option<f64>,
    pub chi: Option<f64>,
    pub signature: Option<f64>,
    pub volume: Option<f64>,
    pub mass: Option<f64>,
    pub ale_group_order: Option<u32>,
    pub ale_order: Option<f64>,
    pub kaehler: bool,
    pub compact: bool,
    pub scalar_flat: bool,
    pub bach_flat: bool,
    /// provenance notes for the reference values above
    pub provenance: Vec<(String, String)>,
}

#[derive(Clone)]
pub struct CatalogRecord {
    pub key: String,
    pub params: Vec<(String, f64)>,
    pub patches: Vec<MetricPatch>,
    pub reference: ReferenceData,
}

impl CatalogRecord {
    pub fn primary(&self) -> &MetricPatch {
        &self.patches[0]
    }

    pub fn is_af_ale(&self) -> bool {
        self.reference.ale_group_order.is_some()
    }
}

pub fn lebrun_coefficients(n: i64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(CritError::InvalidParameter(format!("lebrun family needs n >= 1, got {n}")));
    }
    Ok((n as f64 - 2.0, 1.0 - n as f64))
}

/// Parse "key" or "key:p1=v1,p2=v2" into a catalog record.
pub fn parse_metric_key(s: &str) -> Result<CatalogRecord> {
    let (key, rest) = match s.split_once(':') {
        Some((k, r)) => (k, r),
        None => (s, ""),
    };
    let mut params: Vec<(String, f64)> = Vec::new();
    if !rest.is_empty() {
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                CritError::InvalidParameter(format!("malformed parameter '{kv}' in '{s}'"))
            })?;
            let val: f64 = v
                .parse()
                .map_err(|_| CritError::InvalidParameter(format!("bad number '{v}' in '{s}'")))?;
            params.push((k.to_string(), val));
        }
    }
    get_metric(key, &params)
}

fn param(params: &[(String, f64)], name: &str, default: Option<f64>) -> Result<f64> {
    for (k, v) in params {
        if k == name {
            return Ok(*v);
        }
    }
    default.ok_or_else(|| CritError::InvalidParameter(format!("missing parameter '{name}'")))
}

pub fn get_metric(key: &str, params: &[(String, f64)]) -> Result<CatalogRecord> {
    let mut reference = ReferenceData { compact: true, ..Default::default() };
    let mut used: Vec<(String, f64)> = Vec::new();
    let patches: Vec<MetricPatch>;
    match key {
        "round_sphere" => {
            let n = param(params, "n", Some(4.0))? as usize;
            let k0 = param(params, "k0", Some(1.0))?;
            if k0 <= 0.0 {
                return Err(CritError::InvalidParameter("round_sphere needs k0 > 0".into()));
            }
            if !(2..=4).contains(&n) {
                return Err(CritError::InvalidParameter("round_sphere supports n = 2,3,4".into()));
            }
            used.push(("n".into(), n as f64));
            used.push(("k0".into(), k0));
            reference.einstein_lambda = Some((n as f64 - 1.0) * k0);
            reference.scalar_curvature = Some(n as f64 * (n as f64 - 1.0) * k0);
            reference.provenance.push(("einstein_lambda".into(), "[DERIVED] Ric = (n-1) k0 g from the constant-curvature contraction".into()));
            let vols = [0.0, 0.0, 4.0 * PI, 2.0 * PI * PI, 8.0 * PI * PI / 3.0];
            reference.volume = Some(vols[n] * k0.powf(-(n as f64) / 2.0));
            if n % 2 == 0 {
                reference.chi = Some(2.0);
                reference.signature = if n == 4 { Some(0.0) } else { None };
            }
            patches = match n {
                2 => vec![MetricPatch::new(Arc::new(SpherePolar2 { k0 }))],
                3 => vec![MetricPatch::new(Arc::new(SpherePolar3 { k0 }))],
                _ => vec![
                    MetricPatch::new(Arc::new(SpherePolar4 { k0 })),
                    MetricPatch::new(Arc::new(SphereStereo { n: 4, k0 })),
                ],
            };
        }
        "hyperbolic_space" => {
            let n = param(params, "n", Some(4.0))? as usize;
            if !(2..=4).contains(&n) {
                return Err(CritError::InvalidParameter("hyperbolic_space supports n = 2,3,4".into()));
            }
            used.push(("n".into(), n as f64));
            reference.compact = false;
            reference.einstein_lambda = Some(-(n as f64 - 1.0));
            reference.scalar_curvature = Some(-(n as f64) * (n as f64 - 1.0));
            patches = vec![MetricPatch::new(Arc::new(HyperbolicBall { n }))];
        }
        "flat_torus" => {
            let n = param(params, "n", Some(4.0))? as usize;
            if !(2..=4).contains(&n) {
                return Err(CritError::InvalidParameter("flat_torus supports n = 2,3,4".into()));
            }
            used.push(("n".into(), n as f64));
            reference.einstein_lambda = Some(0.0);
            reference.scalar_curvature = Some(0.0);
            reference.chi = Some(0.0);
            reference.signature = Some(0.0);
            reference.volume = Some((2.0 * PI).powi(n as i32));
            reference.scalar_flat = true;
            reference.bach_flat = true;
            patches = vec![MetricPatch::new(Arc::new(FlatTorus { n }))];
        }
        "product_s2s2" => {
            let a = param(params, "a", Some(1.0))?;
            let b = param(params, "b", Some(1.0))?;
            if a <= 0.0 || b <= 0.0 {
                return Err(CritError::InvalidParameter("product_s2s2 needs positive radii".into()));
            }
            used.push(("a".into(), a));
            used.push(("b".into(), b));
            if (a - b).abs() < 1e-14 {
                reference.einstein_lambda = Some(1.0 / a);
                reference.provenance.push(("einstein_lambda".into(), "[PAPER] \"the product of 2-dimensional spheres of Gaussian curvature 1, with Ric = g\" (scaled)".into()));
            }
            reference.scalar_curvature = Some(2.0 / a + 2.0 / b);
            reference.chi = Some(4.0);
            reference.signature = Some(0.0);
            reference.volume = Some(16.0 * PI * PI * a * b);
            reference.kaehler = true;
            patches = vec![MetricPatch::new(Arc::new(ProductS2S2 { a, b }))];
        }
        "fubini_study" => {
            reference.einstein_lambda = Some(6.0);
            reference.scalar_curvature = Some(24.0);
            reference.provenance.push(("einstein_lambda".into(), "[PAPER] \"scaled so that Ric = 6g\"".into()));
            reference.chi = Some(3.0);
            reference.signature = Some(1.0);
            reference.volume = Some(PI * PI / 2.0);
            reference.kaehler = true;
            patches = vec![MetricPatch::new(Arc::new(FubiniStudyAffine))];
        }
        "s1_x_s3" => {
            reference.scalar_curvature = Some(6.0);
            reference.chi = Some(0.0);
            reference.signature = Some(0.0);
            reference.volume = Some(2.0 * PI * 2.0 * PI * PI);
            patches = vec![MetricPatch::new(Arc::new(S1xS3))];
        }
        "eguchi_hanson" => {
            reference.compact = false;
            reference.einstein_lambda = Some(0.0);
            reference.scalar_curvature = Some(0.0);
            reference.scalar_flat = true;
            reference.bach_flat = true;
            reference.mass = Some(0.0);
            reference.ale_group_order = Some(2);
            reference.ale_order = Some(4.0);
            reference.provenance.push(("ale_order".into(), "[PAPER] \"Ricci-flat, ALE at infinity of order 4\"".into()));
            patches = vec![
                MetricPatch::new(Arc::new(BianchiNine { a_coef: 0.0, b_coef: -1.0, name: "eguchi_hanson".into() })),
                MetricPatch::new(Arc::new(AleCartesian { a_coef: 0.0, b_coef: -1.0, inner_radius: 1.05, name: "eguchi_hanson".into() })),
            ];
        }
        "lebrun" => {
            let nf = param(params, "n", None)?;
            let n = nf as i64;
            let (a_coef, b_coef) = lebrun_coefficients(n)?;
            used.push(("n".into(), n as f64));
            reference.compact = false;
            reference.scalar_curvature = Some(0.0);
            reference.scalar_flat = true;
            reference.bach_flat = true;
            reference.kaehler = true;
            reference.mass = Some(-2.0 * (n as f64 - 2.0));
            reference.provenance.push(("mass".into(), "[PAPER] \"The mass ... is computed to be -2(n-2)\"".into()));
            reference.ale_group_order = Some(n as u32);
            reference.ale_order = Some(if n == 2 { 4.0 } else { 2.0 });
            let name = format!("lebrun(n={n})");
            patches = vec![
                MetricPatch::new(Arc::new(BianchiNine { a_coef, b_coef, name: name.clone() })),
                MetricPatch::new(Arc::new(AleCartesian { a_coef, b_coef, inner_radius: 1.1, name })),
            ];
        }
        "schwarzschild" => {
            let m = param(params, "m", None)?;
            if m <= 0.0 {
                return Err(CritError::InvalidParameter("schwarzschild needs m > 0".into()));
            }
            used.push(("m".into(), m));
            reference.compact = false;
            reference.scalar_curvature = Some(0.0);
            reference.scalar_flat = true;
            reference.bach_flat = true;
            reference.mass = Some(12.0 * m);
            reference.provenance.push(("mass".into(), "[DERIVED] boundary integral of (1+m/r^2)^2 dx^2".into()));
            reference.ale_group_order = Some(1);
            reference.ale_order = Some(2.0);
            patches = vec![MetricPatch::new(Arc::new(SchwarzschildCartesian { m }))];
        }
        "green_fn_sphere" => {
            reference.compact = false;
            reference.scalar_curvature = Some(0.0);
            reference.scalar_flat = true;
            reference.bach_flat = true;
            reference.mass = Some(0.0);
            reference.ale_group_order = Some(1);
            reference.ale_order = Some(2.0);
            reference.provenance.push(("mass".into(), "[TRIVIAL] the Green's-function metric of the round sphere is flat".into()));
            patches = vec![MetricPatch::new(Arc::new(FlatCartesian { n: 4, scale: 1.0, name: "green_fn_sphere".into() }))];
        }
        _ => return Err(CritError::UnknownKey(key.to_string())),
    }
    Ok(CatalogRecord { key: key.to_string(), params: used, patches, reference })
}

/// All keys with their default parameters, for `suite` runs.
pub fn default_catalog() -> Vec<CatalogRecord> {
    [
        "round_sphere:n=2,k0=1",
        "round_sphere:n=3,k0=1",
        "round_sphere:n=4,k0=1",
        "hyperbolic_space:n=4",
        "flat_torus:n=4",
        "product_s2s2:a=1,b=1",
        "fubini_study",
        "s1_x_s3",
        "eguchi_hanson",
        "lebrun:n=1",
        "lebrun:n=3",
        "schwarzschild:m=1",
        "green_fn_sphere",
    ]
    .iter()
    .map(|k| parse_metric_key(k).expect("default catalog key"))
    .collect()
}
