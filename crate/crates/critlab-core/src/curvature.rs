//! Pointwise curvature stack: Christoffel symbols through the Weyl tensor, the
//! self-dual/anti-self-dual block decomposition of the curvature operator,
//! Schouten tensor and sigma_2, and conformal transformation checks.
//!
//! Conventions: analyst's Laplacian (negative eigenvalues); the (0,4) curvature
//! tensor lowers the upper index of R(d_i, d_j) d_k to the *third* position, so
//! that on the round sphere R_ijkl = k0 (g_ik g_jl - g_jk g_il) with k0 > 0.

use std::sync::Arc;

use crate::catalog::{MetricChart, MetricPatch, RescaledChart, ScalarField};
use crate::error::{CritError, Result};
use crate::jet::{mul_acc, mul_acc_scaled, Jet, JetSpace};
use crate::tensor::{invert4, kulkarni_nomizu, TensorValue, Variance};

/// Flat rank-4 jet container indexed [i][j][k][l].
pub struct Jet4 {
    pub d: usize,
    pub v: Vec<Jet>,
}

impl Jet4 {
    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> &Jet {
        &self.v[((i * self.d + j) * self.d + k) * self.d + l]
    }
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize, k: usize, l: usize) -> &mut Jet {
        &mut self.v[((i * self.d + j) * self.d + k) * self.d + l]
    }
}

/// Flat rank-3 jet container indexed [k][i][j] (Gamma^k_ij).
pub struct Jet3 {
    pub d: usize,
    pub v: Vec<Jet>,
}

impl Jet3 {
    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.v[(k * self.d + i) * self.d + j]
    }
}

/// All curvature data at one point, as jets. Each stage lives in the jet space
/// of exactly its valid order: the metric carries `order` derivatives, Gamma
/// order-1, and Rm/Ric/R/W order-2. Lower-order spaces have much smaller
/// product tables, so nothing pays for derivatives it cannot legitimately use.
pub struct CurvatureJets {
    pub dim: usize,
    pub order: usize,
    pub space: Arc<JetSpace>,
    pub g: Vec<Vec<Jet>>,
    pub g_inv: Vec<Vec<Jet>>,
    /// order-1 stage
    pub gamma: Jet3,
    /// order-2 stage
    pub rm: Jet4,
    pub ric: Vec<Vec<Jet>>,
    pub scal: Jet,
    /// metric and inverse truncated to the Rm stage order
    pub g_rm: Vec<Vec<Jet>>,
    pub ginv_rm: Vec<Vec<Jet>>,
}

fn jet_matrix_inverse(g: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let d = g.len();
    let space = g[0][0].space.clone();
    let mut a: Vec<Vec<Jet>> = g.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| Jet::constant(&space, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..d {
        // pivot by value magnitude
        let mut piv = col;
        for r in (col + 1)..d {
            if a[r][col].val().abs() > a[piv][col].val().abs() {
                piv = r;
            }
        }
        if a[piv][col].val().abs() < 1e-300 {
            return Err(CritError::Degenerate("singular metric (jet inverse)".into()));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let pr = a[col][col].recip();
        for c in 0..d {
            a[col][c] = &a[col][c] * &pr;
            inv[col][c] = &inv[col][c] * &pr;
        }
        for r in 0..d {
            if r != col && a[r][col].c.iter().any(|&x| x != 0.0) {
                let f = a[r][col].clone();
                for c in 0..d {
                    let t = &a[col][c] * &f;
                    a[r][c] -= &t;
                    let t = &inv[col][c] * &f;
                    inv[r][c] -= &t;
                }
            }
        }
    }
    Ok(inv)
}

impl CurvatureJets {
    pub fn new(patch: &MetricPatch, x: &[f64], order: usize) -> Result<CurvatureJets> {
        let d = patch.dim();
        if !patch.chart.domain().contains(x) {
            return Err(CritError::Domain(format!("{:?} not in {}", x, patch.label)));
        }
        let ord_g = order;
        let ord_gam = order.saturating_sub(1);
        let ord_rm = order.saturating_sub(2);
        let g = patch.metric_jets(x, ord_g);
        let space = g[0][0].space.clone();
        let g_inv = jet_matrix_inverse(&g)?;

        let space_gam = JetSpace::get(d, ord_gam);
        let space_rm = JetSpace::get(d, ord_rm);
        let zero_gam = Jet::constant(&space_gam, 0.0);
        let zero_rm = Jet::constant(&space_rm, 0.0);

        // inverse truncated to the Gamma stage
        let ginv_gam: Vec<Vec<Jet>> = g_inv
            .iter()
            .map(|row| row.iter().map(|e| e.truncate(ord_gam)).collect())
            .collect();

        // dg[l][i][j] = d_l g_ij at the Gamma stage
        let mut dg = vec![zero_gam.clone(); d * d * d];
        for l in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v = g[i][j].pd(l).truncate(ord_gam);
                    dg[(l * d + i) * d + j] = v.clone();
                    dg[(l * d + j) * d + i] = v;
                }
            }
        }
        let dg_at = |l: usize, i: usize, j: usize| &dg[(l * d + i) * d + j];

        // Gamma^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
        let mut gamma = Jet3 { d, v: vec![zero_gam.clone(); d * d * d] };
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut acc = zero_gam.clone();
                    for l in 0..d {
                        mul_acc_scaled(&mut acc, 0.5, &ginv_gam[k][l], dg_at(i, j, l));
                        mul_acc_scaled(&mut acc, 0.5, &ginv_gam[k][l], dg_at(j, i, l));
                        mul_acc_scaled(&mut acc, -0.5, &ginv_gam[k][l], dg_at(l, i, j));
                    }
                    gamma.v[(k * d + i) * d + j] = acc.clone();
                    gamma.v[(k * d + j) * d + i] = acc;
                }
            }
        }

        // Gamma truncated to the Rm stage, for the quadratic terms
        let gam_rm: Vec<Jet> = gamma.v.iter().map(|e| e.truncate(ord_rm)).collect();
        let gam_rm_at = |k: usize, i: usize, j: usize| &gam_rm[(k * d + i) * d + j];
        let g_rm: Vec<Vec<Jet>> = g
            .iter()
            .map(|row| row.iter().map(|e| e.truncate(ord_rm)).collect())
            .collect();
        let ginv_rm: Vec<Vec<Jet>> = g_inv
            .iter()
            .map(|row| row.iter().map(|e| e.truncate(ord_rm)).collect())
            .collect();

        // R_ijk^l = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ip Gamma^p_jk - Gamma^l_jp Gamma^p_ik
        // lowered to the third slot: Rm[i][j][a][k] = R_ijk^m g_ma
        let mut rm_up = vec![zero_rm.clone(); d * d * d * d]; // [i][j][k][l]
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut acc = gamma.at(l, j, k).pd(i).truncate(ord_rm)
                            - gamma.at(l, i, k).pd(j).truncate(ord_rm);
                        for p in 0..d {
                            mul_acc(&mut acc, gam_rm_at(l, i, p), gam_rm_at(p, j, k));
                            mul_acc_scaled(&mut acc, -1.0, gam_rm_at(l, j, p), gam_rm_at(p, i, k));
                        }
                        rm_up[((i * d + j) * d + k) * d + l] = acc.clone();
                        rm_up[((j * d + i) * d + k) * d + l] = -acc;
                    }
                }
            }
        }

        let mut rm = Jet4 { d, v: vec![zero_rm.clone(); d * d * d * d] };
        for i in 0..d {
            for j in (i + 1)..d {
                for a in 0..d {
                    for k in 0..d {
                        let mut acc = zero_rm.clone();
                        for m in 0..d {
                            mul_acc(&mut acc, &rm_up[((i * d + j) * d + k) * d + m], &g_rm[m][a]);
                        }
                        *rm.at_mut(i, j, a, k) = acc.clone();
                        *rm.at_mut(j, i, a, k) = -acc;
                    }
                }
            }
        }

        // Ric_ij = g^{lm} R_limj
        let mut ric = vec![vec![zero_rm.clone(); d]; d];
        for i in 0..d {
            for j in i..d {
                let mut acc = zero_rm.clone();
                for l in 0..d {
                    for m in 0..d {
                        mul_acc(&mut acc, &ginv_rm[l][m], rm.at(l, i, m, j));
                    }
                }
                ric[i][j] = acc.clone();
                ric[j][i] = acc;
            }
        }

        let mut scal = zero_rm;
        for i in 0..d {
            for j in 0..d {
                mul_acc(&mut scal, &ginv_rm[i][j], &ric[i][j]);
            }
        }

        Ok(CurvatureJets { dim: d, order, space, g, g_inv, gamma, rm, ric, scal, g_rm, ginv_rm })
    }

    /// Traceless Ricci E = Ric - (R/n) g as jets (Rm-stage order).
    pub fn traceless_ricci(&self) -> Vec<Vec<Jet>> {
        let d = self.dim;
        let f = 1.0 / d as f64;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| &self.ric[i][j] - &(&(&self.scal * f) * &self.g_rm[i][j]))
                    .collect()
            })
            .collect()
    }

    /// Schouten tensor A = (Ric - R g / (2(n-1))) / (n-2) as jets.
    pub fn schouten(&self) -> Result<Vec<Vec<Jet>>> {
        let d = self.dim;
        if d < 3 {
            return Err(CritError::Unsupported("Schouten tensor needs n >= 3".into()));
        }
        let n = d as f64;
        let c1 = 1.0 / (n - 2.0);
        let c2 = 1.0 / (2.0 * (n - 1.0));
        Ok((0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (&self.ric[i][j] - &(&(&self.scal * c2) * &self.g_rm[i][j])) * c1
                    })
                    .collect()
            })
            .collect())
    }

    /// Weyl tensor (lowered) as jets:
    /// W = Rm - (E /\ g)/(n-2) - R (g /\ g) / (2n(n-1)).
    pub fn weyl(&self) -> Jet4 {
        let d = self.dim;
        let n = d as f64;
        let e = self.traceless_ricci();
        let ce = 1.0 / (n - 2.0);
        let cg = 1.0 / (2.0 * n * (n - 1.0));
        let zero = Jet::constant(&self.scal.space, 0.0);
        let mut w = Jet4 { d, v: vec![zero; d * d * d * d] };
        let scal_cg = &self.scal * cg;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        // (E /\ g)_ijkl = E_ik g_jl - E_jk g_il - E_il g_jk + E_jl g_ik
                        let sp_rm = self.scal.space.clone();
                        let mut kn = Jet::constant(&sp_rm, 0.0);
                        mul_acc(&mut kn, &e[i][k], &self.g_rm[j][l]);
                        mul_acc_scaled(&mut kn, -1.0, &e[j][k], &self.g_rm[i][l]);
                        mul_acc_scaled(&mut kn, -1.0, &e[i][l], &self.g_rm[j][k]);
                        mul_acc(&mut kn, &e[j][l], &self.g_rm[i][k]);
                        let mut gg = Jet::constant(&sp_rm, 0.0);
                        mul_acc(&mut gg, &self.g_rm[i][k], &self.g_rm[j][l]);
                        mul_acc_scaled(&mut gg, -1.0, &self.g_rm[j][k], &self.g_rm[i][l]);
                        let mut t = self.rm.at(i, j, k, l).clone();
                        t -= &(&kn * ce);
                        let sgg = &scal_cg * &(&gg * 2.0);
                        t -= &sgg;
                        *w.at_mut(i, j, k, l) = t;
                    }
                }
            }
        }
        w
    }

    /// Covariant derivative of a rank-2 lower jet field at this point. The
    /// output lives one order below the input field.
    pub fn cd_rank2(&self, t: &[Vec<Jet>]) -> Vec<Vec<Vec<Jet>>> {
        let d = self.dim;
        let out_ord = t[0][0].space.order.saturating_sub(1);
        let gam: Vec<Jet> = self.gamma.v.iter().map(|e| e.truncate(out_ord)).collect();
        let gam_at = |k: usize, i: usize, j: usize| &gam[(k * d + i) * d + j];
        let tt: Vec<Vec<Jet>> = t
            .iter()
            .map(|row| row.iter().map(|e| e.truncate(out_ord)).collect())
            .collect();
        (0..d)
            .map(|p| {
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let mut acc = t[i][j].pd(p).truncate(out_ord);
                                for m in 0..d {
                                    mul_acc_scaled(&mut acc, -1.0, gam_at(m, p, i), &tt[m][j]);
                                    mul_acc_scaled(&mut acc, -1.0, gam_at(m, p, j), &tt[i][m]);
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Divergence (delta T)_j = g^{pq} (cd T)_{p,qj} of a rank-2 lower field.
    pub fn divergence_rank2(&self, t: &[Vec<Jet>]) -> Vec<Jet> {
        let d = self.dim;
        let cd = self.cd_rank2(t);
        let out_ord = cd[0][0][0].space.order;
        let ginv: Vec<Vec<Jet>> = self
            .g_inv
            .iter()
            .map(|row| row.iter().map(|e| e.truncate(out_ord)).collect())
            .collect();
        (0..d)
            .map(|j| {
                let mut acc = Jet::constant(&cd[0][0][0].space, 0.0);
                for p in 0..d {
                    for q in 0..d {
                        mul_acc(&mut acc, &ginv[p][q], &cd[p][q][j]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Einstein tensor G = -Ric + (R/2) g (the gradient of the total-scalar
    /// functional; divergence-free by the contracted second Bianchi identity).
    pub fn einstein(&self) -> Vec<Vec<Jet>> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| &(&(&self.scal * 0.5) * &self.g_rm[i][j]) - &self.ric[i][j])
                    .collect()
            })
            .collect()
    }

    pub fn metric_value(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| self.g[i][j].val())
    }

    pub fn metric_inv_value(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn2(d, [Variance::Upper; 2], |i, j| self.g_inv[i][j].val())
    }

    pub fn ricci_value(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| self.ric[i][j].val())
    }

    pub fn rm_value(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn4(d, [Variance::Lower; 4], |i, j, k, l| self.rm.at(i, j, k, l).val())
    }
}

// ---------------------------------------------------------------------------
// Frames and the curvature-operator block decomposition
// ---------------------------------------------------------------------------

/// Orthonormal frame from Gram-Schmidt on the coordinate basis, with a
/// determinant-sign correction so the frame matches the patch orientation.
/// Rows are frame vectors e_a^mu.
pub fn orthonormal_frame(g: &TensorValue, orientation: f64) -> Result<Vec<Vec<f64>>> {
    let d = g.dim;
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    for a in 0..d {
        let mut v = vec![0.0; d];
        v[a] = 1.0;
        for e in &frame {
            let mut dot = 0.0;
            for i in 0..d {
                for j in 0..d {
                    dot += g.get(&[i, j]) * v[i] * e[j];
                }
            }
            for i in 0..d {
                v[i] -= dot * e[i];
            }
        }
        let mut nrm = 0.0;
        for i in 0..d {
            for j in 0..d {
                nrm += g.get(&[i, j]) * v[i] * v[j];
            }
        }
        if nrm <= 0.0 {
            return Err(CritError::Degenerate("frame degenerate: metric not positive definite".into()));
        }
        let nrm = nrm.sqrt();
        for vi in v.iter_mut() {
            *vi /= nrm;
        }
        frame.push(v);
    }
    // Gram-Schmidt preserves coordinate orientation; flip the last vector if the
    // patch declares the coordinate order negatively oriented.
    if orientation < 0.0 {
        for vi in frame[d - 1].iter_mut() {
            *vi = -*vi;
        }
    }
    Ok(frame)
}

/// Kaehler-adapted orthonormal frame {v, Jv, w, Jw}; the Kaehler form becomes
/// e^1^e^2 + e^3^e^4 exactly.
pub fn kaehler_adapted_frame(g: &TensorValue, j: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = g.dim;
    assert_eq!(d, 4);
    let ip = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for k in 0..d {
                s += g.get(&[i, k]) * u[i] * v[k];
            }
        }
        s
    };
    let jv = |u: &[f64]| -> Vec<f64> {
        (0..d).map(|i| (0..d).map(|k| j[i][k] * u[k]).sum()).collect()
    };
    let mut v1 = vec![1.0, 0.0, 0.0, 0.0];
    let n = ip(&v1, &v1).sqrt();
    for x in v1.iter_mut() {
        *x /= n;
    }
    let v2 = jv(&v1);
    // third vector: first coordinate vector independent of span(v1, v2)
    let mut v3 = vec![0.0; 4];
    let mut found = false;
    for c in 0..4 {
        let mut w = vec![0.0; 4];
        w[c] = 1.0;
        for e in [&v1, &v2] {
            let dot = ip(&w, e);
            for i in 0..4 {
                w[i] -= dot * e[i];
            }
        }
        let nn = ip(&w, &w);
        if nn > 1e-10 {
            for (i, wi) in w.iter().enumerate() {
                v3[i] = wi / nn.sqrt();
            }
            found = true;
            break;
        }
    }
    if !found {
        return Err(CritError::Degenerate("kaehler frame construction failed".into()));
    }
    let v4 = jv(&v3);
    Ok(vec![v1, v2, v3, v4])
}

/// Rank-4 tensor components in a frame.
pub fn frame_components4(t: &TensorValue, frame: &[Vec<f64>]) -> TensorValue {
    let d = t.dim;
    // stage-wise contraction over each slot
    let mut cur = t.entries.clone();
    for slot in 0..4 {
        let mut next = vec![0.0; cur.len()];
        let stride = d.pow((3 - slot) as u32);
        for outer in 0..d.pow(slot as u32) {
            for a in 0..d {
                for inner in 0..stride {
                    let mut acc = 0.0;
                    for i in 0..d {
                        acc += frame[a][i] * cur[(outer * d + i) * stride + inner];
                    }
                    next[(outer * d + a) * stride + inner] = acc;
                }
            }
        }
        cur = next;
    }
    TensorValue { dim: d, variance: vec![Variance::Lower; 4], entries: cur }
}

/// The three self-dual (s = +1) or anti-self-dual (s = -1) basis 2-forms as
/// antisymmetric 4x4 matrices (frame components, unnormalized: |w|^2 = 2).
pub fn two_form_basis(s: f64) -> [[[f64; 4]; 4]; 3] {
    let mut b = [[[0.0; 4]; 4]; 3];
    let pat: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (3, 1)], [(0, 3), (1, 2)]];
    for (a, pairs) in pat.iter().enumerate() {
        let (i, j) = pairs[0];
        b[a][i][j] = 1.0;
        b[a][j][i] = -1.0;
        let (k, l) = pairs[1];
        b[a][k][l] = s;
        b[a][l][k] = -s;
    }
    b
}

/// 6x6 curvature-operator matrix of a rank-4 frame tensor in the basis
/// (w1+, w2+, w3+, w1-, w2-, w3-)/sqrt(2): M_AB = (1/8) w_A : T : w_B.
pub fn curvature_operator_matrix(t_frame: &TensorValue) -> [[f64; 6]; 6] {
    let plus = two_form_basis(1.0);
    let minus = two_form_basis(-1.0);
    let basis: Vec<&[[f64; 4]; 4]> = plus.iter().chain(minus.iter()).collect();
    let mut m = [[0.0; 6]; 6];
    for (aa, wa) in basis.iter().enumerate() {
        for (bb, wb) in basis.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    if wa[i][j] == 0.0 {
                        continue;
                    }
                    for k in 0..4 {
                        for l in 0..4 {
                            if wb[k][l] != 0.0 {
                                acc += wa[i][j] * t_frame.get(&[i, j, k, l]) * wb[k][l];
                            }
                        }
                    }
                }
            }
            m[aa][bb] = acc / 8.0;
        }
    }
    m
}

/// All pointwise curvature data at one point.
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub dim: usize,
    pub gamma: TensorValue,
    pub rm: TensorValue,
    pub ric: TensorValue,
    pub scal: f64,
    pub traceless_ric: TensorValue,
    pub weyl: TensorValue,
    pub schouten: Option<TensorValue>,
    pub sigma2: Option<f64>,
    pub metric: TensorValue,
    pub metric_inv: TensorValue,
    pub frame: Vec<Vec<f64>>,
    pub what_plus: [[f64; 3]; 3],
    pub what_minus: [[f64; 3]; 3],
    pub ehat: [[f64; 3]; 3],
    pub r_plus_block: [[f64; 3]; 3],
}

impl CurvatureBundle {
    pub fn norm_sq(&self, t: &TensorValue) -> f64 {
        t.norm_sq(&self.metric, &self.metric_inv)
    }

    pub fn weyl_plus_norm_sq(&self) -> f64 {
        4.0 * frob3(&self.what_plus)
    }

    pub fn weyl_minus_norm_sq(&self) -> f64 {
        4.0 * frob3(&self.what_minus)
    }

    pub fn det_r_plus(&self) -> f64 {
        det3(&self.r_plus_block)
    }
}

pub fn frob3(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum()
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Pointwise scalar curvature invariants, computed in an orthonormal frame
/// without the tensor-object overhead (hot path for quadrature sweeps).
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarInvariants {
    pub scal: f64,
    pub ric2: f64,
    pub e2: f64,
    pub rm2: f64,
    pub w2: f64,
    pub wplus2: f64,
    pub wminus2: f64,
    pub sigma2: f64,
}

pub fn scalar_invariants(patch: &MetricPatch, x: &[f64]) -> Result<ScalarInvariants> {
    let cj = CurvatureJets::new(patch, x, 2)?;
    let d = cj.dim;
    let g = cj.metric_value();
    let frame = orthonormal_frame(&g, patch.chart.orientation())?;
    // frame components of Rm
    let rm = cj.rm_value();
    let rm_f = frame_components4(&rm, &frame);
    let mut ric_f = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for c in 0..d {
                s += rm_f.get(&[c, i, c, j]);
            }
            ric_f[i][j] = s;
        }
    }
    let scal: f64 = (0..d).map(|i| ric_f[i][i]).sum();
    let ric2: f64 = ric_f.iter().flatten().map(|v| v * v).sum();
    let e2 = ric2 - scal * scal / d as f64;
    let rm2: f64 = rm_f.entries.iter().map(|v| v * v).sum();
    let n = d as f64;
    let mut out = ScalarInvariants { scal, ric2, e2, rm2, ..Default::default() };
    if d >= 3 {
        // sigma_2 of the Schouten endomorphism from frame components
        let c1 = 1.0 / (n - 2.0);
        let c2 = scal / (2.0 * (n - 1.0));
        let mut tra = 0.0;
        let mut tra2 = 0.0;
        for i in 0..d {
            tra += c1 * (ric_f[i][i] - c2);
            for j in 0..d {
                let aij = c1 * (ric_f[i][j] - if i == j { c2 } else { 0.0 });
                let aji = c1 * (ric_f[j][i] - if i == j { c2 } else { 0.0 });
                tra2 += aij * aji;
            }
        }
        out.sigma2 = 0.5 * (tra * tra - tra2);
    }
    if d == 4 {
        // Weyl in the frame: W = Rm - (E wedge delta)/2 - R/24 delta wedge delta
        let mut w2 = 0.0;
        let e = |i: usize, j: usize| ric_f[i][j] - if i == j { scal / 4.0 } else { 0.0 };
        let del = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut w_f = TensorValue::zeros(4, &[Variance::Lower; 4]);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let kn = e(i, k) * del(j, l) - e(j, k) * del(i, l) - e(i, l) * del(j, k)
                            + e(j, l) * del(i, k);
                        let gg = 2.0 * (del(i, k) * del(j, l) - del(j, k) * del(i, l));
                        let w = rm_f.get(&[i, j, k, l]) - 0.5 * kn - scal / 24.0 * gg;
                        w_f.set(&[i, j, k, l], w);
                        w2 += w * w;
                    }
                }
            }
        }
        out.w2 = w2;
        let m = curvature_operator_matrix(&w_f);
        let mut wp = 0.0;
        let mut wm = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                wp += m[a][b] * m[a][b];
                wm += m[a + 3][b + 3] * m[a + 3][b + 3];
            }
        }
        out.wplus2 = 4.0 * wp;
        out.wminus2 = 4.0 * wm;
    }
    Ok(out)
}

pub fn christoffel_at(patch: &MetricPatch, x: &[f64]) -> Result<TensorValue> {
    let cj = CurvatureJets::new(patch, x, 1)?;
    let d = cj.dim;
    let mut t = TensorValue::zeros(d, &[Variance::Upper, Variance::Lower, Variance::Lower]);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                t.set(&[k, i, j], cj.gamma.at(k, i, j).val());
            }
        }
    }
    Ok(t)
}

pub fn curvature_at(patch: &MetricPatch, x: &[f64]) -> Result<CurvatureBundle> {
    let cj = CurvatureJets::new(patch, x, 2)?;
    let d = cj.dim;
    let metric = cj.metric_value();
    let metric_inv = cj.metric_inv_value();
    let gamma = {
        let mut t = TensorValue::zeros(d, &[Variance::Upper, Variance::Lower, Variance::Lower]);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    t.set(&[k, i, j], cj.gamma.at(k, i, j).val());
                }
            }
        }
        t
    };
    let rm = cj.rm_value();
    let ric = cj.ricci_value();
    let scal = cj.scal.val();
    let e = {
        let ej = cj.traceless_ricci();
        TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| ej[i][j].val())
    };
    let wj = cj.weyl();
    let weyl = TensorValue::from_fn4(d, [Variance::Lower; 4], |i, j, k, l| wj.at(i, j, k, l).val());
    let (schouten, sigma2) = if d >= 3 {
        let aj = cj.schouten()?;
        let a = TensorValue::from_fn2(d, [Variance::Lower; 2], |i, j| aj[i][j].val());
        // sigma_2 of g^-1 A from matrix invariants
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    m[i][j] += metric_inv.get(&[i, k]) * a.get(&[k, j]);
                }
            }
        }
        let tr: f64 = (0..d).map(|i| m[i][i]).sum();
        let mut tr2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                tr2 += m[i][j] * m[j][i];
            }
        }
        (Some(a), Some(0.5 * (tr * tr - tr2)))
    } else {
        (None, None)
    };

    let (frame, what_plus, what_minus, ehat, r_plus_block) = if d == 4 {
        let frame = orthonormal_frame(&metric, patch.chart.orientation())?;
        let rm_f = frame_components4(&rm, &frame);
        let m = curvature_operator_matrix(&rm_f);
        let r12 = scal / 12.0;
        let mut wp = [[0.0; 3]; 3];
        let mut wm = [[0.0; 3]; 3];
        let mut eh = [[0.0; 3]; 3];
        let mut rp = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                wp[a][b] = m[a][b] - if a == b { r12 } else { 0.0 };
                wm[a][b] = m[a + 3][b + 3] - if a == b { r12 } else { 0.0 };
                eh[a][b] = m[a][b + 3];
                rp[a][b] = m[a][b];
            }
        }
        (frame, wp, wm, eh, rp)
    } else {
        (orthonormal_frame(&metric, patch.chart.orientation())?, [[0.0; 3]; 3], [[0.0; 3]; 3], [[0.0; 3]; 3], [[0.0; 3]; 3])
    };

    Ok(CurvatureBundle {
        point: x.to_vec(),
        dim: d,
        gamma,
        rm,
        ric,
        scal,
        traceless_ric: e,
        weyl,
        schouten,
        sigma2,
        metric,
        metric_inv,
        frame,
        what_plus,
        what_minus,
        ehat,
        r_plus_block,
    })
}

pub fn schouten_sigma2_at(patch: &MetricPatch, x: &[f64]) -> Result<(TensorValue, f64)> {
    let b = curvature_at(patch, x)?;
    match (b.schouten, b.sigma2) {
        (Some(a), Some(s)) => Ok((a, s)),
        _ => Err(CritError::Unsupported("sigma_2 needs n >= 3".into())),
    }
}

/// Residuals of the Kaehler identity What+ = (R/12)(3 w (x) w - I) and of
/// |W+|^2 = R^2/6, evaluated in a Kaehler-adapted frame.
pub fn kaehler_wplus_check(patch: &MetricPatch, x: &[f64]) -> Result<(f64, f64)> {
    let j = patch
        .chart
        .complex_structure(x)
        .ok_or_else(|| CritError::Unsupported(format!("{} is not tagged Kaehler", patch.label)))?;
    let cj = CurvatureJets::new(patch, x, 2)?;
    let metric = cj.metric_value();
    let frame = kaehler_adapted_frame(&metric, &j)?;
    let wj = cj.weyl();
    let d = 4;
    let weyl = TensorValue::from_fn4(d, [Variance::Lower; 4], |i, jj, k, l| wj.at(i, jj, k, l).val());
    let w_f = frame_components4(&weyl, &frame);
    let m = curvature_operator_matrix(&w_f);
    let scal = cj.scal.val();
    // In the adapted frame the Kaehler form is w1+, so 3 w(x)w - I has + block diag(2,-1,-1).
    let target = [scal / 6.0, -scal / 12.0, -scal / 12.0];
    let mut res = 0.0_f64;
    for a in 0..3 {
        for b in 0..3 {
            let want = if a == b { target[a] } else { 0.0 };
            res = res.max((m[a][b] - want).abs());
        }
    }
    let wp_norm_sq = 4.0 * {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += m[a][b] * m[a][b];
            }
        }
        s
    };
    let scalar_res = (wp_norm_sq - scal * scal / 6.0).abs();
    Ok((res, scalar_res))
}

/// g~ = u^{4/(n-2)} g as a new patch.
pub fn conformal_rescale(patch: &MetricPatch, u: Arc<dyn ScalarField>, name: &str) -> MetricPatch {
    MetricPatch::new(Arc::new(RescaledChart {
        base: patch.chart.clone(),
        factor: u,
        name: name.to_string(),
    }))
}

/// Pointwise residual of conformal invariance of the (1,3) Weyl tensor between
/// a base patch and its conformal rescaling, measured relative to |W| + 1.
pub fn weyl13_invariance_residual(base: &MetricPatch, rescaled: &MetricPatch, x: &[f64]) -> Result<f64> {
    let wa = weyl13_at(base, x)?;
    let wb = weyl13_at(rescaled, x)?;
    let scale = wa.max_abs().max(1.0);
    Ok(wa.sub(&wb).max_abs() / scale)
}

fn weyl13_at(patch: &MetricPatch, x: &[f64]) -> Result<TensorValue> {
    let cj = CurvatureJets::new(patch, x, 2)?;
    let d = cj.dim;
    let wj = cj.weyl();
    let w = TensorValue::from_fn4(d, [Variance::Lower; 4], |i, j, k, l| wj.at(i, j, k, l).val());
    let ginv = cj.metric_inv_value();
    // raise the third slot (the lowered one)
    Ok(w.flip_slot(2, &ginv))
}

/// Residual of the conformal scalar-curvature equation box_g u = R_g~ u^{(n+2)/(n-2)}.
pub fn conformal_scalar_residual(
    base: &MetricPatch,
    rescaled: &MetricPatch,
    u: &Arc<dyn ScalarField>,
    x: &[f64],
) -> Result<f64> {
    let n = base.dim() as f64;
    let cj = CurvatureJets::new(base, x, 2)?;
    let uj = u.jet_at(x, 2);
    // box u = -4 (n-1)/(n-2) Lap u + R u
    let lap = laplacian_scalar(&cj, &uj);
    let box_u = -4.0 * (n - 1.0) / (n - 2.0) * lap + cj.scal.val() * uj.val();
    let cj2 = CurvatureJets::new(rescaled, x, 2)?;
    let rhs = cj2.scal.val() * uj.val().powf((n + 2.0) / (n - 2.0));
    Ok((box_u - rhs).abs())
}

/// Analyst's Laplacian of a scalar jet at the base point.
pub fn laplacian_scalar(cj: &CurvatureJets, f: &Jet) -> f64 {
    let d = cj.dim;
    let mut acc = 0.0;
    for p in 0..d {
        for q in 0..d {
            let mut hess = f.d2(p, q);
            for m in 0..d {
                hess -= cj.gamma.at(m, p, q).val() * f.d1(m);
            }
            acc += cj.g_inv[p][q].val() * hess;
        }
    }
    acc
}

/// Residual of E_g = E_ghat + (n-2) phi^-1 (Hess phi - (Lap phi / n) ghat) for
/// g = phi^-2 ghat (covariant derivatives with respect to ghat).
pub fn traceless_ricci_transform_check(
    patch_ghat: &MetricPatch,
    phi: Arc<dyn ScalarField>,
    x: &[f64],
) -> Result<f64> {
    let n = patch_ghat.dim() as f64;
    // g = phi^-2 ghat = u^{4/(n-2)} ghat with u = phi^{-(n-2)/2}
    struct PowField {
        base: Arc<dyn ScalarField>,
        p: f64,
    }
    impl ScalarField for PowField {
        fn jet_at(&self, x: &[f64], order: usize) -> Jet {
            self.base.jet_at(x, order).powf(self.p)
        }
    }
    let u = Arc::new(PowField { base: phi.clone(), p: -(n - 2.0) / 2.0 });
    let g_patch = conformal_rescale(patch_ghat, u, "phi^-2 ghat");

    let cj_hat = CurvatureJets::new(patch_ghat, x, 2)?;
    let cj_g = CurvatureJets::new(&g_patch, x, 2)?;
    let d = patch_ghat.dim();
    let e_hat = cj_hat.traceless_ricci();
    let e_g = cj_g.traceless_ricci();
    let phij = phi.jet_at(x, 2);
    // Hessian of phi wrt ghat
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut v = phij.d2(i, j);
            for m in 0..d {
                v -= cj_hat.gamma.at(m, i, j).val() * phij.d1(m);
            }
            hess[i][j] = v;
        }
    }
    let mut lap = 0.0;
    for i in 0..d {
        for j in 0..d {
            lap += cj_hat.g_inv[i][j].val() * hess[i][j];
        }
    }
    let mut worst = 0.0_f64;
    let mut scale = 1.0_f64;
    for i in 0..d {
        for j in 0..d {
            let rhs = e_hat[i][j].val()
                + (n - 2.0) / phij.val()
                    * (hess[i][j] - lap / n * cj_hat.g[i][j].val());
            scale = scale.max(rhs.abs());
            worst = worst.max((e_g[i][j].val() - rhs).abs());
        }
    }
    Ok(worst / scale)
}

/// |div G| at a point: the contracted second Bianchi identity.
pub fn bianchi_residual(patch: &MetricPatch, x: &[f64]) -> Result<f64> {
    let cj = CurvatureJets::new(patch, x, 3)?;
    let g = cj.einstein();
    let div = cj.divergence_rank2(&g);
    let scale = cj.ric.iter().flatten().map(|j| j.val().abs()).fold(1.0, f64::max);
    Ok(div.iter().map(|j| j.val().abs()).fold(0.0, f64::max) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_metric_key;
    use crate::tensor::SymmetrySpec;

    #[test]
    fn flat_torus_is_flat() {
        let rec = parse_metric_key("flat_torus:n=4").unwrap();
        let b = curvature_at(rec.primary(), &[1.0, 2.0, 3.0, 0.5]).unwrap();
        assert!(b.gamma.max_abs() < 1e-15);
        assert!(b.rm.max_abs() < 1e-15);
        assert_eq!(b.scal, 0.0);
    }

    #[test]
    fn s2_polar_christoffel() {
        let rec = parse_metric_key("round_sphere:n=2,k0=1").unwrap();
        let th = 0.9;
        let g = christoffel_at(rec.primary(), &[th, 1.3]).unwrap();
        // Gamma^theta_phiphi = -sin th cos th ; Gamma^phi_thphi = cot th
        assert!((g.get(&[0, 1, 1]) + th.sin() * th.cos()).abs() < 1e-13);
        assert!((g.get(&[1, 0, 1]) - th.cos() / th.sin()).abs() < 1e-13);
        // symmetry in lower indices
        assert!((g.get(&[1, 0, 1]) - g.get(&[1, 1, 0])).abs() < 1e-15);
    }

    #[test]
    fn round_s4_constant_curvature() {
        let rec = parse_metric_key("round_sphere:n=4,k0=1").unwrap();
        let x = [1.1, 0.8, 2.0, 3.1];
        let b = curvature_at(rec.primary(), &x).unwrap();
        assert!((b.scal - 12.0).abs() < 1e-9, "R = {}", b.scal);
        // Ric = 3 g
        let resid = b.ric.sub(&b.metric.scale(3.0)).max_abs();
        assert!(resid < 1e-10, "einstein residual {resid}");
        // Rm = (k0/2) g /\ g
        let gg = kulkarni_nomizu(&b.metric, &b.metric).unwrap();
        assert!(b.rm.sub(&gg.scale(0.5)).max_abs() < 1e-9);
        // symmetry suite
        assert!(b.rm.check_symmetry(SymmetrySpec::Riemann) < 1e-10);
        // blocks: W = 0, E = 0, R+ = I
        assert!(frob3(&b.what_plus).sqrt() < 1e-9);
        assert!(frob3(&b.what_minus).sqrt() < 1e-9);
        assert!(frob3(&b.ehat).sqrt() < 1e-9);
        assert!((b.det_r_plus() - 1.0).abs() < 1e-9);
        // sigma_2 = 3/2, A = g/2
        assert!((b.sigma2.unwrap() - 1.5).abs() < 1e-9);
        assert!(b.schouten.as_ref().unwrap().sub(&b.metric.scale(0.5)).max_abs() < 1e-10);
    }

    #[test]
    fn fubini_study_invariants() {
        let rec = parse_metric_key("fubini_study").unwrap();
        let x = [0.3, -0.2, 0.5, 0.7];
        let b = curvature_at(rec.primary(), &x).unwrap();
        assert!((b.scal - 24.0).abs() < 1e-8, "R = {}", b.scal);
        let resid = b.ric.sub(&b.metric.scale(6.0)).max_abs();
        assert!(resid < 1e-9, "einstein residual {resid}");
        assert!(b.rm.check_symmetry(SymmetrySpec::Riemann) < 1e-10);
        // self-dual wrt complex orientation: What- = 0 and |W+|^2 = R^2/6 = 96
        assert!(frob3(&b.what_minus).sqrt() < 1e-9, "W- = {:?}", b.what_minus);
        assert!((b.weyl_plus_norm_sq() - 96.0).abs() < 1e-7);
        let (kres, sres) = kaehler_wplus_check(rec.primary(), &x).unwrap();
        assert!(kres < 1e-9, "kaehler identity residual {kres}");
        assert!(sres < 1e-7);
    }

    #[test]
    fn product_s2s2_blocks() {
        let rec = parse_metric_key("product_s2s2:a=1,b=1").unwrap();
        let x = [0.7, 1.0, 1.9, 4.0];
        let b = curvature_at(rec.primary(), &x).unwrap();
        assert!((b.scal - 4.0).abs() < 1e-10);
        assert!(b.ric.sub(&b.metric).max_abs() < 1e-10);
        // R+ block eigenvalues {1, 0, 0}: det = 0, trace = 1
        let tr = b.r_plus_block[0][0] + b.r_plus_block[1][1] + b.r_plus_block[2][2];
        assert!((tr - 1.0).abs() < 1e-9);
        assert!(b.det_r_plus().abs() < 1e-10);
        // |W+|^2 = |W-|^2 = R^2/6 = 8/3
        assert!((b.weyl_plus_norm_sq() - 8.0 / 3.0).abs() < 1e-9);
        assert!((b.weyl_minus_norm_sq() - 8.0 / 3.0).abs() < 1e-9);
        // |W|^2 = 4(|What+|^2 + |What-|^2) consistency
        let w2 = b.norm_sq(&b.weyl);
        assert!((w2 - 16.0 / 3.0).abs() < 1e-9);
        let (kres, sres) = kaehler_wplus_check(rec.primary(), &x).unwrap();
        assert!(kres < 1e-10);
        assert!(sres < 1e-10);
    }

    #[test]
    fn eguchi_hanson_ricci_flat_polar_and_cartesian() {
        let rec = parse_metric_key("eguchi_hanson").unwrap();
        for x in [[1.3, 1.0, 2.0, 3.0], [4.0, 2.0, 1.0, 7.0], [20.0, 0.4, 5.0, 9.0]] {
            let b = curvature_at(&rec.patches[0], &x).unwrap();
            assert!(b.ric.max_abs() < 1e-9, "EH polar Ric at r={} -> {}", x[0], b.ric.max_abs());
            assert!(b.rm.check_symmetry(SymmetrySpec::Riemann) < 1e-9);
            // exactly one of What+- vanishes; the other decays like r^-6
            let wp = frob3(&b.what_plus).sqrt();
            let wm = frob3(&b.what_minus).sqrt();
            assert!(wp.min(wm) < 1e-9, "one side self-dual: {wp} {wm}");
            assert!(wp.max(wm) > 0.1 * x[0].powi(-6));
        }
        // Cartesian chart at |x| = 2.2
        let x = [1.5, 0.9, -1.0, 0.6];
        let b = curvature_at(&rec.patches[1], &x).unwrap();
        assert!(b.ric.max_abs() < 1e-9, "EH cartesian Ric -> {}", b.ric.max_abs());
    }

    #[test]
    fn eh_polar_vs_cartesian_scalar_invariants_agree() {
        let rec = parse_metric_key("eguchi_hanson").unwrap();
        let r = 2.5;
        let bp = curvature_at(&rec.patches[0], &[r, 1.1, 2.2, 3.3]).unwrap();
        let dir = [0.5_f64, -0.3, 0.7, 0.4];
        let n: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xc: Vec<f64> = dir.iter().map(|v| v / n * r).collect();
        let bc = curvature_at(&rec.patches[1], &xc).unwrap();
        let inv_p = bp.norm_sq(&bp.rm);
        let inv_c = bc.norm_sq(&bc.rm);
        assert!(
            (inv_p - inv_c).abs() / inv_p.abs().max(1e-12) < 1e-9,
            "|Rm|^2 polar {inv_p} vs cartesian {inv_c}"
        );
        assert!((bp.scal - bc.scal).abs() < 1e-9);
    }

    #[test]
    fn lebrun_scalar_flat() {
        for n in [1, 3, 4] {
            let rec = parse_metric_key(&format!("lebrun:n={n}")).unwrap();
            for x in [[1.4, 1.0, 2.0, 3.0], [6.0, 2.2, 0.5, 8.0]] {
                let b = curvature_at(&rec.patches[0], &x).unwrap();
                assert!(b.scal.abs() < 1e-9, "lebrun n={n} R = {}", b.scal);
            }
        }
    }

    #[test]
    fn schwarzschild_scalar_flat_and_lcf() {
        let rec = parse_metric_key("schwarzschild:m=1").unwrap();
        let b = curvature_at(rec.primary(), &[2.0, 1.0, -0.5, 0.7]).unwrap();
        assert!(b.scal.abs() < 1e-10);
        assert!(b.norm_sq(&b.weyl) < 1e-10, "conformally flat");
    }

    #[test]
    fn hyperbolic_einstein() {
        let rec = parse_metric_key("hyperbolic_space:n=4").unwrap();
        let b = curvature_at(rec.primary(), &[0.2, -0.1, 0.3, 0.15]).unwrap();
        assert!(b.ric.sub(&b.metric.scale(-3.0)).max_abs() < 1e-9);
    }

    #[test]
    fn s4_polar_vs_stereo_agree() {
        let rec = parse_metric_key("round_sphere:n=4,k0=1").unwrap();
        let bp = curvature_at(&rec.patches[0], &[1.2, 0.9, 1.0, 2.0]).unwrap();
        let bs = curvature_at(&rec.patches[1], &[0.4, -0.2, 0.1, 0.3]).unwrap();
        assert!((bp.scal - bs.scal).abs() < 1e-9);
        assert!((bp.norm_sq(&bp.ric) - bs.norm_sq(&bs.ric)).abs() < 1e-9);
    }

    #[test]
    fn second_bianchi_all_catalog() {
        for rec in crate::catalog::default_catalog() {
            let patch = rec.primary();
            let (lo, hi) = patch.chart.domain().sample_box(0.25);
            let dim = patch.dim();
            let x: Vec<f64> = (0..dim)
                .map(|i| {
                    let l = lo[i].max(-4.0);
                    let h = hi[i].min(l + 4.0);
                    0.5 * (l + h) + 0.1
                })
                .collect();
            let x = if rec.key == "eguchi_hanson" || rec.key == "lebrun" {
                let mut x = x;
                x[0] = 2.0;
                x
            } else if rec.key == "schwarzschild" || rec.key == "green_fn_sphere" {
                vec![2.0, 1.0, 1.0, 0.5]
            } else {
                x
            };
            let res = bianchi_residual(patch, &x).unwrap();
            assert!(res < 1e-8, "div G residual {} on {}", res, rec.key);
        }
    }
}
