//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the simulator or the tape: circuits are dense
//! `2^N × 2^N` matrices built from Kronecker products, and the cells are
//! transcribed line by line with plain loops.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use qrnn_core::cells::{Linear, LstmCell, QgruCell, QlstmCell};
use qrnn_core::qsim::{Entanglement, VqcConfig, VqcParams};

pub type Mat = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|p| a[i][p] * b[p][j]).sum())
                .collect()
        })
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn h() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

pub fn ry(t: f64) -> Mat {
    let (s, co) = (t / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

pub fn rz(t: f64) -> Mat {
    let e = C::from_polar(1.0, t / 2.0);
    vec![vec![e.conj(), c(0.0, 0.0)], vec![c(0.0, 0.0), e]]
}

/// `g` on qubit `q` of `n`, qubit 0 leftmost in the Kronecker product.
pub fn on_qubit(g: &Mat, q: usize, n: usize) -> Mat {
    (0..n).fold(vec![vec![c(1.0, 0.0)]], |acc, k| {
        kron(&acc, &if k == q { g.clone() } else { identity(2) })
    })
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ X` spread over `n` qubits.
pub fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let p0 = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0)],
    ];
    let p1 = vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let x = vec![
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ];
    let term = |pc: &Mat, xt: &Mat| {
        (0..n).fold(vec![vec![c(1.0, 0.0)]], |acc, k| {
            let g = if k == control {
                pc.clone()
            } else if k == target {
                xt.clone()
            } else {
                identity(2)
            };
            kron(&acc, &g)
        })
    };
    let a = term(&p0, &identity(2));
    let b = term(&p1, &x);
    a.iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| u + v).collect())
        .collect()
}

/// The full circuit as one unitary.
pub fn dense_unitary(x: &[f64], angles: &[f64], n: usize, layers: usize, ring: bool) -> Mat {
    let dim = 1 << n;
    let mut u = identity(dim);
    let mut push = |g: Mat| u = matmul(&g, &u);
    for (q, &xi) in x.iter().enumerate() {
        push(on_qubit(&h(), q, n));
        push(on_qubit(&ry(xi.atan()), q, n));
        push(on_qubit(&rz((xi * xi).atan()), q, n));
    }
    for l in 0..layers {
        let pairs: Vec<(usize, usize)> = if ring {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        } else {
            (0..n - 1).map(|i| (i, i + 1)).collect()
        };
        for (a, b) in pairs {
            push(cnot(a, b, n));
        }
        for q in 0..n {
            let k = (l * n + q) * 3;
            let rot = matmul(
                &rz(angles[k + 2]),
                &matmul(&ry(angles[k + 1]), &rz(angles[k])),
            );
            push(on_qubit(&rot, q, n));
        }
    }
    u
}

/// Pauli-Z expectations of `U|0…0⟩`, with `Z_q` built as a dense operator.
pub fn dense_expectations(u: &Mat, n: usize) -> Vec<f64> {
    let psi: Vec<C> = u.iter().map(|row| row[0]).collect();
    let z = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(-1.0, 0.0)],
    ];
    (0..n)
        .map(|q| {
            let zq = on_qubit(&z, q, n);
            let zpsi: Vec<C> = zq
                .iter()
                .map(|row| row.iter().zip(&psi).map(|(a, b)| a * b).sum())
                .collect();
            psi.iter()
                .zip(&zpsi)
                .map(|(a, b)| a.conj() * b)
                .sum::<C>()
                .re
        })
        .collect()
}

pub fn dense_vqc(x: &[f64], params: &VqcParams, cfg: &VqcConfig) -> Vec<f64> {
    let ring = cfg.entanglement == Entanglement::Ring;
    let u = dense_unitary(x, params.tensor().data(), cfg.n_qubits, cfg.n_layers, ring);
    dense_expectations(&u, cfg.n_qubits)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `x·W + b` by explicit summation.
pub fn dense(l: &Linear, x: &[f64]) -> Vec<f64> {
    let (n_in, n_out) = (l.inputs(), l.outputs());
    assert_eq!(x.len(), n_in);
    let w = l.weight.data();
    (0..n_out)
        .map(|j| l.bias.data()[j] + (0..n_in).map(|i| x[i] * w[i * n_out + j]).sum::<f64>())
        .collect()
}

pub fn cat(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().chain(b).copied().collect()
}

pub struct Step {
    pub y: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Option<Vec<f64>>,
}

pub fn qlstm_step(cell: &QlstmCell, x: &[f64], h: &[f64], c_prev: &[f64]) -> Step {
    let cfg = &cell.config;
    let q = |k: usize, v: &[f64]| dense_vqc(v, &cell.vqcs[k], cfg);
    let v = cat(h, x);
    let u = dense(&cell.proj, &v);
    let f: Vec<f64> = q(0, &u).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = q(1, &u).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = q(2, &u).into_iter().map(f64::tanh).collect();
    let c: Vec<f64> = (0..f.len())
        .map(|k| f[k] * c_prev[k] + i[k] * g[k])
        .collect();
    let o: Vec<f64> = q(3, &u).into_iter().map(sigmoid).collect();
    let gated: Vec<f64> = (0..o.len()).map(|k| o[k] * c[k].tanh()).collect();
    let h_new = q(4, &gated);
    let y_tilde = q(5, &gated);
    Step {
        y: dense(&cell.head, &y_tilde),
        h: h_new,
        c: Some(c),
    }
}

pub fn qgru_step(cell: &QgruCell, x: &[f64], h_prev: &[f64]) -> Step {
    let cfg = &cell.config;
    let q = |k: usize, v: &[f64]| dense_vqc(v, &cell.vqcs[k], cfg);
    let v = cat(x, h_prev);
    let pv = dense(&cell.proj_v, &v);
    let r: Vec<f64> = q(0, &pv).into_iter().map(sigmoid).collect();
    let z: Vec<f64> = q(1, &pv).into_iter().map(sigmoid).collect();
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let o = cat(x, &rh);
    let cand: Vec<f64> = q(2, &dense(&cell.proj_o, &o))
        .into_iter()
        .map(f64::tanh)
        .collect();
    let h: Vec<f64> = (0..z.len())
        .map(|k| z[k] * h_prev[k] + (1.0 - z[k]) * cand[k])
        .collect();
    Step {
        y: dense(&cell.head, &h),
        h,
        c: None,
    }
}

pub fn lstm_step(cell: &LstmCell, x: &[f64], h: &[f64], c_prev: &[f64]) -> Step {
    let v = cat(h, x);
    let f: Vec<f64> = dense(&cell.forget, &v).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = dense(&cell.input, &v).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = dense(&cell.candidate, &v)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let o: Vec<f64> = dense(&cell.output, &v).into_iter().map(sigmoid).collect();
    let c: Vec<f64> = (0..f.len())
        .map(|k| f[k] * c_prev[k] + i[k] * g[k])
        .collect();
    let h_new: Vec<f64> = (0..o.len()).map(|k| o[k] * c[k].tanh()).collect();
    Step {
        y: dense(&cell.head, &h_new),
        h: h_new,
        c: Some(c),
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `|a − b| / max(|a|, |b|, floor)`
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
