use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::{Error, Result};

pub const MAX_QUBITS: usize = 12;

/// A primitive gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    /// `RZ(gamma) · RY(beta) · RZ(alpha)`: alpha acts first.
    Rot(usize, f64, f64, f64),
    Cnot {
        control: usize,
        target: usize,
    },
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn hadamard() -> Mat2 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub(crate) fn ry(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

pub(crate) fn rz(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl Gate {
    /// The 2×2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn matrix(&self) -> Option<Mat2> {
        Some(match *self {
            Gate::H(_) => hadamard(),
            Gate::Ry(_, t) => ry(t),
            Gate::Rz(_, t) => rz(t),
            Gate::Rot(_, a, b, g) => mat_mul(&rz(g), &mat_mul(&ry(b), &rz(a))),
            Gate::Cnot { .. } => return None,
        })
    }
}

/// Amplitudes of an `n`-qubit register. Qubit 0 is the most significant bit
/// of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "register size {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::Index(format!("basis state {index} >= {dim}")));
        }
        let mut amps = vec![c(0.0, 0.0); dim];
        amps[index] = c(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes, which must have power-of-two length and unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = amps.len().trailing_zeros() as usize;
        if amps.len() < 2 || amps.len() != 1 << n_qubits || n_qubits > MAX_QUBITS {
            return Err(Error::dim(format!("{} amplitudes", amps.len())));
        }
        let s = Self { n_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::contract("state is not normalized"));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {q} on a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Bit mask of qubit `q` within a basis index.
    pub(crate) fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::contract(format!(
                        "CNOT control and target are both {control}"
                    )));
                }
                self.apply_cnot(control, target);
            }
            Gate::H(q) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Rot(q, ..) => {
                self.check_qubit(q)?;
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_1q(q, &m);
            }
        }
        Ok(())
    }

    pub(crate) fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let stride = self.mask(q);
        for i0 in 0..self.amps.len() {
            if i0 & stride != 0 {
                continue;
            }
            let i1 = i0 | stride;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// RZ is diagonal; cheaper than the general path.
    pub(crate) fn apply_rz(&mut self, q: usize, theta: f64) {
        let stride = self.mask(q);
        let (s, co) = (theta / 2.0).sin_cos();
        let (p0, p1) = (c(co, -s), c(co, s));
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & stride == 0 { p0 } else { p1 };
        }
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// `⟨ψ|Z_q|ψ⟩`
    pub fn expectation_z(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        Ok(self.expectation_z_unchecked(q))
    }

    pub(crate) fn expectation_z_unchecked(&self, q: usize) -> f64 {
        let m = self.mask(q);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & m == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }

    /// `⟨self|other⟩`
    pub(crate) fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(Gate::H(0)).unwrap();
        for a in s.amplitudes() {
            assert!(close(*a, c(FRAC_1_SQRT_2, 0.0)));
        }
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ has index 0b10 = 2 with qubit 0 as the high bit.
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11).unwrap());
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert_eq!(s, StateVector::basis(2, 0b01).unwrap());
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(Gate::Ry(0, PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z_eigenstates() {
        assert_eq!(
            StateVector::basis(1, 0).unwrap().expectation_z(0).unwrap(),
            1.0
        );
        assert_eq!(
            StateVector::basis(1, 1).unwrap().expectation_z(0).unwrap(),
            -1.0
        );
        let mut s = StateVector::zero(1).unwrap();
        s.apply(Gate::H(0)).unwrap();
        assert!(s.expectation_z(0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn index_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(Gate::H(2)), Err(Error::Index(_))));
        assert!(matches!(
            s.apply(Gate::Cnot {
                control: 1,
                target: 1
            }),
            Err(Error::Contract(_))
        ));
        assert!(matches!(s.expectation_z(5), Err(Error::Index(_))));
        assert!(StateVector::zero(13).is_err());
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let gates = [
            Gate::H(0),
            Gate::Ry(0, 0.731),
            Gate::Rz(0, -2.2),
            Gate::Rot(0, 0.3, -1.1, 2.9),
        ];
        for g in gates {
            let m = g.matrix().unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(expect, 0.0)).norm() <= 1e-14, "{g:?}");
                }
            }
        }
    }

    #[test]
    fn rz_fast_path_matches_matrix() {
        let mut a = StateVector::zero(3).unwrap();
        for q in 0..3 {
            a.apply(Gate::H(q)).unwrap();
            a.apply(Gate::Ry(q, 0.4 * q as f64 + 0.1)).unwrap();
        }
        let mut b = a.clone();
        a.apply_rz(1, 0.77);
        b.apply_1q(1, &rz(0.77));
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!(close(*x, *y));
        }
    }
}
