use rand::Rng;

use crate::{Error, Result};

/// Dense row-major array of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::dim(format!(
                "zero-sized dimension in shape {shape:?}"
            )));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::dim(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    /// 1-D tensor from a slice.
    pub fn vector(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "empty vector tensor");
        Self {
            shape: vec![values.len()],
            data: values.to_vec(),
        }
    }

    /// Rank-2 tensor from rows of equal length.
    pub fn matrix(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged matrix rows"));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn eye(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Uniform samples in `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| {
                if bound > 0.0 {
                    rng.gen_range(-bound..=bound)
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn item(&self) -> f64 {
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), self.data.clone())
    }

    /// Rows and columns of a rank-2 tensor.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            s => Err(Error::dim(format!("expected a matrix, got shape {s:?}"))),
        }
    }

    pub fn transpose(&self) -> Result<Self> {
        let (r, c) = self.dims2()?;
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Self::new(vec![c, r], out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.expect_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub(crate) fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn expect_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::dim(format!(
                "shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Matrix product of rank-2 tensors.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        let (m, k) = self.dims2()?;
        let (k2, n) = rhs.dims2()?;
        if k != k2 {
            return Err(Error::dim(format!(
                "matmul inner dimensions {k} and {k2} disagree"
            )));
        }
        let out = gemm(m, k, n, (&self.data, k, 1), (&rhs.data, n, 1));
        Self::new(vec![m, n], out)
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Result<Self> {
        let (k, m) = self.dims2()?;
        let (k2, n) = rhs.dims2()?;
        if k != k2 {
            return Err(Error::dim(format!(
                "t_matmul row counts {k} and {k2} disagree"
            )));
        }
        let out = gemm(m, k, n, (&self.data, 1, m), (&rhs.data, n, 1));
        Self::new(vec![m, n], out)
    }

    /// `self · rhsᵀ` without materializing the transpose.
    pub fn matmul_t(&self, rhs: &Self) -> Result<Self> {
        let (m, k) = self.dims2()?;
        let (n, k2) = rhs.dims2()?;
        if k != k2 {
            return Err(Error::dim(format!(
                "matmul_t column counts {k} and {k2} disagree"
            )));
        }
        let out = gemm(m, k, n, (&self.data, k, 1), (&rhs.data, 1, k));
        Self::new(vec![m, n], out)
    }
}

/// `A · B` for strided `A: [m, k]` and `B: [k, n]`, each given as
/// `(data, row stride, column stride)`.
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    (a, rsa, csa): (&[f64], usize, usize),
    (b, rsb, csb): (&[f64], usize, usize),
) -> Vec<f64> {
    assert!(a.len() >= m * k && b.len() >= k * n);
    let mut out = vec![0.0; m * n];
    // SAFETY: the strides address exactly the `m·k` and `k·n` elements of
    // `a` and `b` checked above, and `out` is a dense `m × n` buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn triple_loop(a: &Tensor, b: &Tensor) -> Vec<f64> {
        let (m, k) = a.dims2().unwrap();
        let (_, n) = b.dims2().unwrap();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..k {
                    s += a.data()[i * k + p] * b.data()[p * n + j];
                }
                out[i * n + j] = s;
            }
        }
        out
    }

    #[test]
    fn identity_product() {
        let x = Tensor::new(vec![3, 1], vec![0.3, -1.2, 7.0]).unwrap();
        assert_eq!(Tensor::eye(3).matmul(&x).unwrap(), x);
    }

    #[test]
    fn hand_product() {
        let a = Tensor::matrix(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = Tensor::matrix(&[&[1.0], &[1.0]]).unwrap();
        assert_eq!(a.matmul(&b).unwrap().data(), &[3.0, 7.0]);
    }

    #[test]
    fn random_product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = Tensor::uniform(&[5, 4], 1.0, &mut rng);
        let b = Tensor::uniform(&[4, 3], 1.0, &mut rng);
        let got = a.matmul(&b).unwrap();
        for (g, e) in got.data().iter().zip(triple_loop(&a, &b)) {
            assert!((g - e).abs() <= 1e-12);
        }
        let t1 = a.transpose().unwrap().t_matmul(&b).unwrap();
        let t2 = a.matmul_t(&b.transpose().unwrap()).unwrap();
        for ((x, y), z) in got.data().iter().zip(t1.data()).zip(t2.data()) {
            assert!((x - y).abs() <= 1e-12 && (x - z).abs() <= 1e-12);
        }
    }

    #[test]
    fn inner_dimension_mismatch() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(matches!(a.matmul(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(Tensor::new(vec![0], vec![]).is_err());
    }
}
