//! Order-d dense tensors, mode products, Tucker operators and the matrix-free
//! Kronecker-sum action.
//!
//! Entries are linearized with the first index varying fastest, so the flat
//! data of a tensor *is* its `vec`. With that convention the Tucker operator
//! `T ×_1 M_1 ×_2 … ×_d M_d` acts on `vec(T)` as `M_d ⊗ … ⊗ M_1`, and the
//! Kronecker sum `A_d ⊕ … ⊕ A_1` acts as `Σ_μ T ×_μ A_μ`.
//!
//! Modes are numbered from zero in this API.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Dense order-d tensor, first index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f64> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        validate_dims(&dims)?;
        let n: usize = dims.iter().product();
        if data.len() != n {
            return Err(Error::dim(format!(
                "dims {dims:?} need {n} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Inverse of [`Tensor::vec`].
    pub fn unvec(data: Vec<T>, dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), data)
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            data: vec![T::zero(); dims.iter().product()],
        }
    }

    /// Fills a tensor from a function of the multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for (i, &dim) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < dim {
                    break;
                }
                *i = 0;
            }
        }
        Self {
            dims: dims.to_vec(),
            data,
        }
    }

    /// Order-2 tensor with the same entries as `m`.
    pub fn from_matrix(m: Matrix<T>) -> Self {
        let dims = vec![m.rows(), m.cols()];
        Self {
            dims,
            data: m.into_data(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix<T>> {
        if self.dims.len() != 2 {
            return Err(Error::dim(format!(
                "order-{} tensor is not a matrix",
                self.dims.len()
            )));
        }
        Matrix::new(self.dims[0], self.dims[1], self.data.clone())
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Column-stacked vectorization.
    #[inline]
    pub fn vec(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn vec_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            debug_assert!(i < n);
            lin += i * stride;
            stride *= n;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let lin = self.linear_index(idx);
        self.data[lin] = value;
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        self.map(|x| alpha * x)
    }

    pub fn scale_mut(&mut self, alpha: T) {
        for x in &mut self.data {
            *x *= alpha;
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_same_dims(other)?;
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += alpha * y;
        }
        Ok(())
    }

    /// `self + alpha * other` as a new tensor.
    pub fn plus_scaled(&self, alpha: T, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(alpha, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.plus_scaled(-T::one(), other)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data
            .iter()
            .map(|x| {
                let m = x.modulus();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `‖self - other‖_∞ / ‖other‖_∞`.
    pub fn rel_diff_inf(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims);
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max);
        relative(diff, other.norm_inf())
    }

    /// `‖self - other‖_F / ‖other‖_F`.
    pub fn rel_diff_fro(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims);
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| {
                let m = (a - b).modulus();
                m * m
            })
            .sum::<f64>()
            .sqrt();
        relative(diff, other.norm_fro())
    }

    pub(crate) fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::dim(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// `self ×_mode m`, see [`mode_product`].
    pub fn mode_product(&self, m: &Matrix<T>, mode: usize) -> Result<Self> {
        mode_product(self, m, mode)
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Validation(
            "tensor must have at least one mode".into(),
        ));
    }
    if dims.contains(&0) {
        return Err(Error::Validation(format!(
            "tensor dims must be positive, got {dims:?}"
        )));
    }
    Ok(())
}

/// The stiff operator `K = A_d ⊕ … ⊕ A_1`, kept as its factor list.
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerSum<T = f64> {
    factors: Vec<Matrix<T>>,
}

impl<T: Scalar> KroneckerSum<T> {
    /// `factors[μ]` acts along mode `μ`.
    pub fn new(factors: Vec<Matrix<T>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation(
                "a Kronecker sum needs at least one factor".into(),
            ));
        }
        for (mu, a) in factors.iter().enumerate() {
            if !a.is_square() {
                return Err(Error::dim_mode(
                    mu,
                    format!("factor is {}x{}, must be square", a.rows(), a.cols()),
                ));
            }
        }
        Ok(Self { factors })
    }

    #[inline]
    pub fn factors(&self) -> &[Matrix<T>] {
        &self.factors
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// Sizes `(n_1, …, n_d)` of the tensors this operator acts on.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|a| a.rows()).collect()
    }

    /// Total size `N = n_1 ⋯ n_d`.
    pub fn size(&self) -> usize {
        self.factors.iter().map(|a| a.rows()).product()
    }

    /// Multiplies every factor by `alpha` (so the sum represents `alpha K`).
    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            factors: self.factors.iter().map(|a| a.scaled(alpha)).collect(),
        }
    }

    /// `K · vec(t)` evaluated as `Σ_μ t ×_μ A_μ`.
    pub fn apply(&self, t: &Tensor<T>) -> Result<Tensor<T>> {
        kronsum_action(t, self)
    }
}

/// Mode product `t ×_mode m`.
///
/// Contracts index `mode` of `t` against the columns of `m`; the result has
/// `dims[mode]` replaced by `m.rows()`. Every slab of the tensor is treated as
/// a strided matrix, so no data is permuted: mode 0 is one GEMM `m · T_(0)`,
/// higher modes are one GEMM per trailing slab `S · mᵀ`.
pub fn mode_product<T: Scalar>(t: &Tensor<T>, m: &Matrix<T>, mode: usize) -> Result<Tensor<T>> {
    let dims = t.dims();
    if mode >= dims.len() {
        return Err(Error::dim_mode(
            mode,
            format!("tensor has only {} modes", dims.len()),
        ));
    }
    let n = dims[mode];
    if m.cols() != n {
        return Err(Error::dim_mode(
            mode,
            format!(
                "matrix has {} columns but the tensor mode has size {n}",
                m.cols()
            ),
        ));
    }
    let r = m.rows();
    let left: usize = dims[..mode].iter().product();
    let right: usize = dims[mode + 1..].iter().product();

    let mut out_dims = dims.to_vec();
    out_dims[mode] = r;
    let mut out = Tensor::zeros(&out_dims);

    let a = m.data().as_ptr();
    let src = t.vec().as_ptr();
    let dst = out.vec_mut().as_mut_ptr();
    unsafe {
        if left == 1 {
            // (r x n) · (n x right)
            T::gemm(
                r,
                n,
                right,
                T::one(),
                a,
                1,
                r as isize,
                src,
                1,
                n as isize,
                T::zero(),
                dst,
                1,
                r as isize,
            );
        } else {
            // Per slab: (left x n) · mᵀ (n x r), mᵀ read through swapped strides.
            let in_slab = left * n;
            let out_slab = left * r;
            for b in 0..right {
                T::gemm(
                    left,
                    n,
                    r,
                    T::one(),
                    src.add(b * in_slab),
                    1,
                    left as isize,
                    a,
                    r as isize,
                    1,
                    T::zero(),
                    dst.add(b * out_slab),
                    1,
                    left as isize,
                );
            }
        }
    }
    Ok(out)
}

/// Tucker operator `t ×_0 ms[0] ×_1 … ×_{d-1} ms[d-1]`.
///
/// Equals `unvec((M_d ⊗ … ⊗ M_1) vec(t))`.
pub fn tucker<T: Scalar>(t: &Tensor<T>, ms: &[Matrix<T>]) -> Result<Tensor<T>> {
    if ms.len() != t.order() {
        return Err(Error::dim(format!(
            "{} factor matrices for an order-{} tensor",
            ms.len(),
            t.order()
        )));
    }
    let mut iter = ms.iter().enumerate();
    let (_, first) = iter.next().expect("order >= 1");
    let mut acc = mode_product(t, first, 0)?;
    for (mu, m) in iter {
        acc = mode_product(&acc, m, mu)?;
    }
    Ok(acc)
}

/// Matrix-free Kronecker-sum action `Σ_μ t ×_μ A_μ`.
pub fn kronsum_action<T: Scalar>(t: &Tensor<T>, k: &KroneckerSum<T>) -> Result<Tensor<T>> {
    if k.order() != t.order() {
        return Err(Error::dim(format!(
            "order-{} Kronecker sum applied to order-{} tensor",
            k.order(),
            t.order()
        )));
    }
    let mut acc: Option<Tensor<T>> = None;
    for (mu, a) in k.factors().iter().enumerate() {
        if a.rows() != t.dims()[mu] {
            return Err(Error::dim_mode(
                mu,
                format!(
                    "factor is {}x{} but the tensor mode has size {}",
                    a.rows(),
                    a.cols(),
                    t.dims()[mu]
                ),
            ));
        }
        let term = mode_product(t, a, mu)?;
        match acc.as_mut() {
            None => acc = Some(term),
            Some(s) => s.axpy(T::one(), &term)?,
        }
    }
    Ok(acc.expect("order >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::kron;
    use crate::testing::{random_matrix, random_tensor, rng};

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn vec_is_column_major() {
        // rows indexed by i_1: [[1,3],[2,4]]
        let t = Tensor::from_matrix(m(&[&[1.0, 3.0], &[2.0, 4.0]]));
        assert_eq!(t.vec(), &[1.0, 2.0, 3.0, 4.0]);
        let back = Tensor::unvec(t.vec().to_vec(), t.dims()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn vec_matches_nested_loops() {
        let mut r = rng(1);
        let t = random_tensor(&mut r, &[2, 3, 4]);
        let mut flat = Vec::new();
        for k in 0..4 {
            for j in 0..3 {
                for i in 0..2 {
                    flat.push(t.get(&[i, j, k]));
                }
            }
        }
        assert_eq!(flat.as_slice(), t.vec());
    }

    #[test]
    fn unvec_rejects_wrong_length() {
        assert!(Tensor::<f64>::unvec(vec![0.0; 5], &[2, 3]).is_err());
        assert!(Tensor::<f64>::new(vec![], vec![]).is_err());
        assert!(Tensor::<f64>::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn mode_product_row_permutation() {
        let t = Tensor::from_matrix(m(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let p = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let out = mode_product(&t, &p, 0).unwrap();
        assert_eq!(out.to_matrix().unwrap(), m(&[&[3.0, 4.0], &[1.0, 2.0]]));
    }

    #[test]
    fn mode_product_identity() {
        let mut r = rng(2);
        let t = random_tensor(&mut r, &[3, 4, 5]);
        for mu in 0..3 {
            let id = Matrix::identity(t.dims()[mu]);
            assert_eq!(mode_product(&t, &id, mu).unwrap(), t);
        }
    }

    #[test]
    fn mode_product_matches_nested_loops() {
        let mut r = rng(3);
        let t = random_tensor(&mut r, &[3, 4, 5]);
        let a = random_matrix(&mut r, 6, 4);
        let out = mode_product(&t, &a, 1).unwrap();
        assert_eq!(out.dims(), &[3, 6, 5]);
        for i1 in 0..3 {
            for i2 in 0..6 {
                for i3 in 0..5 {
                    let mut s = 0.0;
                    for j in 0..4 {
                        s += a[(i2, j)] * t.get(&[i1, j, i3]);
                    }
                    assert!((out.get(&[i1, i2, i3]) - s).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mode_product_reports_offending_mode() {
        let t = Tensor::<f64>::zeros(&[2, 3]);
        let err = mode_product(&t, &Matrix::identity(2), 1).unwrap_err();
        assert!(
            matches!(err, Error::Dimension { mode: Some(1), .. }),
            "{err}"
        );
        assert!(mode_product(&t, &Matrix::identity(2), 2).is_err());
    }

    #[test]
    fn tucker_two_modes_is_sandwich() {
        let mut r = rng(4);
        let v = random_matrix(&mut r, 3, 4);
        let m1 = random_matrix(&mut r, 3, 3);
        let m2 = random_matrix(&mut r, 4, 4);
        let out = tucker(&Tensor::from_matrix(v.clone()), &[m1.clone(), m2.clone()]).unwrap();
        let expected = m1.matmul(&v).unwrap().matmul(&m2.transpose()).unwrap();
        assert!(out.to_matrix().unwrap().rel_diff(&expected) < 1e-14);
    }

    #[test]
    fn tucker_matches_dense_kronecker() {
        let mut r = rng(5);
        let t = random_tensor(&mut r, &[2, 3, 4]);
        let ms: Vec<Matrix> = [2, 3, 4]
            .iter()
            .map(|&n| random_matrix(&mut r, n, n))
            .collect();
        let dense = kron(&kron(&ms[2], &ms[1]), &ms[0]);
        let expected = dense.matvec(t.vec()).unwrap();
        let out = tucker(&t, &ms).unwrap();
        let expected = Tensor::unvec(expected, t.dims()).unwrap();
        assert!(out.rel_diff_fro(&expected) < 1e-13);
    }

    #[test]
    fn kronsum_single_mode_and_zero() {
        let mut r = rng(6);
        let a = random_matrix(&mut r, 5, 5);
        let t = random_tensor(&mut r, &[5]);
        let k = KroneckerSum::new(vec![a.clone()]).unwrap();
        let out = kronsum_action(&t, &k).unwrap();
        let expected = a.matvec(t.vec()).unwrap();
        for (x, y) in out.vec().iter().zip(&expected) {
            assert!((x - y).abs() < 1e-14);
        }

        let zero = KroneckerSum::new(vec![Matrix::zeros(2, 2), Matrix::zeros(3, 3)]).unwrap();
        let t = random_tensor(&mut r, &[2, 3]);
        assert_eq!(kronsum_action(&t, &zero).unwrap(), Tensor::zeros(&[2, 3]));
    }

    #[test]
    fn kronecker_sum_rejects_rectangular_factors() {
        assert!(KroneckerSum::new(vec![Matrix::<f64>::zeros(2, 3)]).is_err());
        assert!(KroneckerSum::<f64>::new(vec![]).is_err());
    }
}
