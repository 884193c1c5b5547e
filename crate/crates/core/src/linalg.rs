//! Blocked LU factorization with partial pivoting, used by the Padé solve in
//! [`expm`](crate::matfun::expm).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const BLOCK: usize = 64;

/// `P A = L U` with unit-lower `L`, stored in place.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar> {
    lu: Matrix<T>,
    /// Row `j` was swapped with row `piv[j]` at step `j`.
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(mut a: Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut piv = vec![0; n];
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            let kend = k0 + kb;
            // Unblocked panel factorization, rows k0..n, columns k0..kend.
            for j in k0..kend {
                let mut p = j;
                let mut best = a[(j, j)].modulus();
                for i in j + 1..n {
                    let v = a[(i, j)].modulus();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                piv[j] = p;
                if best == 0.0 || !best.is_finite() {
                    return Err(Error::Numerical(format!(
                        "singular matrix in LU (column {j})"
                    )));
                }
                if p != j {
                    swap_rows(&mut a, j, p);
                }
                let inv = T::one() / a[(j, j)];
                for i in j + 1..n {
                    a[(i, j)] *= inv;
                }
                for c in j + 1..kend {
                    let x = a[(j, c)];
                    if x == T::zero() {
                        continue;
                    }
                    for i in j + 1..n {
                        let l = a[(i, j)];
                        a[(i, c)] -= l * x;
                    }
                }
            }
            if kend < n {
                // U12 = L11^{-1} A12
                for c in kend..n {
                    for j in k0..kend {
                        let x = a[(j, c)];
                        if x == T::zero() {
                            continue;
                        }
                        for i in j + 1..kend {
                            let l = a[(i, j)];
                            a[(i, c)] -= l * x;
                        }
                    }
                }
                // A22 -= L21 U12
                let m = n - kend;
                let lda = n as isize;
                let base = a.data_mut().as_mut_ptr();
                unsafe {
                    T::gemm(
                        m,
                        kb,
                        m,
                        -T::one(),
                        base.add(kend + n * k0),
                        1,
                        lda,
                        base.add(k0 + n * kend),
                        1,
                        lda,
                        T::one(),
                        base.add(kend + n * kend),
                        1,
                        lda,
                    );
                }
            }
            k0 = kend;
        }
        Ok(Self { lu: a, piv })
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve(&self, mut b: Matrix<T>) -> Result<Matrix<T>> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::dim(format!(
                "right-hand side has {} rows, system has {n}",
                b.rows()
            )));
        }
        let nrhs = b.cols();
        for (j, &p) in self.piv.iter().enumerate() {
            if p != j {
                swap_rows(&mut b, j, p);
            }
        }
        let a = &self.lu;
        let lda = n as isize;
        let ldb = n as isize;

        // Forward substitution with unit-lower L.
        let mut k0 = 0;
        while k0 < n {
            let kend = (k0 + BLOCK).min(n);
            for c in 0..nrhs {
                for j in k0..kend {
                    let x = b[(j, c)];
                    if x == T::zero() {
                        continue;
                    }
                    for i in j + 1..kend {
                        b[(i, c)] -= a[(i, j)] * x;
                    }
                }
            }
            if kend < n {
                let pa = a.data().as_ptr();
                let pb = b.data_mut().as_mut_ptr();
                unsafe {
                    T::gemm(
                        n - kend,
                        kend - k0,
                        nrhs,
                        -T::one(),
                        pa.add(kend + n * k0),
                        1,
                        lda,
                        pb.add(k0),
                        1,
                        ldb,
                        T::one(),
                        pb.add(kend),
                        1,
                        ldb,
                    );
                }
            }
            k0 = kend;
        }

        // Back substitution with U, block rows from the bottom.
        let mut kend = n;
        while kend > 0 {
            let k0 = kend.saturating_sub(BLOCK);
            for c in 0..nrhs {
                for j in (k0..kend).rev() {
                    let x = b[(j, c)] / a[(j, j)];
                    b[(j, c)] = x;
                    if x == T::zero() {
                        continue;
                    }
                    for i in k0..j {
                        b[(i, c)] -= a[(i, j)] * x;
                    }
                }
            }
            if k0 > 0 {
                let pa = a.data().as_ptr();
                let pb = b.data_mut().as_mut_ptr();
                unsafe {
                    T::gemm(
                        k0,
                        kend - k0,
                        nrhs,
                        -T::one(),
                        pa.add(n * k0),
                        1,
                        lda,
                        pb.add(k0),
                        1,
                        ldb,
                        T::one(),
                        pb,
                        1,
                        ldb,
                    );
                }
            }
            kend = k0;
        }
        Ok(b)
    }
}

/// Solves `A X = B`.
pub fn solve<T: Scalar>(a: Matrix<T>, b: Matrix<T>) -> Result<Matrix<T>> {
    Lu::factor(a)?.solve(b)
}

fn swap_rows<T: Scalar>(m: &mut Matrix<T>, r1: usize, r2: usize) {
    let rows = m.rows();
    let data = m.data_mut();
    for c in 0..data.len() / rows {
        data.swap(r1 + rows * c, r2 + rows * c);
    }
}
