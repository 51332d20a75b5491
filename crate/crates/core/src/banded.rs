//! Symmetric tridiagonal matrices.
//!
//! Every matrix in the solver (mass, stiffness and the per-step system
//! matrices built from them) is symmetric tridiagonal, so only the diagonal
//! and the superdiagonal are stored. Systems are solved by an `LDLᵀ`
//! factorization without pivoting; a nonpositive pivot is reported as
//! [`Error::NotSpd`].

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    /// Builds a matrix from its diagonal (length `n`) and superdiagonal
    /// (length `n - 1`).
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("tridiagonal matrix must have dimension >= 1"));
        }
        if off.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "superdiagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |_| 1.0, |_| 0.0)
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_| 0.0, |_| 0.0)
    }

    pub(crate) fn from_fn(n: usize, diag: impl Fn(usize) -> f64, off: impl Fn(usize) -> f64) -> Self {
        assert!(n >= 1);
        Self {
            diag: (0..n).map(diag).collect(),
            off: (0..n - 1).map(off).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `self * a + other * b`, entrywise on the band.
    pub fn lin_comb(&self, a: f64, other: &SymTridiag, b: f64) -> Result<Self> {
        if self.n() != other.n() {
            return Err(invalid(format!(
                "dimension mismatch in linear combination: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        let diag = self.diag.iter().zip(&other.diag).map(|(x, y)| a * x + b * y).collect();
        let off = self.off.iter().zip(&other.off).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { diag, off })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|x| a * x).collect(),
            off: self.off.iter().map(|x| a * x).collect(),
        }
    }

    pub(crate) fn add_to_diag(&mut self, i: usize, value: f64) {
        self.diag[i] += value;
    }

    /// Principal submatrix on indices `start..n`.
    pub fn trailing(&self, start: usize) -> Result<Self> {
        if start >= self.n() {
            return Err(invalid(format!(
                "cannot take trailing block from {} of a {}x{} matrix",
                start,
                self.n(),
                self.n()
            )));
        }
        Ok(Self {
            diag: self.diag[start..].to_vec(),
            off: self.off[start..].to_vec(),
        })
    }

    /// `A x` in `O(n)`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if x.len() != n {
            return Err(invalid(format!("matvec: vector length {} != dimension {}", x.len(), n)));
        }
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, xi)| d * xi).collect();
        for (i, o) in self.off.iter().enumerate() {
            y[i] += o * x[i + 1];
            y[i + 1] += o * x[i];
        }
        Ok(y)
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.matvec(x)?;
        Ok(dot(x, &y))
    }

    pub fn factor(&self) -> Result<LdlFactor> {
        LdlFactor::new(self)
    }
}

/// `A = L D Lᵀ` with unit lower bidiagonal `L`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl LdlFactor {
    fn new(a: &SymTridiag) -> Result<Self> {
        let n = a.n();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n - 1);
        d.push(a.diag[0]);
        check_pivot(0, d[0])?;
        for i in 1..n {
            let li = a.off[i - 1] / d[i - 1];
            let di = a.diag[i] - li * a.off[i - 1];
            check_pivot(i, di)?;
            l.push(li);
            d.push(di);
        }
        Ok(Self { d, l })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(invalid(format!("solve: rhs length {} != dimension {}", b.len(), n)));
        }
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        Ok(x)
    }
}

fn check_pivot(index: usize, pivot: f64) -> Result<()> {
    if pivot > 0.0 && pivot.is_finite() {
        Ok(())
    } else {
        Err(Error::NotSpd { index, pivot })
    }
}

/// Factor and solve in one call.
pub fn factor_solve(a: &SymTridiag, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n() {
        return Err(invalid(format!("solve: rhs length {} != dimension {}", b.len(), a.n())));
    }
    a.factor()?.solve(b)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, p);
            b.swap(col, p);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn matvec_examples() {
        let id = SymTridiag::identity(2);
        assert_eq!(id.matvec(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);

        let lap = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        assert_eq!(lap.matvec(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(lap.matvec(&[1.0, 0.0]).unwrap(), vec![2.0, -1.0]);

        assert!(matches!(lap.matvec(&[1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn factor_solve_examples() {
        let id = SymTridiag::identity(2);
        assert_eq!(factor_solve(&id, &[5.0, 7.0]).unwrap(), vec![5.0, 7.0]);

        let lap = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        let x = factor_solve(&lap, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);

        let singular = SymTridiag::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        match factor_solve(&singular, &[1.0, 1.0]) {
            Err(Error::NotSpd { index, pivot }) => {
                assert_eq!(index, 1);
                assert_eq!(pivot, 0.0);
            }
            other => panic!("expected NotSpd, got {other:?}"),
        }
    }

    #[test]
    fn constructor_rejects_bad_lengths() {
        assert!(SymTridiag::new(vec![], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
    }

    fn spd_instance() -> impl Strategy<Value = (SymTridiag, Vec<f64>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                prop::collection::vec(-1.0f64..1.0, n - 1),
                prop::collection::vec(0.1f64..2.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
                .prop_map(move |(off, extra, b)| {
                    // strictly diagonally dominant => SPD
                    let diag = (0..n)
                        .map(|i| {
                            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
                            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
                            left + right + extra[i]
                        })
                        .collect();
                    (SymTridiag::new(diag, off).unwrap(), b)
                })
        })
    }

    proptest! {
        #[test]
        fn solve_then_multiply_recovers_rhs((a, b) in spd_instance()) {
            let x = factor_solve(&a, &b).unwrap();
            let r = a.matvec(&x).unwrap();
            let scale = norm_inf(&b).max(1.0);
            for (ri, bi) in r.iter().zip(&b) {
                prop_assert!((ri - bi).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn agrees_with_dense_elimination((a, b) in spd_instance()) {
            let x = factor_solve(&a, &b).unwrap();
            let y = dense_solve(a.to_dense(), b.clone());
            let scale = norm_inf(&y).max(1e-300);
            for (xi, yi) in x.iter().zip(&y) {
                prop_assert!((xi - yi).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
