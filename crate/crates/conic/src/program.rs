use nalgebra::{DMatrix, DVector, RealField};

use crate::ConicError;

/// One equality row `<a_psd, X> + a_lin·x = rhs`.
#[derive(Debug, Clone)]
pub struct ConstraintRow<T: RealField> {
    pub a_psd: DMatrix<T>,
    pub a_lin: DVector<T>,
    pub rhs: T,
}

/// Conic program in equality standard form, minimisation sense.
#[derive(Debug, Clone)]
pub struct ConicProgram<T: RealField> {
    pub psd_order: usize,
    pub nonneg: usize,
    pub c_psd: DMatrix<T>,
    pub c_lin: DVector<T>,
    pub rows: Vec<ConstraintRow<T>>,
}

impl<T: RealField + Copy> ConicProgram<T> {
    /// Empty program with zero objective and no constraints.
    pub fn new(psd_order: usize, nonneg: usize) -> Self {
        Self {
            psd_order,
            nonneg,
            c_psd: DMatrix::zeros(psd_order, psd_order),
            c_lin: DVector::zeros(nonneg),
            rows: Vec::new(),
        }
    }

    /// Appends a zero row and returns a mutable handle to it.
    pub fn push_row(&mut self, rhs: T) -> &mut ConstraintRow<T> {
        self.rows.push(ConstraintRow {
            a_psd: DMatrix::zeros(self.psd_order, self.psd_order),
            a_lin: DVector::zeros(self.nonneg),
            rhs,
        });
        self.rows.last_mut().expect("row just pushed")
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Evaluates `<C, X> + c·x`.
    pub fn objective(&self, x_psd: &DMatrix<T>, x_lin: &DVector<T>) -> T {
        frobenius_dot(&self.c_psd, x_psd) + self.c_lin.dot(x_lin)
    }

    /// Row activities `<A_i, X> + a_i·x`.
    pub fn activities(&self, x_psd: &DMatrix<T>, x_lin: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|r| frobenius_dot(&r.a_psd, x_psd) + r.a_lin.dot(x_lin)),
        )
    }

    pub(crate) fn validate(&self) -> Result<(), ConicError> {
        if self.psd_order == 0 && self.nonneg == 0 {
            return Err(ConicError::Empty);
        }
        let n = self.psd_order;
        if self.c_psd.shape() != (n, n) || self.c_lin.len() != self.nonneg {
            return Err(ConicError::Shape {
                row: usize::MAX,
                what: "objective has wrong dimensions".into(),
            });
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.a_psd.shape() != (n, n) {
                return Err(ConicError::Shape {
                    row: i,
                    what: format!("psd coefficient is {:?}, expected ({n}, {n})", r.a_psd.shape()),
                });
            }
            if r.a_lin.len() != self.nonneg {
                return Err(ConicError::Shape {
                    row: i,
                    what: format!(
                        "linear coefficient has length {}, expected {}",
                        r.a_lin.len(),
                        self.nonneg
                    ),
                });
            }
        }
        Ok(())
    }
}

/// `Σ_kl A_kl B_kl`; equals `tr(A B)` when either argument is symmetric.
pub(crate) fn frobenius_dot<T: RealField + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
