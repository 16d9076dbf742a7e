//! Cubic B-spline basis on equidistant interior knots with a difference
//! penalty, the building blocks of the P-spline base-learner.

use nalgebra::DMatrix;

/// B-spline basis of a fixed degree over uniformly spaced knots that extend
/// `degree` steps beyond each boundary (the Eilers-Marx construction, so the
/// difference penalty's null space maps exactly to low-order polynomials in
/// x). Evaluation outside the boundary clamps, which keeps predictions
/// defined for covariate values beyond the training range.
#[derive(Debug, Clone)]
pub struct SplineBasis {
    pub knots: Vec<f64>,
    pub degree: usize,
}

impl SplineBasis {
    /// Equidistant interior knots on the observed range of x.
    pub fn from_data(xs: &[f64], n_interior: usize, degree: usize) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in xs {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if !(hi > lo) {
            hi = lo + 1.0;
        }
        Self::from_range(lo, hi, n_interior, degree)
    }

    pub fn from_range(lo: f64, hi: f64, n_interior: usize, degree: usize) -> Self {
        let h = (hi - lo) / (n_interior + 1) as f64;
        let d = degree as isize;
        let knots: Vec<f64> = (-d..=(n_interior as isize + 1 + d))
            .map(|k| lo + h * k as f64)
            .collect();
        SplineBasis { knots, degree }
    }

    pub fn from_knots(knots: Vec<f64>, degree: usize) -> Self {
        SplineBasis { knots, degree }
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    fn lo(&self) -> f64 {
        self.knots[self.degree]
    }

    fn hi(&self) -> f64 {
        self.knots[self.knots.len() - 1 - self.degree]
    }

    /// Nonzero basis values at x by the Cox-de Boor recursion; returns the
    /// span offset and the degree+1 local values.
    fn eval_local(&self, x: f64) -> (usize, Vec<f64>) {
        let d = self.degree;
        let n = self.n_basis();
        let x = x.clamp(self.lo(), self.hi());
        // Find the knot span [knots[s], knots[s+1]) containing x.
        let mut s = d;
        while s < n - 1 && x >= self.knots[s + 1] {
            s += 1;
        }
        let mut vals = vec![0.0; d + 1];
        vals[0] = 1.0;
        let mut left = vec![0.0; d + 1];
        let mut right = vec![0.0; d + 1];
        for j in 1..=d {
            left[j] = x - self.knots[s + 1 - j];
            right[j] = self.knots[s + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let den = right[r + 1] + left[j - r];
                let term = if den == 0.0 { 0.0 } else { vals[r] / den };
                vals[r] = saved + right[r + 1] * term;
                saved = left[j - r] * term;
            }
            vals[j] = saved;
        }
        (s - d, vals)
    }

    /// One dense design row of length n_basis.
    pub fn eval_row(&self, x: f64) -> Vec<f64> {
        let (offset, vals) = self.eval_local(x);
        let mut row = vec![0.0; self.n_basis()];
        for (j, v) in vals.into_iter().enumerate() {
            row[offset + j] = v;
        }
        row
    }

    /// Dense design matrix for a batch of points.
    pub fn design(&self, xs: &[f64]) -> DMatrix<f64> {
        let m = self.n_basis();
        let mut mat = DMatrix::zeros(xs.len(), m);
        for (i, &x) in xs.iter().enumerate() {
            let (offset, vals) = self.eval_local(x);
            for (j, v) in vals.into_iter().enumerate() {
                mat[(i, offset + j)] = v;
            }
        }
        mat
    }
}

/// Penalty matrix D'D for the difference operator of the given order.
pub fn difference_penalty(n_basis: usize, order: usize) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::identity(n_basis, n_basis);
    for _ in 0..order {
        let rows = d.nrows() - 1;
        let mut next = DMatrix::zeros(rows, n_basis);
        for i in 0..rows {
            for j in 0..n_basis {
                next[(i, j)] = d[(i + 1, j)] - d[(i, j)];
            }
        }
        d = next;
    }
    d.transpose() * d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        let basis = SplineBasis::from_range(0.0, 1.0, 20, 3);
        assert_eq!(basis.n_basis(), 24);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let row = basis.eval_row(x);
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "x={x} sum={sum}");
            assert!(row.iter().all(|&v| v >= -1e-14));
        }
    }

    #[test]
    fn clamps_outside_range() {
        let basis = SplineBasis::from_range(0.0, 1.0, 5, 3);
        assert_eq!(basis.eval_row(-0.5), basis.eval_row(0.0));
        assert_eq!(basis.eval_row(1.5), basis.eval_row(1.0));
    }

    #[test]
    fn reproduces_linear_functions_exactly() {
        // B-splines of degree >= 1 reproduce polynomials of degree 1; the
        // coefficients are the Greville abscissae combinations. Check by
        // least squares instead: the design can fit x exactly.
        let basis = SplineBasis::from_range(0.0, 2.0, 10, 3);
        let xs: Vec<f64> = (0..200).map(|i| i as f64 / 100.0).collect();
        let design = basis.design(&xs);
        let y = nalgebra::DVector::from_iterator(xs.len(), xs.iter().map(|&x| 3.0 * x - 1.0));
        let coef = (design.transpose() * &design)
            .cholesky()
            .map(|ch| ch.solve(&(design.transpose() * &y)));
        let coef = match coef {
            Some(c) => c,
            None => {
                // Add a whisper of ridge if the Gram matrix is near-singular.
                let m = basis.n_basis();
                let gram = design.transpose() * &design + DMatrix::identity(m, m) * 1e-10;
                gram.cholesky().unwrap().solve(&(design.transpose() * &y))
            }
        };
        let fitted = design * coef;
        for (i, &x) in xs.iter().enumerate() {
            assert!((fitted[i] - (3.0 * x - 1.0)).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn penalty_annihilates_linear_coefficients() {
        let p = difference_penalty(6, 2);
        // Second differences of a linear sequence are zero.
        let lin = nalgebra::DVector::from_iterator(6, (0..6).map(|i| 2.0 + 3.0 * i as f64));
        let q = (&p * &lin).norm();
        assert!(q < 1e-12);
        // Quadratic sequences are penalized.
        let quad = nalgebra::DVector::from_iterator(6, (0..6).map(|i| (i * i) as f64));
        assert!((&p * &quad).norm() > 1.0);
    }
}
