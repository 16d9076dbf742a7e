//! Small derivative-free optimizers for offset estimation: golden-section
//! search in one dimension and Nelder-Mead in two.

use crate::error::{Error, Result};

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` on [a, b]; returns (argmin, min). Objective values of +inf
/// are allowed (treated as very bad), NaN is an error.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut lo = a.min(b);
    let mut hi = a.max(b);
    let mut x1 = hi - INV_GOLDEN * (hi - lo);
    let mut x2 = lo + INV_GOLDEN * (hi - lo);
    let mut f1 = checked(&f, x1)?;
    let mut f2 = checked(&f, x2)?;
    for _ in 0..400 {
        if hi - lo < tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLDEN * (hi - lo);
            f1 = checked(&f, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLDEN * (hi - lo);
            f2 = checked(&f, x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, checked(&f, x)?))
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        return Err(Error::Numeric(format!("objective returned NaN at {x}")));
    }
    Ok(v)
}

/// Nelder-Mead in two dimensions with standard (1, 2, 0.5, 0.5) coefficients.
/// Converges when the simplex function spread drops below `ftol`.
pub fn nelder_mead_2d<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<([f64; 2], f64)> {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = [0.0; 3];
    for i in 0..3 {
        values[i] = checked2(&f, simplex[i])?;
    }
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (best, mid, worst) = (order[0], order[1], order[2]);
        if (values[worst] - values[best]).abs() <= ftol * (1.0 + values[best].abs())
            && values[worst].is_finite()
        {
            return Ok((simplex[best], values[best]));
        }
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let reflect = |t: f64| {
            [
                centroid[0] + t * (centroid[0] - simplex[worst][0]),
                centroid[1] + t * (centroid[1] - simplex[worst][1]),
            ]
        };
        let xr = reflect(1.0);
        let fr = checked2(&f, xr)?;
        if fr < values[best] {
            let xe = reflect(2.0);
            let fe = checked2(&f, xe)?;
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let xc = reflect(-0.5);
            let fc = checked2(&f, xc)?;
            if fc < values[worst] {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in [mid, worst] {
                    simplex[i] = [
                        0.5 * (simplex[i][0] + simplex[best][0]),
                        0.5 * (simplex[i][1] + simplex[best][1]),
                    ];
                    values[i] = checked2(&f, simplex[i])?;
                }
            }
        }
    }
    Err(Error::NonConvergence(
        "Nelder-Mead exceeded the iteration budget".into(),
    ))
}

fn checked2<F: Fn([f64; 2]) -> f64>(f: &F, x: [f64; 2]) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        return Err(Error::Numeric(format!(
            "objective returned NaN at ({}, {})",
            x[0], x[1]
        )));
    }
    Ok(v)
}

/// Bisection for a root of `f` on [lo, hi]; requires a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let mut lo = lo;
    let mut hi = hi;
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a root"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_section(|x| (x - 1.3).powi(2), -10.0, 10.0, 1e-10).unwrap();
        assert!((x - 1.3).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_rosenbrock_like() {
        let f = |p: [f64; 2]| (p[0] - 2.0).powi(2) + 3.0 * (p[1] + 1.0).powi(2);
        let (x, v) = nelder_mead_2d(f, [0.0, 0.0], 0.5, 1e-12, 2000).unwrap();
        assert!(v < 1e-10);
        assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }
}
