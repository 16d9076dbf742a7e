//! Prediction from a fitted model: parameter surfaces on new covariates and
//! the derived survival/dependence quantities.

use super::*;
use crate::spline::SplineBasis;
use crate::U_EPS;

/// Per-observation predictions: link- and natural-scale parameters,
/// dependence measures, and survival evaluated at the query times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub surface: ParameterSurface,
    pub theta: [Vec<f64>; N_PARAMS],
    pub kendall_tau: Vec<f64>,
    pub psi_lower: Vec<f64>,
    pub psi_upper: Vec<f64>,
    /// Cross-ratio evaluated at each observation's fitted survival levels.
    pub cross_ratio: Vec<f64>,
    pub times: Vec<f64>,
    /// surv1[t][i] = S1(times[t]) for observation i; likewise surv2.
    pub surv1: Vec<Vec<f64>>,
    pub surv2: Vec<Vec<f64>>,
    /// joint[a][b][i] = S(times[a], times[b]) for observation i.
    pub joint: Vec<Vec<Vec<f64>>>,
}

/// Link-scale predictors for every observation of `data`, evaluated from the
/// accumulated coefficients with the training centering constants.
pub fn predict_surface(
    model: &FittedModel,
    data: &BivariateSurvDataset,
) -> Result<ParameterSurface> {
    // Covariates are matched by name; order may differ from training.
    let col_map: Vec<usize> = model
        .covariate_names
        .iter()
        .map(|name| {
            data.covariate_index(name).ok_or_else(|| {
                Error::SchemaMismatch(format!("prediction data lacks covariate '{name}'"))
            })
        })
        .collect::<Result<_>>()?;

    let n = data.n();
    let mut eta: [Vec<f64>; N_PARAMS] =
        std::array::from_fn(|k| vec![model.params[k].offset; n]);

    for k in 0..N_PARAMS {
        let formula = &model.spec.formulas[k];
        for (id, coef) in &model.params[k].coef {
            match coef {
                Coefficients::Constant(c) => {
                    eta[k].iter_mut().for_each(|e| *e += c);
                }
                Coefficients::Slope(b) => {
                    let col = formula.covariates[id - 1];
                    let src = &data.columns[col_map[col]];
                    let mean = model.col_means[col];
                    for i in 0..n {
                        eta[k][i] += b * (src[i] - mean);
                    }
                }
                Coefficients::Spline(v) => {
                    if v.is_empty() {
                        continue;
                    }
                    let col = formula.covariates[id - 1];
                    let knots = model
                        .spline_knots
                        .iter()
                        .find(|(c, _)| *c == col)
                        .map(|(_, k)| k.clone())
                        .ok_or_else(|| {
                            Error::SchemaMismatch(format!(
                                "model lacks spline knots for column {col}"
                            ))
                        })?;
                    let basis = SplineBasis::from_knots(knots, model.spec.pspline.degree);
                    let src = &data.columns[col_map[col]];
                    let mean = model.col_means[col];
                    for i in 0..n {
                        let row = basis.eval_row(src[i] - mean);
                        let mut s = 0.0;
                        for (j, &b) in row.iter().enumerate() {
                            s += b * v[j];
                        }
                        eta[k][i] += s;
                    }
                }
            }
        }
    }
    Ok(ParameterSurface { eta })
}

/// Full prediction output including survival curves at the query times.
pub fn predict(
    model: &FittedModel,
    data: &BivariateSurvDataset,
    times: &[f64],
) -> Result<Prediction> {
    if let Some(&t) = times.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Domain(format!("query times must be positive, got {t}")));
    }
    let surface = predict_surface(model, data)?;
    let n = data.n();
    let m1 = model.spec.margin1;
    let m2 = model.spec.margin2;
    let dep = &model.spec.dependence;

    let mut theta: [Vec<f64>; N_PARAMS] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..n {
        let row = surface.theta_row(i, m1, m2, dep);
        for k in 0..N_PARAMS {
            theta[k][i] = row[k];
        }
    }

    let mut kendall_tau = vec![0.0; n];
    let mut psi_lower = vec![0.0; n];
    let mut psi_upper = vec![0.0; n];
    let mut cross_ratio = vec![1.0; n];
    if let Dependence::Copula(fam) = dep {
        for i in 0..n {
            let th = theta[4][i];
            kendall_tau[i] = fam.kendall_tau(th)?;
            let (lo, up) = fam.tail_dependence(th)?;
            psi_lower[i] = lo;
            psi_upper[i] = up;
            let p1 = m1.response(surface.eta[0][i], surface.eta[1][i]);
            let p2 = m2.response(surface.eta[2][i], surface.eta[3][i]);
            let u1 = m1.survival(data.times1[i], &p1)?.clamp(U_EPS, 1.0 - U_EPS);
            let u2 = m2.survival(data.times2[i], &p2)?.clamp(U_EPS, 1.0 - U_EPS);
            cross_ratio[i] = fam.cross_ratio(u1, u2, th)?;
        }
    }

    let mut surv1 = vec![vec![0.0; n]; times.len()];
    let mut surv2 = vec![vec![0.0; n]; times.len()];
    for (t_idx, &t) in times.iter().enumerate() {
        for i in 0..n {
            let p1 = m1.response(surface.eta[0][i], surface.eta[1][i]);
            let p2 = m2.response(surface.eta[2][i], surface.eta[3][i]);
            surv1[t_idx][i] = m1.survival(t, &p1)?;
            surv2[t_idx][i] = m2.survival(t, &p2)?;
        }
    }

    let mut joint = vec![vec![vec![0.0; n]; times.len()]; times.len()];
    for a in 0..times.len() {
        for b in 0..times.len() {
            for i in 0..n {
                let s1 = surv1[a][i];
                let s2 = surv2[b][i];
                joint[a][b][i] = match dep {
                    Dependence::Independence => s1 * s2,
                    Dependence::Copula(fam) => fam.cdf(s1, s2, theta[4][i])?,
                };
            }
        }
    }

    Ok(Prediction {
        surface,
        theta,
        kendall_tau,
        psi_lower,
        psi_upper,
        cross_ratio,
        times: times.to_vec(),
        surv1,
        surv2,
        joint,
    })
}
