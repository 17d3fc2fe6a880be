//! Derivative-free minimizers behind a single entry point: Powell's COBYLA
//! (via the `cobyla` crate) and a hand-rolled Nelder-Mead simplex.
//!
//! Both count objective evaluations against the same budget and clamp
//! iterates to box bounds, so backends can be swapped in configuration
//! without touching callers.

use std::cell::RefCell;

use cobyla::{FailStatus, RhoBeg, StopTols};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which minimizer drives the variational loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Cobyla,
    NelderMead,
}

/// Minimize `f` from `x0` inside `bounds` with at most `max_evals`
/// objective calls. `rho_beg` sizes the first trust region or simplex;
/// `rho_end` is the step resolution below which the search stops (pass 0
/// to disable). Returns the best point and value seen.
#[allow(clippy::too_many_arguments)]
pub fn minimize(
    kind: OptimizerKind,
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
    tol: f64,
    rho_beg: f64,
    rho_end: f64,
) -> Result<(Vec<f64>, f64)> {
    if x0.len() != bounds.len() {
        return Err(Error::Dimension(format!(
            "{} initial parameters but {} bounds",
            x0.len(),
            bounds.len()
        )));
    }
    if max_evals == 0 {
        return Err(Error::Optimize("evaluation budget is zero".into()));
    }
    match kind {
        OptimizerKind::Cobyla => minimize_cobyla(f, x0, bounds, max_evals, tol, rho_beg, rho_end),
        OptimizerKind::NelderMead => {
            minimize_nelder_mead(f, x0, bounds, max_evals, tol, rho_beg, rho_end)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn minimize_cobyla(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
    tol: f64,
    rho_beg: f64,
    rho_end: f64,
) -> Result<(Vec<f64>, f64)> {
    let cell = RefCell::new(f);
    let objective = |x: &[f64], _: &mut ()| (cell.borrow_mut())(x);
    let cons: &[fn(&[f64], &mut ()) -> f64] = &[];
    let stop = StopTols {
        ftol_rel: 0.0,
        ftol_abs: tol,
        xtol_rel: 0.0,
        xtol_abs: if rho_end > 0.0 {
            vec![rho_end; x0.len()]
        } else {
            vec![]
        },
    };
    match cobyla::minimize(
        objective,
        x0,
        bounds,
        cons,
        (),
        max_evals,
        RhoBeg::All(rho_beg),
        Some(stop),
    ) {
        Ok((_, x, e)) => Ok((x, e)),
        // roundoff-limited still hands back the best point found
        Err((FailStatus::RoundoffLimited, x, e)) => Ok((x, e)),
        Err((status, _, _)) => Err(Error::Optimize(format!(
            "cobyla terminated with {status:?}"
        ))),
    }
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

#[allow(clippy::too_many_arguments)]
fn minimize_nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
    tol: f64,
    rho_beg: f64,
    rho_end: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    // initial simplex: x0 plus one step along each axis
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut base = x0.to_vec();
    clamp(&mut base, bounds);
    let fb = eval(&base, &mut evals);
    simplex.push((base.clone(), fb));
    for i in 0..n {
        let mut v = base.clone();
        let (lo, hi) = bounds[i];
        // step inward when the outward step would leave the box
        v[i] = if v[i] + rho_beg <= hi {
            v[i] + rho_beg
        } else {
            (v[i] - rho_beg).max(lo)
        };
        if evals >= max_evals {
            break;
        }
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }
    while simplex.len() < n + 1 {
        simplex.push(simplex[0].clone());
    }

    let (alpha, gamma, beta, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= tol {
            break;
        }
        if rho_end > 0.0 {
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(v, _)| {
                    v.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                })
                .fold(0.0f64, f64::max);
            if diameter <= rho_end {
                break;
            }
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        clamp(&mut reflected, bounds);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            if evals < max_evals {
                let mut expanded: Vec<f64> = centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + gamma * (c - w))
                    .collect();
                clamp(&mut expanded, bounds);
                let fe = eval(&expanded, &mut evals);
                simplex[n] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else {
                simplex[n] = (reflected, fr);
            }
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (toward, f_toward) = if fr < worst.1 {
                (&reflected, fr)
            } else {
                (&worst.0, worst.1)
            };
            if evals >= max_evals {
                break;
            }
            let mut contracted: Vec<f64> = centroid
                .iter()
                .zip(toward)
                .map(|(c, t)| c + beta * (t - c))
                .collect();
            clamp(&mut contracted, bounds);
            let fc = eval(&contracted, &mut evals);
            if fc < f_toward {
                simplex[n] = (contracted, fc);
            } else {
                // shrink everything toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (x, b) in entry.0.iter_mut().zip(&best) {
                        *x = b + sigma * (*x - b);
                    }
                    if evals >= max_evals {
                        break;
                    }
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (best, fbest) = simplex.swap_remove(0);
    Ok((best, fbest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(center: Vec<f64>) -> impl FnMut(&[f64]) -> f64 {
        move |x: &[f64]| {
            x.iter()
                .zip(&center)
                .map(|(v, c)| (v - c) * (v - c))
                .sum()
        }
    }

    #[test]
    fn both_backends_solve_a_quadratic() {
        for kind in [OptimizerKind::Cobyla, OptimizerKind::NelderMead] {
            let mut f = quadratic(vec![0.7, -1.2, 0.3]);
            let bounds = vec![(-5.0, 5.0); 3];
            let (x, e) = minimize(kind, &mut f, &[0.0; 3], &bounds, 2000, 1e-12, 0.5, 1e-9).unwrap();
            assert!(e < 1e-6, "{kind:?}: e = {e}");
            assert!((x[0] - 0.7).abs() < 1e-3, "{kind:?}: x = {x:?}");
        }
    }

    #[test]
    fn bounds_are_respected() {
        for kind in [OptimizerKind::Cobyla, OptimizerKind::NelderMead] {
            let mut f = |x: &[f64]| x[0];
            let bounds = vec![(-1.0, 1.0)];
            let (x, e) = minimize(kind, &mut f, &[0.5], &bounds, 500, 1e-10, 0.5, 1e-8).unwrap();
            assert!(x[0] >= -1.0 - 1e-9, "{kind:?}: x = {x:?}");
            assert!((-1.0 - 1e-9..-0.9).contains(&e), "{kind:?}: e = {e}");
        }
    }

    #[test]
    fn budget_limits_evaluations() {
        for kind in [OptimizerKind::Cobyla, OptimizerKind::NelderMead] {
            let mut calls = 0usize;
            let mut f = |x: &[f64]| {
                calls += 1;
                x.iter().map(|v| v * v).sum()
            };
            let bounds = vec![(-2.0, 2.0); 4];
            minimize(kind, &mut f, &[1.0; 4], &bounds, 25, 0.0, 0.3, 0.0).unwrap();
            assert!(calls <= 26, "{kind:?}: {calls} calls");
        }
    }

    #[test]
    fn zero_budget_rejected() {
        let mut f = |_: &[f64]| 0.0;
        assert!(minimize(
            OptimizerKind::Cobyla,
            &mut f,
            &[0.0],
            &[(-1.0, 1.0)],
            0,
            1e-4,
            0.5,
            0.0
        )
        .is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut f = |_: &[f64]| 0.0;
        assert!(minimize(
            OptimizerKind::NelderMead,
            &mut f,
            &[0.0, 0.0],
            &[(-1.0, 1.0)],
            10,
            1e-4,
            0.5,
            0.0
        )
        .is_err());
    }
}
