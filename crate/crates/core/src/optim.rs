//! Derivative-free minimization with the Nelder-Mead simplex method.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions<T> {
    /// Stop once the spread of function values across the simplex falls below this.
    pub ftol: T,
    /// Cap on simplex iterations, summed over restarts.
    pub max_iter: usize,
    /// Relative size of the initial simplex: vertex `i` moves coordinate `i`
    /// by `step * max(1, |x0_i|)`.
    pub step: T,
    /// Number of times the simplex is rebuilt around the incumbent after
    /// converging. Guards against premature collapse in narrow valleys.
    pub restarts: usize,
}

impl<T: Scalar> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        NelderMeadOptions {
            ftol: T::lit(1e-10),
            max_iter: 20_000,
            step: T::lit(0.1),
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Counter<F> {
    f: F,
    evaluations: usize,
}

impl<F> Counter<F> {
    fn eval<T: Scalar>(&mut self, x: &[T]) -> Result<T>
    where
        F: FnMut(&[T]) -> T,
    {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            return Err(Error::NanObjective {
                point: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        Ok(v)
    }
}

/// Minimizes `objective` from `x0` with reflection 1, expansion 2, contraction
/// 0.5 and shrink 0.5.
///
/// Infinite objective values are allowed (they reject a trial point) but NaN
/// aborts with the offending point.
pub fn nelder_mead_minimize<T, F>(
    objective: F,
    x0: &[T],
    opts: &NelderMeadOptions<T>,
) -> Result<Minimum<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    if x0.is_empty() {
        return Err(Error::InvalidParameter("empty starting point".into()));
    }
    let mut counter = Counter {
        f: objective,
        evaluations: 0,
    };
    let f0 = counter.eval(x0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "objective not finite at the starting point ({f0})"
        )));
    }

    let mut best = x0.to_vec();
    let mut best_value = f0;
    let mut iterations = 0usize;
    for round in 0..=opts.restarts {
        let (x, fx, used, converged) = run_simplex(&mut counter, &best, opts, opts.max_iter - iterations)?;
        iterations += used;
        let improvement = best_value - fx;
        if fx <= best_value {
            best = x;
            best_value = fx;
        }
        if !converged {
            return Err(Error::NotConverged {
                iterations,
                best: best.iter().map(|v| v.as_f64()).collect(),
                value: best_value.as_f64(),
            });
        }
        if round > 0 && improvement < opts.ftol {
            break;
        }
    }
    Ok(Minimum {
        x: best,
        value: best_value,
        iterations,
        evaluations: counter.evaluations,
    })
}

fn run_simplex<T, F>(
    counter: &mut Counter<F>,
    start: &[T],
    opts: &NelderMeadOptions<T>,
    budget: usize,
) -> Result<(Vec<T>, T, usize, bool)>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let n = start.len();
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] = v[i] + opts.step * v[i].abs().max(T::one());
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &simplex {
        values.push(counter.eval(v)?);
    }

    let reflect = T::lit(REFLECT);
    let expand = T::lit(EXPAND);
    let contract = T::lit(CONTRACT);
    let shrink = T::lit(SHRINK);

    let mut order: Vec<usize> = (0..=n).collect();
    let mut iter = 0;
    loop {
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN"));
        let (ib, iw, isw) = (order[0], order[n], order[n - 1]);
        let spread = values[iw] - values[ib];
        if spread < opts.ftol || (spread.is_nan() && values[iw] == values[ib]) {
            return Ok((simplex[ib].clone(), values[ib], iter, true));
        }
        if iter >= budget {
            return Ok((simplex[ib].clone(), values[ib], iter, false));
        }
        iter += 1;

        let mut centroid = vec![T::zero(); n];
        for &k in &order[..n] {
            for (c, &x) in centroid.iter_mut().zip(&simplex[k]) {
                *c = *c + x;
            }
        }
        let nf = T::from_count(n);
        centroid.iter_mut().for_each(|c| *c = *c / nf);

        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[iw])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let xr = along(reflect);
        let fr = counter.eval(&xr)?;
        if fr < values[ib] {
            let xe = along(reflect * expand);
            let fe = counter.eval(&xe)?;
            if fe < fr {
                simplex[iw] = xe;
                values[iw] = fe;
            } else {
                simplex[iw] = xr;
                values[iw] = fr;
            }
            continue;
        }
        if fr < values[isw] {
            simplex[iw] = xr;
            values[iw] = fr;
            continue;
        }
        if fr < values[iw] {
            let xc = along(reflect * contract);
            let fc = counter.eval(&xc)?;
            if fc <= fr {
                simplex[iw] = xc;
                values[iw] = fc;
                continue;
            }
        } else {
            let xc = along(-contract);
            let fc = counter.eval(&xc)?;
            if fc < values[iw] {
                simplex[iw] = xc;
                values[iw] = fc;
                continue;
            }
        }
        let xb = simplex[ib].clone();
        for &k in &order[1..] {
            let v: Vec<T> = xb
                .iter()
                .zip(&simplex[k])
                .map(|(&b, &x)| b + shrink * (x - b))
                .collect();
            values[k] = counter.eval(&v)?;
            simplex[k] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_parabola() {
        let m = nelder_mead_minimize(
            |x: &[f64]| (x[0] - 2.0).powi(2),
            &[0.0],
            &NelderMeadOptions::default(),
        )
        .unwrap();
        assert!(m.value < 1e-10);
        assert!((m.x[0] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_minimize(rosen, &[-1.2, 1.0], &NelderMeadOptions::default()).unwrap();
        assert!(m.value < 1e-10, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn works_in_single_precision() {
        let opts = NelderMeadOptions {
            ftol: 1e-6f32,
            ..Default::default()
        };
        let m = nelder_mead_minimize(|x: &[f32]| (x[0] + 1.0).powi(2) + x[1] * x[1], &[3.0, 3.0], &opts)
            .unwrap();
        assert!((m.x[0] + 1.0).abs() < 1e-2);
    }

    #[test]
    fn nan_reports_point() {
        let err = nelder_mead_minimize(
            |x: &[f64]| if x[0] > 0.05 { f64::NAN } else { x[0] * x[0] },
            &[0.0],
            &NelderMeadOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::NanObjective { point } => assert!(point[0] > 0.05),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_cap_returns_best() {
        let opts = NelderMeadOptions {
            max_iter: 5,
            ..Default::default()
        };
        let err = nelder_mead_minimize(
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 5, .. }));
    }

    #[test]
    fn infinite_values_are_rejected_not_fatal() {
        let m = nelder_mead_minimize(
            |x: &[f64]| if x[0] < 1.0 { f64::INFINITY } else { (x[0] - 3.0).powi(2) },
            &[1.5],
            &NelderMeadOptions::default(),
        )
        .unwrap();
        assert!((m.x[0] - 3.0).abs() < 1e-4);
    }
}
