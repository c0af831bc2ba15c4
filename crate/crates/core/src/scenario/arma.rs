//! ARMA(1,1) error-path simulation and composition with the forecast.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ArmaParams, ForecastSeries};
use crate::CoreError;

/// Simulates `n_paths` error paths of the given horizon.
///
/// The recursion starts from `v_e(0) = 0, xi(0) = 0`; entry `t` of a path is
/// `v_e(t+1)`. Each path draws from its own counter-mode stream derived from
/// (seed, path index), so results do not depend on how paths are distributed
/// over workers, and a fixed seed reproduces bit-identical output.
pub fn simulate_error_paths(
    params: &ArmaParams,
    n_paths: usize,
    horizon: usize,
) -> Result<Vec<Vec<f64>>, CoreError> {
    params.check()?;
    if n_paths == 0 {
        return Err(CoreError::Invalid("need at least one path".into()));
    }
    let normal = if params.sigma > 0.0 {
        Some(Normal::new(0.0, params.sigma).expect("checked sigma"))
    } else {
        None
    };
    let mut paths = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(p as u64);
        let mut path = Vec::with_capacity(horizon);
        let mut prev_error = 0.0;
        let mut prev_noise = 0.0;
        for _ in 0..horizon {
            let noise = match &normal {
                Some(n) => n.sample(&mut rng),
                None => 0.0,
            };
            let err = params.alpha * prev_error + params.beta * prev_noise + noise;
            path.push(err);
            prev_error = err;
            prev_noise = noise;
        }
        paths.push(path);
    }
    Ok(paths)
}

/// Realized speeds plus a record of which entries the zero-clamp touched.
#[derive(Debug, Clone)]
pub struct ComposedSpeeds {
    pub speeds: Vec<Vec<f64>>,
    pub clamped: Vec<Vec<bool>>,
}

/// `v_r(t) = max(0, v_f(t) + v_e(t))` per path and period.
pub fn compose_realized(
    forecast: &ForecastSeries,
    errors: &[Vec<f64>],
) -> Result<ComposedSpeeds, CoreError> {
    let horizon = forecast.speeds.len();
    let mut speeds = Vec::with_capacity(errors.len());
    let mut clamped = Vec::with_capacity(errors.len());
    for (p, err) in errors.iter().enumerate() {
        if err.len() != horizon {
            return Err(CoreError::Invalid(format!(
                "error path {p} has {} entries, forecast has {horizon}",
                err.len()
            )));
        }
        let mut row = Vec::with_capacity(horizon);
        let mut flags = Vec::with_capacity(horizon);
        for (f, e) in forecast.speeds.iter().zip(err) {
            let raw = f + e;
            flags.push(raw < 0.0);
            row.push(raw.max(0.0));
        }
        speeds.push(row);
        clamped.push(flags);
    }
    Ok(ComposedSpeeds { speeds, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_params_give_zero_paths() {
        let p = ArmaParams {
            alpha: 0.0,
            beta: 0.0,
            sigma: 0.0,
            seed: 1,
        };
        let paths = simulate_error_paths(&p, 5, 24).unwrap();
        assert!(paths.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn stationarity_rejected() {
        let p = ArmaParams {
            alpha: 1.0,
            beta: 0.0,
            sigma: 1.0,
            seed: 1,
        };
        assert!(simulate_error_paths(&p, 1, 24).is_err());
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let p = ArmaParams {
            alpha: 0.6,
            beta: 0.2,
            sigma: 1.5,
            seed: 99,
        };
        let a = simulate_error_paths(&p, 16, 24).unwrap();
        let b = simulate_error_paths(&p, 16, 24).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (va, vb) in ra.iter().zip(rb) {
                assert_eq!(va.to_bits(), vb.to_bits());
            }
        }
    }

    #[test]
    fn ar1_stationary_variance() {
        // alpha=0.5, beta=0 -> var = sigma^2/(1-alpha^2) = 4/3
        let p = ArmaParams {
            alpha: 0.5,
            beta: 0.0,
            sigma: 1.0,
            seed: 2024,
        };
        let paths = simulate_error_paths(&p, 10_000, 24).unwrap();
        let last: Vec<f64> = paths.iter().map(|path| path[23]).collect();
        let mean = last.iter().sum::<f64>() / last.len() as f64;
        let var = last.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / last.len() as f64;
        let want = 4.0 / 3.0;
        assert!(
            (var - want).abs() / want < 0.05,
            "sample variance {var} vs {want}"
        );
    }

    #[test]
    fn sample_mean_within_three_standard_errors() {
        let p = ArmaParams {
            alpha: 0.7,
            beta: 0.3,
            sigma: 2.0,
            seed: 7,
        };
        let n = 10_000;
        let paths = simulate_error_paths(&p, n, 24).unwrap();
        for t in 0..24 {
            let vals: Vec<f64> = paths.iter().map(|path| path[t]).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                mean.abs() <= 3.0 * se,
                "t={t}: mean {mean} outside 3 standard errors ({se})"
            );
        }
    }

    #[test]
    fn compose_clamps_and_records() {
        let f = ForecastSeries {
            speeds: vec![3.0, 8.0],
        };
        let errors = vec![vec![-5.0, 1.5]];
        let out = compose_realized(&f, &errors).unwrap();
        assert_eq!(out.speeds[0], vec![0.0, 9.5]);
        assert_eq!(out.clamped[0], vec![true, false]);
    }

    #[test]
    fn compose_rejects_shape_mismatch() {
        let f = ForecastSeries {
            speeds: vec![3.0, 8.0],
        };
        assert!(compose_realized(&f, &[vec![0.0; 3]]).is_err());
    }

    #[test]
    fn zero_errors_reproduce_forecast() {
        let f = ForecastSeries {
            speeds: vec![4.0, 5.0, 6.0],
        };
        let out = compose_realized(&f, &[vec![0.0; 3]]).unwrap();
        assert_eq!(out.speeds[0], f.speeds);
        assert!(out.clamped[0].iter().all(|&c| !c));
    }
}
