//! Pipeline physics coefficients.

use super::{PhysicalConstants, Pipeline};

/// Cubic metres per MSm3; bridges the dimensioned pipeline-volume constants
/// to the canonical gas unit.
const M3_PER_MSM3: f64 = 1e6;

/// Weymouth constant of a pipeline: flow (MSm3/h) supported per bar of the
/// root-mean-square pressure drop,
/// `sqrt(0.617 D^5 / (L F R T Z rho^2))`.
pub fn compute_cont(pipe: &Pipeline, k: &PhysicalConstants) -> f64 {
    let num = 0.617 * pipe.diameter.powi(5);
    let den = pipe.length
        * k.friction
        * k.gas_constant
        * k.temperature
        * k.compressibility
        * k.rho
        * k.rho;
    (num / den).sqrt()
}

/// Linepack per bar of average pressure: `0.78 D^2 L / (rho R T Z)`,
/// normalized from m3 to MSm3. Multiplying by the pipeline's average
/// pressure gives the stored gas mass in MSm3.
pub fn linepack_coefficient(pipe: &Pipeline, k: &PhysicalConstants) -> f64 {
    0.78 * pipe.diameter * pipe.diameter * pipe.length
        / (k.rho * k.gas_constant * k.temperature * k.compressibility)
        / M3_PER_MSM3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants {
            rho: 0.7156,
            friction: 0.01,
            gas_constant: 0.0577,
            temperature: 281.15,
            compressibility: 0.8,
        }
    }

    fn pipe(diameter: f64, length: f64) -> Pipeline {
        Pipeline {
            from: "a".into(),
            to: "b".into(),
            diameter,
            length,
        }
    }

    #[test]
    fn cont_matches_direct_evaluation() {
        // independent scalar evaluation of the formula at fixture constants
        let k = consts();
        let p = pipe(0.6, 5e4);
        let expected = {
            let num: f64 = 0.617 * 0.6f64.powi(5);
            let den: f64 = 5e4 * 0.01 * 0.0577 * 281.15 * 0.8 * 0.7156 * 0.7156;
            (num / den).sqrt()
        };
        assert!((compute_cont(&p, &k) - expected).abs() < 1e-15);
        assert!((expected - 3.7998e-3).abs() < 1e-6, "{expected}");
    }

    #[test]
    fn cont_scales_with_diameter_and_length() {
        let k = consts();
        let base = compute_cont(&pipe(0.6, 5e4), &k);
        // doubling D multiplies by 2^(5/2)
        let doubled = compute_cont(&pipe(1.2, 5e4), &k);
        assert!((doubled / base - 2f64.powf(2.5)).abs() < 1e-12);
        // quadrupling L halves
        let longer = compute_cont(&pipe(0.6, 2e5), &k);
        assert!((longer / base - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linepack_coefficient_value() {
        let k = consts();
        let p = pipe(0.6, 5e4);
        let expected = 0.78 * 0.36 * 5e4 / (0.7156 * 0.0577 * 281.15 * 0.8) / 1e6;
        assert!((linepack_coefficient(&p, &k) - expected).abs() < 1e-18);
    }
}
