//! Cubic-ramp power curve.

use crate::network::WindFarm;

/// Maps windspeed (m/s) to output (GW): zero below cut-in and at or above
/// cut-out, rated capacity between rated speed and cut-out, cubic
/// interpolation `capacity (v^3 - v_ci^3) / (v_r^3 - v_ci^3)` in between.
pub fn speed_to_power(farm: &WindFarm, speed: f64) -> f64 {
    if speed < farm.v_cut_in || speed >= farm.v_cut_out {
        0.0
    } else if speed >= farm.v_rated {
        farm.capacity
    } else {
        let v3 = speed.powi(3);
        let ci3 = farm.v_cut_in.powi(3);
        let r3 = farm.v_rated.powi(3);
        farm.capacity * (v3 - ci3) / (r3 - ci3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn farm() -> WindFarm {
        WindFarm {
            id: "w".into(),
            bus: "b".into(),
            capacity: 0.8,
            curtailment_cost: 0.01,
            v_cut_in: 3.0,
            v_rated: 12.0,
            v_cut_out: 25.0,
        }
    }

    #[test]
    fn curve_anchors() {
        let f = farm();
        assert_eq!(speed_to_power(&f, 0.0), 0.0);
        assert_eq!(speed_to_power(&f, 2.99), 0.0);
        assert_eq!(speed_to_power(&f, 12.0), 0.8);
        assert_eq!(speed_to_power(&f, 20.0), 0.8);
        assert_eq!(speed_to_power(&f, 25.0), 0.0);
        assert_eq!(speed_to_power(&f, 26.0), 0.0);
        // cubic midpoint check
        let v: f64 = 8.0;
        let want = 0.8 * (v.powi(3) - 27.0) / (12.0f64.powi(3) - 27.0);
        assert!((speed_to_power(&f, v) - want).abs() < 1e-15);
    }

    #[test]
    fn monotone_and_bounded_below_cut_out() {
        let f = farm();
        let mut prev = 0.0;
        let mut v = 0.0;
        while v < f.v_cut_out {
            let p = speed_to_power(&f, v);
            assert!(p >= prev - 1e-12, "not monotone at {v}");
            assert!(p <= f.capacity + 1e-12);
            prev = p;
            v += 0.01;
        }
    }
}
