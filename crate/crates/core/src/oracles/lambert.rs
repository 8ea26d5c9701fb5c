//! Lower real branch of the Lambert W function.

use super::OracleError;

const INV_E: f64 = 0.367_879_441_171_442_33;
const TOLERANCE: f64 = 1e-12;

/// `W_{-1}(x)` for `x` in `[-1/e, 0)`: the solution `w <= -1` of `w e^w = x`.
///
/// Starts from the branch-point series near `-1/e` or the asymptotic expansion near 0,
/// then refines with Halley steps until `|w e^w - x| < 1e-12`.
pub fn lambert_w_minus1(x: f64) -> Result<f64, OracleError> {
    if !(x >= -INV_E - 1e-15 && x < 0.0) {
        return Err(OracleError::LambertDomain(x));
    }
    if x <= -INV_E {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = -(2.0 * (1.0 + std::f64::consts::E * x)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() < TOLERANCE {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).min(-1.0);
        if next == w {
            break;
        }
        w = next;
    }
    let residual = w * w.exp() - x;
    if residual.abs() < TOLERANCE {
        Ok(w)
    } else {
        Err(OracleError::NoConvergence { x, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_identity() {
        for &x in &[-INV_E + 1e-9, -0.35, -0.3, -0.2, -0.1637, -0.05, -1e-3, -1e-10, -1e-200] {
            let w = lambert_w_minus1(x).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - x).abs() < 1e-12, "x={x} w={w}");
        }
    }

    #[test]
    fn known_values() {
        // W_{-1}(-ln 2 / 2) = -ln 4
        let w = lambert_w_minus1(-std::f64::consts::LN_2 / 2.0).unwrap();
        assert!((w + 4f64.ln()).abs() < 1e-10);
        assert_eq!(lambert_w_minus1(-INV_E).unwrap(), -1.0);
    }

    #[test]
    fn rejects_outside_branch() {
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(0.1).is_err());
        assert!(lambert_w_minus1(-0.4).is_err());
    }
}
