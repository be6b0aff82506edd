use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::SemilinearError;
use crate::sfl::FractionalOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

/// Compares `p` with `(N+2s)/(N-2s)`. Inputs are read as the simplest
/// rationals they round to, so the comparison is exact for decimal data.
/// With `N ≤ 2s` there is no finite critical exponent.
pub fn criticality(
    dimension: usize,
    s: FractionalOrder,
    p: f64,
) -> Result<Criticality, SemilinearError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(SemilinearError::ExponentOutOfRange(p));
    }
    let n = dimension as i64;
    let exact = (
        Ratio::<i64>::approximate_float(s.value()),
        Ratio::<i64>::approximate_float(p),
    );
    let ordering = match exact {
        (Some(s), Some(p)) => {
            let two_s = s * 2;
            if Ratio::from_integer(n) <= two_s {
                return Ok(Criticality::Subcritical);
            }
            let critical = (Ratio::from_integer(n) + two_s) / (Ratio::from_integer(n) - two_s);
            p.cmp(&critical)
        }
        _ => {
            let (s, nf) = (s.value(), dimension as f64);
            if nf <= 2.0 * s {
                return Ok(Criticality::Subcritical);
            }
            p.total_cmp(&((nf + 2.0 * s) / (nf - 2.0 * s)))
        }
    };
    Ok(match ordering {
        std::cmp::Ordering::Less => Criticality::Subcritical,
        std::cmp::Ordering::Equal => Criticality::Critical,
        std::cmp::Ordering::Greater => Criticality::Supercritical,
    })
}

/// `(2s-N)/2 + N/(p+1)`: the Pohozaev functional of `|u|^{p-1}u` per unit `∫|u|^{p+1}`.
pub fn power_coefficient(dimension: usize, s: f64, p: f64) -> f64 {
    let n = dimension as f64;
    (2.0 * s - n) / 2.0 + n / (p + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> FractionalOrder {
        FractionalOrder::new(0.5).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(criticality(2, half(), 3.0).unwrap(), Criticality::Critical);
        assert_eq!(
            criticality(2, half(), 5.0).unwrap(),
            Criticality::Supercritical
        );
        assert_eq!(
            criticality(2, half(), 2.0).unwrap(),
            Criticality::Subcritical
        );
        assert_eq!(
            criticality(1, half(), 7.0).unwrap(),
            Criticality::Subcritical
        );
        // (2 + 0.6)/(2 - 0.6) = 13/7
        let s = FractionalOrder::new(0.3).unwrap();
        assert_eq!(
            criticality(2, s, 13.0 / 7.0).unwrap(),
            Criticality::Critical
        );
        assert!(criticality(2, half(), 1.0).is_err());
        assert!(criticality(2, half(), 0.5).is_err());
    }

    #[test]
    fn coefficients() {
        assert!((power_coefficient(2, 0.5, 5.0) + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(power_coefficient(2, 0.5, 3.0), 0.0);
        assert!(power_coefficient(2, 0.5, 2.0) > 0.0);
    }
}
