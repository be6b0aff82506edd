//! Special functions: Bessel functions of the first kind, their positive
//! zeros, and `Γ(-s)` on `(0, 1)`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// `J_0(x), …, J_max_order(x)` for `x ≥ 0`.
///
/// Power series for `x < 1`, Miller's backward recurrence normalised by
/// `J_0 + 2 Σ J_{2k} = 1` otherwise.
pub fn bessel_j_all(max_order: usize, x: f64) -> Vec<f64> {
    if x < 0.0 {
        let mut out = bessel_j_all(max_order, -x);
        for (m, v) in out.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
        return out;
    }
    if x == 0.0 {
        let mut out = vec![0.0; max_order + 1];
        out[0] = 1.0;
        return out;
    }
    if x < 1.0 {
        return (0..=max_order).map(|m| bessel_j_series(m, x)).collect();
    }

    let top = max_order.max(x.ceil() as usize);
    let mut start = top + 20 + (60.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1.0;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e200 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(max_order + 1);
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

fn bessel_j_series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn bessel_j(order: usize, x: f64) -> f64 {
    bessel_j_all(order, x)[order]
}

/// `J_m(x)` together with `J_m'(x)`.
pub fn bessel_j_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let vals = bessel_j_all(order + 1, x);
    let d = if order == 0 {
        -vals[1]
    } else {
        0.5 * (vals[order - 1] - vals[order + 1])
    };
    (vals[order], d)
}

/// `J_m(x)/x`, finite at `x = 0` for `m ≥ 1`.
pub fn bessel_j_over_x(order: usize, x: f64) -> f64 {
    assert!(order >= 1, "J_0(x)/x is singular at the origin");
    if x.abs() < 1e-3 {
        // J_m(x)/x = (J_{m-1}(x) + J_{m+1}(x)) / (2m)
        let vals = bessel_j_all(order + 1, x);
        (vals[order - 1] + vals[order + 1]) / (2.0 * order as f64)
    } else {
        bessel_j(order, x) / x
    }
}

/// The first `count` positive zeros of `J_order`.
///
/// Zeros of `J_0` are bracketed by `((l - 1/2)π, lπ)`; zeros of `J_{m+1}`
/// are bracketed by consecutive zeros of `J_m` (interlacing). Each bracket
/// is refined by bisection to full double precision.
pub fn bessel_zeros(order: usize, count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let mut zeros: Vec<f64> = (1..=count + order)
        .map(|l| {
            let l = l as f64;
            bisect(|x| bessel_j(0, x), (l - 0.5) * PI, l * PI)
        })
        .collect();
    for m in 1..=order {
        zeros = zeros
            .windows(2)
            .map(|w| bisect(|x| bessel_j(m, x), w[0], w[1]))
            .collect();
    }
    zeros.truncate(count);
    zeros
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    assert!(
        f_lo * f_hi <= 0.0,
        "Bessel zero bracket [{lo}, {hi}] does not change sign"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Γ(-s)` for `s ∈ (0, 1)` by reflection: `Γ(-s) = -π / (sin(πs) Γ(1+s))`.
pub fn gamma_neg(s: f64) -> f64 {
    assert!(s > 0.0 && s < 1.0, "gamma_neg expects s in (0,1), got {s}");
    -PI / ((PI * s).sin() * ln_gamma(1.0 + s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Tabulated zeros (Abramowitz & Stegun, table 9.5).
    const J0_ZEROS: [f64; 3] = [
        2.404_825_557_695_773,
        5.520_078_110_286_311,
        8.653_727_912_911_013,
    ];
    const J1_ZEROS: [f64; 2] = [3.831_705_970_207_512, 7.015_586_669_815_619];
    const J2_FIRST: f64 = 5.135_622_301_840_683;

    #[test]
    fn zeros_match_tables() {
        let z0 = bessel_zeros(0, 3);
        for (a, b) in z0.iter().zip(J0_ZEROS) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        let z1 = bessel_zeros(1, 2);
        for (a, b) in z1.iter().zip(J1_ZEROS) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        assert!((bessel_zeros(2, 1)[0] - J2_FIRST).abs() < 1e-13);
    }

    #[test]
    fn series_and_recurrence_agree_across_the_switch() {
        for m in 0..6 {
            for x in [0.9, 1.5, 3.0] {
                let series = bessel_j_series(m, x);
                let miller = bessel_j_all(m, x)[m];
                assert!((series - miller).abs() < 1e-13, "m={m}, x={x}");
            }
        }
    }

    #[test]
    fn known_values() {
        // Reference values from an independent implementation.
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 10.0) - 0.043_472_746_168_861_6).abs() < 1e-14);
        assert!((bessel_j(5, 30.0) - (-0.143_240_295_512_077_06)).abs() < 1e-13);
    }

    #[test]
    fn wronskian_like_recurrence_holds() {
        // J_{m-1} + J_{m+1} = (2m/x) J_m
        for x in [0.5, 2.0, 7.5, 25.0] {
            let v = bessel_j_all(12, x);
            for m in 1..11 {
                let lhs = v[m - 1] + v[m + 1];
                let rhs = 2.0 * m as f64 / x * v[m];
                assert!((lhs - rhs).abs() < 1e-13, "m={m}, x={x}");
            }
        }
    }

    #[test]
    fn gamma_neg_half() {
        // Γ(-1/2) = -2√π
        let want = -2.0 * PI.sqrt();
        assert!((gamma_neg(0.5) - want).abs() < 1e-13);
    }

    #[test]
    fn j_over_x_is_continuous_at_switch() {
        let a = bessel_j_over_x(1, 0.999e-3);
        let b = bessel_j_over_x(1, 1.001e-3);
        assert!((a - b).abs() < 1e-9);
        assert!((bessel_j_over_x(1, 0.0) - 0.5).abs() < 1e-16);
    }
}
