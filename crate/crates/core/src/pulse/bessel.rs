/// Bessel function of the first kind `J_n(x)` for integer order, from the
/// power series. Accurate to ~1e-14 for `|x| ≲ 20`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 2.6) - 0.470_818_266_517_578_5).abs() < 1e-14);
        assert!((bessel_j(2, 2.6) - 0.458_972_851_718_252_8).abs() < 1e-14);
        assert!((bessel_j(0, 2.6) + 0.096_804_954_397_038_37).abs() < 1e-14);
        assert!((bessel_j(6, 2.6) - 0.005_246_081_504_902_565).abs() < 1e-15);
        assert!((bessel_j(-1, 2.6) + bessel_j(1, 2.6)).abs() < 1e-16);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn sum_of_squares_is_one() {
        let s: f64 = (-30..=30).map(|n| bessel_j(n, 2.6).powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-13);
    }
}
