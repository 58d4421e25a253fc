//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rotorkick::{BasisIndex, C64};

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Associated Legendre function with the Condon–Shortley phase, `m ≥ 0`.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for k in 0..m {
        pmm *= -((2 * k + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut p = 0.0;
    for ll in m + 2..=l {
        p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = p;
    }
    p
}

/// Spherical harmonic `Y_{l,m}(θ, φ)`, Condon–Shortley convention.
pub fn ylm(l: u32, m: i32, cos_theta: f64, phi: f64) -> C64 {
    let am = m.unsigned_abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = C64::from_polar(norm * assoc_legendre(l, am, cos_theta), am as f64 * phi);
    if m >= 0 {
        y
    } else if am.is_multiple_of(2) {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Product quadrature over the unit sphere: Gauss–Legendre in `cos θ`,
/// uniform in `φ`.
pub struct SphereQuadrature {
    /// `(cos θ, φ, weight, unit vector)`
    pub points: Vec<(f64, f64, f64, [f64; 3])>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in gauss_legendre(n_theta) {
            let s = (1.0 - x * x).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * k as f64 / n_phi as f64;
                points.push((x, phi, w * 2.0 * PI / n_phi as f64, [s * phi.cos(), s * phi.sin(), x]));
            }
        }
        SphereQuadrature { points }
    }

    /// `∫ Y*_{l'm'} f Y_{lm} dΩ`.
    pub fn element(&self, lf: u32, mf: i32, li: u32, mi: i32, f: impl Fn([f64; 3]) -> C64) -> C64 {
        self.points
            .iter()
            .map(|&(x, phi, w, r)| ylm(lf, mf, x, phi).conj() * f(r) * ylm(li, mi, x, phi) * w)
            .sum()
    }

    /// Tabulates `Y_{l,m}` at all nodes for the given states.
    pub fn table(&self, states: &[(u32, i32)]) -> Vec<Vec<C64>> {
        states
            .iter()
            .map(|&(l, m)| self.points.iter().map(|&(x, phi, _, _)| ylm(l, m, x, phi)).collect())
            .collect()
    }
}

/// Bessel `J_n(x)` from `(1/π) ∫₀^π cos(nθ − x sin θ) dθ` by composite
/// Simpson quadrature.
pub fn bessel_integral(n: i32, x: f64) -> f64 {
    let steps = 4000;
    let h = PI / steps as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(k as f64 * h);
    }
    s * h / 3.0 / PI
}

/// Largest deviation between `m` and the quadrature matrix of `f` between
/// the states of `rows` and `cols`.
pub fn operator_deviation(
    quad: &SphereQuadrature,
    rows: &BasisIndex,
    cols: &BasisIndex,
    m: &DMatrix<C64>,
    f: impl Fn([f64; 3]) -> C64,
) -> f64 {
    let states = |b: &BasisIndex| b.states().iter().map(|s| (s.j, s.m)).collect::<Vec<_>>();
    let yr = quad.table(&states(rows));
    let yc = quad.table(&states(cols));
    let fv: Vec<C64> = quad.points.iter().map(|p| f(p.3) * p.2).collect();
    let mut worst = 0.0_f64;
    for (i, a) in yr.iter().enumerate() {
        for (j, b) in yc.iter().enumerate() {
            let q: C64 = a.iter().zip(b).zip(&fv).map(|((a, b), w)| a.conj() * b * w).sum();
            worst = worst.max((q - m[(i, j)]).norm());
        }
    }
    worst
}
