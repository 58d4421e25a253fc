//! Angular-momentum algebra for integer angular momenta.
//!
//! Spherical harmonics follow the Condon–Shortley phase convention. Matrix
//! elements are expressed through the renormalized harmonics
//! `C_{l,q}(θ,φ) = sqrt(4π/(2l+1)) Y_{l,q}(θ,φ)`, for which
//!
//! ```text
//! ⟨j',m'| C_{l,q} |j,m⟩ = (-1)^{m'} sqrt((2j'+1)(2j+1))
//!                          ( j' l j ) ( j'  l j )
//!                          ( 0  0 0 ) (-m'  q m )
//! ```

use crate::C64;

/// Largest factorial argument representable in `f64`.
const MAX_FACTORIAL: usize = 170;

fn factorial(n: i64) -> f64 {
    debug_assert!(n >= 0 && (n as usize) <= MAX_FACTORIAL);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner 3-j symbol for integer angular momenta, via the Racah formula.
///
/// Returns zero whenever the selection rules (triangle condition,
/// `m1 + m2 + m3 = 0`, `|m_i| <= j_i`) are violated.
pub fn wigner_3j(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    let (j1, j2, j3) = (j1 as i64, j2 as i64, j3 as i64);
    let (m1, m2, m3) = (m1 as i64, m2 as i64, m3 as i64);
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    // (j1 j2 j3; 0 0 0) vanishes for odd total.
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }
    assert!(
        ((j1 + j2 + j3 + 1) as usize) <= MAX_FACTORIAL,
        "angular momenta too large for f64 factorials"
    );

    let triangle = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3)
        / factorial(j1 + j2 + j3 + 1);
    let projections = factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(j3 - j2 + k + m1)
            * factorial(j3 - j1 + k - m2)
            * factorial(j1 + j2 - j3 - k)
            * factorial(j1 - k - m1)
            * factorial(j2 - k + m2);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * (triangle * projections).sqrt() * sum
}

/// `⟨jf,mf| C_{rank,q} |ji,mi⟩` for the renormalized spherical harmonic.
pub fn harmonic_element(jf: u32, mf: i32, rank: u32, q: i32, ji: u32, mi: i32) -> f64 {
    if mf != mi + q {
        return 0.0;
    }
    let reduced = wigner_3j(jf, rank, ji, 0, 0, 0);
    if reduced == 0.0 {
        return 0.0;
    }
    let phase = if mf.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase
        * (((2 * jf + 1) * (2 * ji + 1)) as f64).sqrt()
        * reduced
        * wigner_3j(jf, rank, ji, -mf, q, mi)
}

/// A real unit vector in the lab frame; `z` is the quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction([f64; 3]);

impl Direction {
    pub const Z: Direction = Direction([0.0, 0.0, 1.0]);
    pub const X: Direction = Direction([1.0, 0.0, 0.0]);

    /// Normalizes `v`; returns `None` for the zero vector.
    pub fn new(v: [f64; 3]) -> Option<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Direction([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Unit vector at angle `angle` from `x` toward `y`, perpendicular to `z`.
    pub fn in_plane(angle: f64) -> Self {
        Direction([angle.cos(), angle.sin(), 0.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// `C_{rank,q}` evaluated at this direction, for rank 1 and 2.
    pub fn harmonic(&self, rank: u32, q: i32) -> C64 {
        let [x, y, z] = self.0;
        let plus = C64::new(x, y);
        let minus = C64::new(x, -y);
        match (rank, q) {
            (1, 0) => C64::new(z, 0.0),
            (1, 1) => -plus / 2f64.sqrt(),
            (1, -1) => minus / 2f64.sqrt(),
            (2, 0) => C64::new(1.5 * z * z - 0.5, 0.0),
            (2, 1) => -(1.5f64).sqrt() * z * plus,
            (2, -1) => (1.5f64).sqrt() * z * minus,
            (2, 2) => (0.375f64).sqrt() * plus * plus,
            (2, -2) => (0.375f64).sqrt() * minus * minus,
            _ => panic!("harmonic({rank}, {q}) not tabulated"),
        }
    }
}
