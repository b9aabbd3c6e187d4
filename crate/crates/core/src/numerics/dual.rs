//! Forward-mode dual numbers with a fixed number of tangent lanes.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use super::Real;

/// Number of tangent lanes used by the topology gradient: one per angle of
/// the spherical normal chart.
pub const TANGENT_WIDTH: usize = 2;

/// A value together with its directional derivatives along `N` lanes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub tangents: [f64; N],
}

pub type Dual2 = Dual<TANGENT_WIDTH>;

/// Lift `x` into a dual number seeded on `lane`.
///
/// Panics if `lane >= N`.
pub fn dual_lift<const N: usize>(x: f64, lane: usize) -> Dual<N> {
    assert!(lane < N, "lane {lane} out of range for width {N}");
    let mut tangents = [0.0; N];
    tangents[lane] = 1.0;
    Dual { value: x, tangents }
}

impl<const N: usize> Dual<N> {
    pub const fn constant(value: f64) -> Self {
        Dual {
            value,
            tangents: [0.0; N],
        }
    }

    #[inline]
    fn chain(self, value: f64, slope: f64) -> Self {
        let mut tangents = self.tangents;
        for t in &mut tangents {
            *t *= slope;
        }
        Dual { value, tangents }
    }
}

impl<const N: usize> Default for Dual<N> {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl<const N: usize> PartialOrd for Dual<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for (a, b) in self.tangents.iter_mut().zip(rhs.tangents) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.value -= rhs.value;
        for (a, b) in self.tangents.iter_mut().zip(rhs.tangents) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut tangents = [0.0; N];
        for (t, (a, b)) in tangents
            .iter_mut()
            .zip(self.tangents.iter().zip(rhs.tangents.iter()))
        {
            *t = a * rhs.value + self.value * b;
        }
        Dual {
            value: self.value * rhs.value,
            tangents,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let value = self.value / rhs.value;
        let inv = 1.0 / rhs.value;
        let mut tangents = [0.0; N];
        for (t, (a, b)) in tangents
            .iter_mut()
            .zip(self.tangents.iter().zip(rhs.tangents.iter()))
        {
            *t = (a - value * b) * inv;
        }
        Dual { value, tangents }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.value, -1.0)
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.value += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.value -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.chain(self.value * rhs, rhs)
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self.chain(self.value / rhs, 1.0 / rhs)
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.value
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    #[inline]
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn atan2(self, x: Self) -> Self {
        let value = self.value.atan2(x.value);
        let r2 = self.value * self.value + x.value * x.value;
        let mut tangents = [0.0; N];
        for (t, (dy, dx)) in tangents
            .iter_mut()
            .zip(self.tangents.iter().zip(x.tangents.iter()))
        {
            *t = (x.value * dy - self.value * dx) / r2;
        }
        Dual { value, tangents }
    }
    #[inline]
    fn abs(self) -> Self {
        if self.value < 0.0 {
            -self
        } else {
            self
        }
    }
    fn is_finite(self) -> bool {
        self.value.is_finite() && self.tangents.iter().all(|t| t.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn square_tangent() {
        let x = dual_lift::<2>(2.0, 0);
        let y = x * x;
        assert_eq!(y.value, 4.0);
        assert_eq!(y.tangents, [4.0, 0.0]);
    }

    #[test]
    fn sin_at_half_pi() {
        let y = dual_lift::<2>(FRAC_PI_2, 0).sin();
        assert!((y.value - 1.0).abs() < 1e-15);
        assert!(y.tangents[0].abs() < 1e-12);
    }

    #[test]
    fn product_rule_matches_finite_difference() {
        let x = dual_lift::<2>(1.0, 0);
        let y = x * x.sin();
        let expected = 1f64.sin() + 1f64.cos();
        assert!((y.tangents[0] - expected).abs() < 1e-15);
        let fd = central_diff(|x| x * x.sin(), 1.0);
        assert!(((y.tangents[0] - fd) / fd).abs() < 1e-6);
    }

    #[test]
    fn composite_ops_match_finite_difference() {
        // f(x) = atan2(sqrt(x)·cos x, 1 + x²) / (x - 3) at several points.
        let f = |x: f64| (x.sqrt() * x.cos()).atan2(1.0 + x * x) / (x - 3.0);
        for &x0 in &[0.3, 1.1, 2.2, 4.7] {
            let x = dual_lift::<2>(x0, 1);
            let y = (x.sqrt() * x.cos()).atan2(x * x + 1.0) / (x - 3.0);
            assert_eq!(y.tangents[0], 0.0);
            let fd = central_diff(f, x0);
            assert!(
                ((y.tangents[1] - fd) / fd).abs() < 1e-4,
                "x={x0}: {} vs {fd}",
                y.tangents[1]
            );
        }
    }

    #[test]
    fn zero_tangents_behave_like_reals() {
        let a = Dual::<2>::constant(1.7);
        let b = Dual::<2>::constant(0.4);
        let r = ((a * b + a) / b).sqrt().abs();
        let plain = (((1.7 * 0.4 + 1.7) / 0.4) as f64).sqrt().abs();
        assert_eq!(r.value.to_bits(), plain.to_bits());
        let s = (a / b).sin() - b.cos();
        assert_eq!(s.value, (1.7f64 / 0.4).sin() - (0.4f64).cos());
        assert_eq!(s.tangents, [0.0, 0.0]);
    }

    #[test]
    fn division_by_zero_propagates_nan() {
        let x = dual_lift::<2>(0.0, 0);
        let y = Dual::<2>::constant(1.0) / x;
        assert!(!Real::is_finite(y));
    }

    #[test]
    #[should_panic]
    fn lift_outside_width_panics() {
        let _ = dual_lift::<2>(1.0, 2);
    }
}
