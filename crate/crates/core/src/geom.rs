//! Planar vectors, rotations and the periodic simulation box.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` (radians).
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Two-argument arctangent of the components.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist_sq(self, other: Vec2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Vec2) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// 2×2 rotation matrix, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    m: [[f64; 2]; 2],
}

impl Rotation2 {
    pub const IDENTITY: Rotation2 = Rotation2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub fn from_angle(gamma: f64) -> Self {
        let (s, c) = gamma.sin_cos();
        Rotation2 {
            m: [[c, -s], [s, c]],
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Rotation2 {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entry of |RᵀR − I|.
    pub fn orthogonality_error(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot = m[0][i] * m[0][j] + m[1][i] * m[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }
}

/// Rectangular periodic domain `[-L, L) × [-H, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub half_width: f64,
    pub half_height: f64,
}

impl Boundary {
    pub fn new(half_width: f64, half_height: f64) -> Self {
        Boundary {
            half_width,
            half_height,
        }
    }

    pub fn wrap(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            wrap_coord(p.x, self.half_width),
            wrap_coord(p.y, self.half_height),
        )
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (-self.half_width..self.half_width).contains(&p.x)
            && (-self.half_height..self.half_height).contains(&p.y)
    }

    /// Displacement `to - from` measured through the nearest periodic image.
    pub fn min_image(&self, from: Vec2, to: Vec2) -> Vec2 {
        Vec2::new(
            min_image_coord(to.x - from.x, self.half_width),
            min_image_coord(to.y - from.y, self.half_height),
        )
    }

    pub fn min_image_dist_sq(&self, a: Vec2, b: Vec2) -> f64 {
        self.min_image(a, b).norm_sq()
    }
}

fn wrap_coord(x: f64, half: f64) -> f64 {
    let period = 2.0 * half;
    let mut w = (x + half).rem_euclid(period) - half;
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if w >= half {
        w -= period;
    }
    w
}

fn min_image_coord(d: f64, half: f64) -> f64 {
    let period = 2.0 * half;
    d - period * (d / period).round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_orthogonal() {
        for k in 0..64 {
            let r = Rotation2::from_angle(k as f64 * 0.37 - 5.0);
            assert!(r.orthogonality_error() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_angle_is_transpose() {
        let g = 0.81;
        assert_eq!(Rotation2::from_angle(-g), Rotation2::from_angle(g).transpose());
    }

    #[test]
    fn wrap_stays_inside() {
        let b = Boundary::new(8.0, 5.0);
        for p in [
            Vec2::new(8.0, 5.0),
            Vec2::new(-8.0, -5.0),
            Vec2::new(23.5, -17.25),
            Vec2::new(-1e-17, 4.999_999_999),
        ] {
            let w = b.wrap(p);
            assert!(b.contains(w), "{w:?}");
        }
    }

    #[test]
    fn min_image_across_edge() {
        let b = Boundary::new(8.0, 5.0);
        let d = b.min_image(Vec2::new(-7.9, 0.0), Vec2::new(7.9, 0.0));
        assert!((d.x + 0.2).abs() < 1e-12);
        assert_eq!(d.y, 0.0);
    }
}
