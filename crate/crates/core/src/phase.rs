//! Phase-space points, the affine single-mode transforms applied to mode B,
//! and integration regions.

use crate::error::{Error, Result};
use crate::prelude::*;

const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const ORIGIN: Self = Self { x: 0.0, p: 0.0 };

    pub const fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }
}

/// Affine map `(x, p) ↦ M·(x, p) + (x0, p0)` with `det M = ±1`.
///
/// `det = +1` maps are canonical (Gaussian unitaries plus displacement);
/// `det = -1` maps additionally contain a mirror reflection, the phase-space
/// image of transposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub x0: f64,
    pub p0: f64,
}

impl Transform2 {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0, x0: 0.0, p0: 0.0 };
    /// `(x, p) ↦ (x, -p)`, the partial-transpose reflection.
    pub const P_REFLECT: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: -1.0, x0: 0.0, p0: 0.0 };
    /// `(x, p) ↦ (-x, -p)`.
    pub const NEG_IDENTITY: Self = Self { a: -1.0, b: 0.0, c: 0.0, d: -1.0, x0: 0.0, p0: 0.0 };

    /// Builds a transform, rejecting matrices whose determinant is not ±1.
    pub fn new(a: f64, b: f64, c: f64, d: f64, x0: f64, p0: f64) -> Result<Self> {
        let t = Self { a, b, c, d, x0, p0 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.det();
        let finite = [self.a, self.b, self.c, self.d, self.x0, self.p0].iter().all(|v| v.is_finite());
        if finite && ((det - 1.0).abs() < DET_TOL || (det + 1.0).abs() < DET_TOL) {
            Ok(())
        } else {
            Err(Error::BadDeterminant(det))
        }
    }

    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { a: c, b: -s, c: s, d: c, x0: 0.0, p0: 0.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_reflection(&self) -> bool {
        self.det() < 0.0
    }

    pub fn with_offset(mut self, x0: f64, p0: f64) -> Self {
        self.x0 = x0;
        self.p0 = p0;
        self
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn apply(&self, pt: PhasePoint) -> PhasePoint {
        PhasePoint {
            x: self.a * pt.x + self.b * pt.p + self.x0,
            p: self.c * pt.x + self.d * pt.p + self.p0,
        }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Self { a, b, c, d, x0: -(a * self.x0 + b * self.p0), p0: -(c * self.x0 + d * self.p0) }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            x0: self.a * other.x0 + self.b * other.p0 + self.x0,
            p0: self.c * other.x0 + self.d * other.p0 + self.p0,
        }
    }

    /// Largest absolute difference between the matrix parts of two transforms.
    pub fn matrix_distance(&self, other: &Self) -> f64 {
        [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rotation–squeeze–rotation decomposition; inverse of
    /// [`SymplecticParam::to_transform`] up to angle ambiguities.
    pub fn decompose(&self) -> SymplecticParam {
        let reflect = self.is_reflection();
        // Undo the trailing diag(1, -1) so the remainder has det +1.
        let (a, b, c, d) = if reflect { (self.a, -self.b, self.c, -self.d) } else { (self.a, self.b, self.c, self.d) };
        let e = 0.5 * (a + d);
        let f = 0.5 * (a - d);
        let g = 0.5 * (c + b);
        let h = 0.5 * (c - b);
        let q = e.hypot(h);
        let r = f.hypot(g);
        let a1 = g.atan2(f);
        let a2 = h.atan2(e);
        let phi1 = 0.5 * (a2 + a1);
        let phi2 = 0.5 * (a2 - a1);
        SymplecticParam {
            phi1: modulo(phi1, TAU),
            phi2: modulo(phi2, TAU),
            t: q + r,
            reflect,
            x0: self.x0,
            p0: self.p0,
        }
    }
}

impl Default for Transform2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Smooth coordinates for the optimizer: `M = R(φ1)·diag(t, 1/t)·R(φ2)`,
/// right-multiplied by `diag(1, -1)` when `reflect` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticParam {
    pub phi1: f64,
    pub phi2: f64,
    pub t: f64,
    pub reflect: bool,
    pub x0: f64,
    pub p0: f64,
}

impl SymplecticParam {
    pub fn to_transform(&self) -> Result<Transform2> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::NonPositiveSqueeze(self.t));
        }
        let r1 = Transform2::rotation(self.phi1);
        let sq = Transform2 { a: self.t, b: 0.0, c: 0.0, d: 1.0 / self.t, x0: 0.0, p0: 0.0 };
        let r2 = Transform2::rotation(self.phi2);
        let mut m = r1.compose(&sq).compose(&r2);
        if self.reflect {
            m = m.compose(&Transform2::P_REFLECT);
        }
        Ok(m.with_offset(self.x0, self.p0))
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [p_min, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64) -> Self {
        Self { x_min, x_max, p_min, p_max }
    }

    pub fn centered(half_x: f64, half_p: f64) -> Self {
        Self::new(-half_x, half_x, -half_p, half_p)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.p_max - self.p_min)
    }

    pub fn is_valid(&self) -> bool {
        self.x_max > self.x_min && self.p_max > self.p_min && self.area().is_finite()
    }

    pub fn contains(&self, pt: PhasePoint) -> bool {
        pt.x >= self.x_min && pt.x <= self.x_max && pt.p >= self.p_min && pt.p <= self.p_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: PhasePoint,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, pt: PhasePoint) -> bool {
        let dx = pt.x - self.center.x;
        let dp = pt.p - self.center.p;
        dx * dx + dp * dp <= self.radius * self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// Integration domain for the criteria.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    FullPlane,
    Rectangle(Rect),
    DiskUnion(Vec<Disk>),
}

impl Region {
    pub fn disks(disks: Vec<Disk>) -> Result<Self> {
        let r = Region::DiskUnion(disks);
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::FullPlane => Ok(()),
            Region::Rectangle(r) if r.is_valid() => Ok(()),
            Region::Rectangle(_) => Err(Error::BadRegion("rectangle has zero or negative extent")),
            Region::DiskUnion(d) if d.is_empty() => Err(Error::BadRegion("disk union has no disks")),
            Region::DiskUnion(d) => {
                if d.iter().all(|k| k.radius > 0.0 && k.radius.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::BadRegion("disk radius must be positive"))
                }
            }
        }
    }

    pub fn contains(&self, pt: PhasePoint) -> bool {
        match self {
            Region::FullPlane => true,
            Region::Rectangle(r) => r.contains(pt),
            Region::DiskUnion(d) => d.iter().any(|k| k.contains(pt)),
        }
    }

    /// Sum of disk areas (an upper bound on the union area when disks overlap).
    pub fn nominal_area(&self) -> f64 {
        match self {
            Region::FullPlane => f64::INFINITY,
            Region::Rectangle(r) => r.area(),
            Region::DiskUnion(d) => d.iter().map(Disk::area).sum(),
        }
    }

    pub fn has_overlap(&self) -> bool {
        match self {
            Region::DiskUnion(d) => d.iter().enumerate().any(|(i, a)| {
                d[i + 1..].iter().any(|b| {
                    (a.center.x - b.center.x).hypot(a.center.p - b.center.p) < a.radius + b.radius
                })
            }),
            _ => false,
        }
    }
}
