//! Reference transport problems on the unit square.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Translation,
    Compression { c: f64 },
    Sinusoidal,
    Cross,
}

/// A transport problem with boundary densities and, when known, the exact
/// density interpolation, potential and distance.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCase {
    name: String,
    profile: Profile,
}

const BUMP_RADIUS: f64 = 0.3;
const BUMP_FREQ: f64 = 100.0 * PI / 9.0;
const CROSS_HALF_LENGTH: f64 = 0.3;
const CROSS_HALF_WIDTH: f64 = 0.08;

/// Unit-mass cosine bump; the unnormalized profile has mass `pi R^2`
/// because the cosine term integrates to zero over the disk.
fn bump(p: Point, center: Point) -> f64 {
    let r2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
    if r2 <= BUMP_RADIUS * BUMP_RADIUS {
        (1.0 + (BUMP_FREQ * r2).cos()) / (PI * BUMP_RADIUS * BUMP_RADIUS)
    } else {
        0.0
    }
}

fn radial_cosine(p: Point) -> f64 {
    let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
    (2.0 * PI * r).cos()
}

/// Composite Simpson rule on the unit square.
fn integrate_unit_square(f: impl Fn(Point) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let w = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let mut s = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            s += w(i) * w(j) * f([i as f64 * h, j as f64 * h]);
        }
    }
    s * h * h / 9.0
}

/// Ratio of the masses of `cos + 3/2` and `-cos + 3/2` on the unit square.
fn sinusoidal_scale() -> f64 {
    static SCALE: OnceLock<f64> = OnceLock::new();
    *SCALE.get_or_init(|| {
        let c = integrate_unit_square(radial_cosine, 1000);
        (1.5 + c) / (1.5 - c)
    })
}

fn cross(p: Point, angle: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    let (dx, dy) = (p[0] - 0.5, p[1] - 0.5);
    let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
    let in_bar = |a: f64, b: f64| a.abs() <= CROSS_HALF_LENGTH && b.abs() <= CROSS_HALF_WIDTH;
    if in_bar(u, v) || in_bar(v, u) {
        1.0
    } else {
        0.0
    }
}

impl AnalyticCase {
    /// A unit-mass cosine bump of radius 0.3 moving from (0.3, 0.3) to (0.7, 0.7).
    pub fn translation() -> Self {
        Self { name: "translation".into(), profile: Profile::Translation }
    }

    /// A one-dimensional cosine profile compressed by the factor `c` about x = 1/2.
    pub fn compression(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!("compression factor {c} must lie in (0, 1]")));
        }
        Ok(Self { name: "compression".into(), profile: Profile::Compression { c } })
    }

    /// Radial cosine and its negation about the center, shifted to stay
    /// positive; the final density is scaled to the initial mass.
    pub fn sinusoidal() -> Self {
        Self { name: "sinusoidal".into(), profile: Profile::Sinusoidal }
    }

    /// An axis-aligned cross of two bars and the same cross rotated by 45 degrees.
    pub fn cross() -> Self {
        Self { name: "cross".into(), profile: Profile::Cross }
    }

    /// Case by name; `c` is used by the compression case only.
    pub fn from_name(name: &str, c: f64) -> Result<Self> {
        match name {
            "translation" => Ok(Self::translation()),
            "compression" => Self::compression(c),
            "sinusoidal" => Ok(Self::sinusoidal()),
            "cross" => Ok(Self::cross()),
            _ => Err(Error::InvalidArgument(format!("unknown case `{name}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether the exact interpolation, potential and distance are known.
    pub fn has_exact(&self) -> bool {
        matches!(self.profile, Profile::Translation | Profile::Compression { .. })
    }

    pub fn notes(&self) -> &'static str {
        match self.profile {
            Profile::Translation => "compactly supported C^1 bump, spatially uniform velocity",
            Profile::Compression { .. } => "compression along x, compactly supported final density",
            Profile::Sinusoidal => "strictly positive smooth densities, exact solution unknown",
            Profile::Cross => "discontinuous densities, exact solution unknown",
        }
    }

    /// Initial density.
    pub fn rho_in(&self, p: Point) -> f64 {
        self.boundary(0.0, p)
    }

    /// Final density.
    pub fn rho_f(&self, p: Point) -> f64 {
        self.boundary(1.0, p)
    }

    fn boundary(&self, t: f64, p: Point) -> f64 {
        match self.profile {
            // the square is not radially symmetric, so the final density is
            // scaled to carry the same mass as the initial one
            Profile::Sinusoidal if t == 0.0 => radial_cosine(p) + 1.5,
            Profile::Sinusoidal => sinusoidal_scale() * (1.5 - radial_cosine(p)),
            Profile::Cross => cross(p, if t == 0.0 { 0.0 } else { PI / 4.0 }),
            _ => self.rho_exact(t, p).expect("exact cases define the boundary densities"),
        }
    }

    /// Exact density at time `t`.
    pub fn rho_exact(&self, t: f64, p: Point) -> Option<f64> {
        match self.profile {
            Profile::Translation => {
                let s = 0.3 + 0.4 * t;
                Some(bump(p, [s, s]))
            }
            Profile::Compression { c } => {
                let l = t * (c - 1.0) + 1.0;
                let x = p[0] - 0.5;
                Some(if x.abs() <= 0.5 * l { (1.0 + (2.0 * PI * x / l).cos()) / l } else { 0.0 })
            }
            _ => None,
        }
    }

    /// Exact potential at time `t`.
    pub fn phi_exact(&self, t: f64, p: Point) -> Option<f64> {
        match self.profile {
            Profile::Translation => Some(0.4 * p[0] + 0.4 * p[1] - 0.16 * t),
            Profile::Compression { c } => {
                let l = t * (c - 1.0) + 1.0;
                Some(0.5 * (c - 1.0) / l * (p[0] - 0.5).powi(2))
            }
            _ => None,
        }
    }

    /// Exact Wasserstein distance.
    pub fn w2_exact(&self) -> Option<f64> {
        match self.profile {
            Profile::Translation => Some(2.0 * 2f64.sqrt() / 5.0),
            Profile::Compression { c } => Some(((PI * PI - 6.0) * (c - 1.0).powi(2) / (12.0 * PI * PI)).sqrt()),
            _ => None,
        }
    }
}

/// Translation, compression with factor 0.3, sinusoidal and cross cases.
pub fn builtin_cases() -> Vec<AnalyticCase> {
    vec![
        AnalyticCase::translation(),
        AnalyticCase::compression(0.3).expect("0.3 is a valid factor"),
        AnalyticCase::sinusoidal(),
        AnalyticCase::cross(),
    ]
}
