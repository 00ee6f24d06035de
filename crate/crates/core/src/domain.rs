//! Analytic planar domains and their incenter sets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum DomainSpec {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Rectangle { width: f64, height: f64 },
    /// Rectangle `[−half_length, half_length] × [−radius, radius]` capped by
    /// half-disks.
    Stadium { half_length: f64, radius: f64 },
    /// `[−s, s]²` minus the quadrant `x > 0, y > 0`.
    Lshape { size: f64 },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Disk { radius } => radius > 0.0,
            DomainSpec::Ellipse { a, b } => a > 0.0 && b > 0.0,
            DomainSpec::Rectangle { width, height } => width > 0.0 && height > 0.0,
            DomainSpec::Stadium { half_length, radius } => half_length >= 0.0 && radius > 0.0,
            DomainSpec::Lshape { size } => size > 0.0,
        };
        let finite = self.half_extents().iter().all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid domain parameters: {self}")))
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (px, py) = (x[0], x[1]);
        match *self {
            DomainSpec::Disk { radius } => px * px + py * py < radius * radius,
            DomainSpec::Ellipse { a, b } => (px / a).powi(2) + (py / b).powi(2) < 1.0,
            DomainSpec::Rectangle { width, height } => {
                px.abs() < 0.5 * width && py.abs() < 0.5 * height
            }
            DomainSpec::Stadium { half_length, radius } => {
                let dx = (px.abs() - half_length).max(0.0);
                dx * dx + py * py < radius * radius
            }
            DomainSpec::Lshape { size } => {
                px.abs() < size && py.abs() < size && !(px > 0.0 && py > 0.0)
            }
        }
    }

    /// Half widths of the bounding box centered at the origin.
    pub fn half_extents(&self) -> [f64; 2] {
        match *self {
            DomainSpec::Disk { radius } => [radius, radius],
            DomainSpec::Ellipse { a, b } => [a, b],
            DomainSpec::Rectangle { width, height } => [0.5 * width, 0.5 * height],
            DomainSpec::Stadium { half_length, radius } => [half_length + radius, radius],
            DomainSpec::Lshape { size } => [size, size],
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::Disk { radius } => PI * radius * radius,
            DomainSpec::Ellipse { a, b } => PI * a * b,
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::Stadium { half_length, radius } => {
                4.0 * half_length * radius + PI * radius * radius
            }
            DomainSpec::Lshape { size } => 3.0 * size * size,
        }
    }

    /// Inradius where known in closed form.
    pub fn inradius(&self) -> Option<f64> {
        match *self {
            DomainSpec::Disk { radius } => Some(radius),
            DomainSpec::Ellipse { a, b } => Some(a.min(b)),
            DomainSpec::Rectangle { width, height } => Some(0.5 * width.min(height)),
            DomainSpec::Stadium { radius, .. } => Some(radius),
            DomainSpec::Lshape { .. } => None,
        }
    }

    /// The incenter when it is a single known point.
    pub fn incenter(&self) -> Option<[f64; 2]> {
        match *self {
            DomainSpec::Disk { .. } => Some([0.0, 0.0]),
            DomainSpec::Ellipse { .. } => Some([0.0, 0.0]),
            DomainSpec::Stadium { half_length, .. } if half_length == 0.0 => Some([0.0, 0.0]),
            DomainSpec::Rectangle { width, height } if width == height => Some([0.0, 0.0]),
            _ => None,
        }
    }

    /// Grid with `cells` cells across the longer side of the bounding box,
    /// symmetric about the origin.
    pub fn grid(&self, cells: usize) -> Result<GridDomain> {
        self.validate()?;
        if cells < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 cells".into()));
        }
        let ext = self.half_extents();
        let h = 2.0 * ext[0].max(ext[1]) / cells as f64;
        self.grid_with_spacing(h)
    }

    /// Grid of spacing `h` covering the bounding box. Cell counts are even
    /// so that the origin is always a cell corner.
    pub fn grid_with_spacing(&self, h: f64) -> Result<GridDomain> {
        self.validate()?;
        let ext = self.half_extents();
        let nx = 2 * (ext[0] / h - 1e-9).ceil() as usize;
        let ny = 2 * (ext[1] / h - 1e-9).ceil() as usize;
        let lower = [-0.5 * nx as f64 * h, -0.5 * ny as f64 * h];
        GridDomain::from_predicate(2, h, &lower, &[nx, ny], |x| self.contains(x))
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainSpec::Disk { radius } => write!(f, "disk:{radius}"),
            DomainSpec::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            DomainSpec::Rectangle { width, height } => write!(f, "rectangle:{width},{height}"),
            DomainSpec::Stadium { half_length, radius } => write!(f, "stadium:{half_length},{radius}"),
            DomainSpec::Lshape { size } => write!(f, "lshape:{size}"),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    /// Parses tags such as `disk:1.0` or `ellipse:1.0,0.6`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("invalid domain tag `{s}`"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let vals: Vec<f64> = args
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let spec = match (name.trim(), vals.as_slice()) {
            ("disk", [r]) => DomainSpec::Disk { radius: *r },
            ("ellipse", [a, b]) => DomainSpec::Ellipse { a: *a, b: *b },
            ("rectangle", [w, h]) => DomainSpec::Rectangle { width: *w, height: *h },
            ("stadium", [l, r]) => DomainSpec::Stadium { half_length: *l, radius: *r },
            ("lshape", [s]) => DomainSpec::Lshape { size: *s },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Boundary distance, discrete inradius and the DOFs attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncenterField {
    pub distance: Vec<f64>,
    pub d_star: f64,
    pub argmax: Vec<usize>,
}

pub fn incenter_field(domain: &GridDomain) -> Result<IncenterField> {
    if domain.n_dofs() == 0 {
        return Err(Error::DegenerateDomain("no interior cells".into()));
    }
    let distance = domain.distance().to_vec();
    let d_star = domain.inradius();
    let tol = 1e-12 * d_star.max(domain.spacing());
    let argmax = (0..distance.len())
        .filter(|&i| distance[i] >= d_star - tol)
        .collect();
    Ok(IncenterField {
        distance,
        d_star,
        argmax,
    })
}
