//! Closed-form Green's functions of three solvable tree models, evaluated on
//! either sheet of their two-sheeted continuation.
//!
//! Every model has the shape `G(z) = N(z, ρ(z)) / D(z)` where `ρ` is a
//! radical that is odd under the sheet swap. Sheet I takes the branch with
//! `ρ(z) ~ +z^k` as `z → +∞` (`k = 1` for `√(z² - c)`, `k = 2` for the
//! quartic radicals); sheet II flips its sign. Radicals of polynomials in
//! `z²` are written as products of `z·√(1 - c/z²)` factors, whose cuts are
//! `[-√c, √c]`; the product's cut is then exactly the spectrum.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    I,
    II,
}

impl Sheet {
    fn sign(self) -> f64 {
        match self {
            Sheet::I => 1.0,
            Sheet::II => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetedPoint {
    pub z: Complex64,
    pub sheet: Sheet,
}

impl SheetedPoint {
    pub fn new(z: Complex64, sheet: Sheet) -> Self {
        SheetedPoint { z, sheet }
    }

    pub fn first(z: Complex64) -> Self {
        Self::new(z, Sheet::I)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgSite {
    Red,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltSite {
    /// Vertex with potential `+b`.
    Plus,
    /// Vertex with potential `-b`.
    Minus,
}

/// One of the solvable models together with the site whose diagonal Green's
/// function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelGreen {
    /// Homogeneous tree of degree `d ≥ 3`, `a ≡ 1`, `b ≡ 0`.
    Free { d: usize },
    /// `(r, g)`-biregular tree, `r > g ≥ 2`.
    Rg { r: usize, g: usize, site: RgSite },
    /// Degree-3 tree with potentials alternating between `+b` and `-b`.
    AlternatingB { b: f64, site: AltSite },
}

impl fmt::Display for ModelGreen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelGreen::Free { d } => write!(f, "free:{d}"),
            ModelGreen::Rg { r, g, site } => write!(f, "rg:{r},{g} ({site:?})"),
            ModelGreen::AlternatingB { b, site } => write!(f, "altb:{b} ({site:?})"),
        }
    }
}

/// `z·√(1 - c/z²)`: analytic off `[-√c, √c]`, `~ z` at infinity. On the
/// real axis inside the cut it returns the boundary value from above,
/// `i√(c - x²)`.
fn radical_factor(z: Complex64, c: f64) -> Complex64 {
    if c == 0.0 {
        return z;
    }
    if z.im == 0.0 {
        let x = z.re;
        return if x * x < c {
            Complex64::new(0.0, (c - x * x).sqrt())
        } else {
            Complex64::new(x.signum() * (x * x - c).sqrt(), 0.0)
        };
    }
    z * (Complex64::new(1.0, 0.0) - c / (z * z)).sqrt()
}

impl ModelGreen {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelGreen::Free { d } if d < 3 => Err(Error::Precondition(format!(
                "free model needs d >= 3, got {d}"
            ))),
            ModelGreen::Rg { r, g, .. } if r <= g || g < 2 => Err(Error::Precondition(format!(
                "rg model needs r > g >= 2, got r={r}, g={g}"
            ))),
            ModelGreen::AlternatingB { b, .. } if !b.is_finite() => Err(Error::Precondition(
                "alternating potential must be finite".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Sheet-I radical: `√(z² - 4(d-1))`, `√Φ` or `√Δ`.
    pub fn radical(&self, z: Complex64) -> Complex64 {
        match *self {
            ModelGreen::Free { d } => radical_factor(z, 4.0 * (d as f64 - 1.0)),
            ModelGreen::Rg { r, g, .. } => {
                let (hi, lo) = rg_edges(r, g);
                radical_factor(z, hi * hi) * radical_factor(z, lo * lo)
            }
            ModelGreen::AlternatingB { b, .. } => {
                radical_factor(z, b * b) * radical_factor(z, b * b + 8.0)
            }
        }
    }

    /// Numerator with an explicit value for the radical.
    pub fn numerator(&self, z: Complex64, rad: Complex64) -> Complex64 {
        match *self {
            ModelGreen::Free { d } => {
                let d = d as f64;
                (2.0 - d) * z + d * rad
            }
            ModelGreen::Rg { r, g, site } => {
                let (own, other) = match site {
                    RgSite::Red => (g as f64, r as f64),
                    RgSite::Green => (r as f64, g as f64),
                };
                (2.0 - own) * z * z - own * ((other - own) - rad)
            }
            ModelGreen::AlternatingB { b, .. } => (b * b - z * z) + 3.0 * rad,
        }
    }

    pub fn denominator(&self, z: Complex64) -> Complex64 {
        match *self {
            ModelGreen::Free { d } => {
                let d = d as f64;
                2.0 * (d * d - z * z)
            }
            ModelGreen::Rg { r, g, .. } => 2.0 * z * ((r * g) as f64 - z * z),
            ModelGreen::AlternatingB { b, site } => {
                let shift = match site {
                    AltSite::Plus => b,
                    AltSite::Minus => -b,
                };
                2.0 * (z - shift) * (9.0 - z * z + b * b)
            }
        }
    }

    /// Real zeros of the denominator.
    pub fn singular_points(&self) -> Vec<f64> {
        match *self {
            ModelGreen::Free { d } => vec![-(d as f64), d as f64],
            ModelGreen::Rg { r, g, .. } => {
                let s = ((r * g) as f64).sqrt();
                vec![-s, 0.0, s]
            }
            ModelGreen::AlternatingB { b, site } => {
                let s = (9.0 + b * b).sqrt();
                let shift = match site {
                    AltSite::Plus => b,
                    AltSite::Minus => -b,
                };
                vec![-s, shift, s]
            }
        }
    }

    /// Top eigenvalue `σ` of the underlying finite Jacobi matrix.
    pub fn sigma(&self) -> f64 {
        match *self {
            ModelGreen::Free { d } => d as f64,
            ModelGreen::Rg { r, g, .. } => ((r * g) as f64).sqrt(),
            ModelGreen::AlternatingB { b, .. } => (9.0 + b * b).sqrt(),
        }
    }

    /// Closed intervals making up the continuous spectrum.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        match *self {
            ModelGreen::Free { d } => {
                let s = (4.0 * (d as f64 - 1.0)).sqrt();
                vec![(-s, s)]
            }
            ModelGreen::Rg { r, g, .. } => {
                let (hi, lo) = rg_edges(r, g);
                vec![(-hi, -lo), (lo, hi)]
            }
            ModelGreen::AlternatingB { b, .. } => {
                let (lo, hi) = (b.abs(), (b * b + 8.0).sqrt());
                vec![(-hi, -lo), (lo, hi)]
            }
        }
    }

    /// The radical-free part `N(z, 0) / D(z)`.
    pub fn rational_part(&self, z: Complex64) -> Complex64 {
        self.numerator(z, Complex64::new(0.0, 0.0)) / self.denominator(z)
    }

    fn raw(&self, p: SheetedPoint) -> Complex64 {
        let rad = self.radical(p.z) * p.sheet.sign();
        self.numerator(p.z, rad) / self.denominator(p.z)
    }

    /// `G` on the requested sheet. A removable singularity (numerator and
    /// denominator vanishing together) is filled by its limit; a genuine
    /// pole is an error.
    pub fn eval(&self, p: SheetedPoint) -> Result<Complex64> {
        self.validate()?;
        let z = p.z;
        let near = self
            .singular_points()
            .into_iter()
            .find(|&s| (z - s).norm() <= 1e-9 * (1.0 + s.abs()));
        let Some(z0) = near else {
            return Ok(self.raw(p));
        };
        let z0 = Complex64::new(z0, 0.0);
        let rad = self.radical(z0) * p.sheet.sign();
        let scale = 1.0 + z0.norm().powi(3);
        if self.numerator(z0, rad).norm() > 1e-8 * scale {
            return Err(Error::Pole(z));
        }
        limit(
            |w| Ok(self.raw(SheetedPoint::new(w, p.sheet))),
            z0,
            Complex64::new(1.0, 0.0),
        )
    }
}

/// Band edges `η₊ = √(r-1) + √(g-1)` and `η₋ = √(r-1) - √(g-1)`.
pub fn rg_edges(r: usize, g: usize) -> (f64, f64) {
    let (a, b) = ((r as f64 - 1.0).sqrt(), (g as f64 - 1.0).sqrt());
    (a + b, a - b)
}

pub fn eval_free(d: usize, p: SheetedPoint) -> Result<Complex64> {
    ModelGreen::Free { d }.eval(p)
}

pub fn eval_rg(r: usize, g: usize, site: RgSite, p: SheetedPoint) -> Result<Complex64> {
    ModelGreen::Rg { r, g, site }.eval(p)
}

pub fn eval_alt(b: f64, site: AltSite, p: SheetedPoint) -> Result<Complex64> {
    ModelGreen::AlternatingB { b, site }.eval(p)
}

/// Offsets `10^-k`, `k = 2..=8`.
const LIMIT_STEPS: std::ops::RangeInclusive<i32> = 2..=8;

/// `lim f(z0 + h·dir)` as `h → 0`: the sequence at `h = 10^-k`, `k = 2..8`,
/// is Richardson-extrapolated (linear in `h`) and the last two extrapolants
/// must agree to `1e-6`.
pub fn limit<F>(f: F, z0: Complex64, dir: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let values = LIMIT_STEPS
        .map(|k| f(z0 + dir * 10f64.powi(-k)))
        .collect::<Result<Vec<_>>>()?;
    let rich: Vec<Complex64> = values
        .windows(2)
        .map(|w| (10.0 * w[1] - w[0]) / 9.0)
        .collect();
    let (prev, last) = (rich[rich.len() - 2], rich[rich.len() - 1]);
    if !last.is_finite() || (last - prev).norm() > 1e-6 * last.norm().max(1.0) {
        return Err(Error::InconsistentLimit {
            z0,
            detail: format!("extrapolants {prev} and {last} disagree"),
        });
    }
    Ok(last)
}

/// Behavior of `G` near a real point on one sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SheetBehavior {
    Regular { value: Complex64 },
    Pole { residue: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleClass {
    /// Numerator and denominator vanish together on sheet I, with a finite
    /// limit there; sheet II has a genuine pole.
    RemovableOnI {
        value: Complex64,
        residue_ii: Complex64,
    },
    /// Pole on the physical sheet.
    FirstSheetPole {
        residue: Complex64,
    },
    Regular {
        value: Complex64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleAudit {
    pub z0: f64,
    pub sheet_i: SheetBehavior,
    pub sheet_ii: SheetBehavior,
    pub class: PoleClass,
}

/// Residues below this are read as "no pole".
const RESIDUE_FLOOR: f64 = 1e-7;

fn behavior(model: &ModelGreen, z0: f64, sheet: Sheet) -> Result<SheetBehavior> {
    let c0 = Complex64::new(z0, 0.0);
    let dir = Complex64::new(1.0, 0.0);
    let eval = |w: Complex64| Ok(model.raw(SheetedPoint::new(w, sheet)));
    let residue = limit(|w| Ok((w - c0) * eval(w)?), c0, dir)?;
    if residue.norm() > RESIDUE_FLOOR {
        Ok(SheetBehavior::Pole { residue })
    } else {
        Ok(SheetBehavior::Regular {
            value: limit(eval, c0, dir)?,
        })
    }
}

/// Classifies a real candidate point by numeric limits along
/// `z = z0 + 10^-k` on both sheets.
pub fn pole_audit(model: &ModelGreen, z0: f64) -> Result<PoleAudit> {
    model.validate()?;
    let sheet_i = behavior(model, z0, Sheet::I)?;
    let sheet_ii = behavior(model, z0, Sheet::II)?;
    let den_vanishes = model
        .singular_points()
        .iter()
        .any(|s| (s - z0).abs() <= 1e-9 * (1.0 + z0.abs()));
    let class = match (sheet_i, sheet_ii) {
        (SheetBehavior::Pole { residue }, _) => PoleClass::FirstSheetPole { residue },
        (SheetBehavior::Regular { value }, SheetBehavior::Pole { residue }) if den_vanishes => {
            PoleClass::RemovableOnI {
                value,
                residue_ii: residue,
            }
        }
        (SheetBehavior::Regular { value }, _) => PoleClass::Regular { value },
    };
    Ok(PoleAudit {
        z0,
        sheet_i,
        sheet_ii,
        class,
    })
}
