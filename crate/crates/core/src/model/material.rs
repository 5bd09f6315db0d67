//! Material laws: conductivity per region and the magnetic reluctivity,
//! constant in vacuum-like regions and a monotone cubic spline in the shield.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::mesh::Region;

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * PI;
/// Vacuum reluctivity `1/MU0` in m/H.
pub const NU0: f64 = 1.0 / MU0;

/// Flux densities below this are treated as this value when forming the
/// differential reluctivity.
pub const B_EPS: f64 = 1e-12;

const DEFAULT_TABLE: &str = include_str!("../../data/soft_iron.nu");

/// Monotone piecewise-cubic Hermite representation of `nu(B)`, slopes limited
/// with the Fritsch-Carlson rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluctivitySpline {
    b: Vec<f64>,
    nu: Vec<f64>,
    slopes: Vec<f64>,
    extrapolation_slope: f64,
    ceiling: f64,
}

impl ReluctivitySpline {
    pub fn new(b: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if b.len() != nu.len() {
            return Err(Error::Material(format!(
                "{} flux densities but {} reluctivities",
                b.len(),
                nu.len()
            )));
        }
        if b.len() < 2 {
            return Err(Error::Material("spline needs at least two knots".into()));
        }
        if b[0] < 0.0 || b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Material("knot flux densities must be finite and >= 0".into()));
        }
        if b.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Material(
                "knot flux densities must be strictly increasing".into(),
            ));
        }
        if nu.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Material("knot reluctivities must be finite and > 0".into()));
        }
        let slopes = fritsch_carlson_slopes(&b, &nu);
        let last = *nu.last().unwrap();
        Ok(ReluctivitySpline {
            extrapolation_slope: slopes.last().copied().unwrap().max(0.0),
            ceiling: last.max(NU0),
            b,
            nu,
            slopes,
        })
    }

    /// The bundled synthetic soft-iron table.
    pub fn default_soft_iron() -> Self {
        parse_table(DEFAULT_TABLE).expect("bundled reluctivity table is valid")
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.b, &self.nu)
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Value and derivative at `b >= 0`.
    pub fn eval(&self, b: f64) -> Result<(f64, f64)> {
        if !(b >= 0.0) {
            return Err(Error::NegativeFluxDensity(b));
        }
        Ok(self.eval_unchecked(b))
    }

    fn eval_unchecked(&self, b: f64) -> (f64, f64) {
        let n = self.b.len();
        let b_last = self.b[n - 1];
        if b >= b_last {
            let v = self.nu[n - 1] + self.extrapolation_slope * (b - b_last);
            return if v >= self.ceiling {
                (self.ceiling, 0.0)
            } else {
                (v, self.extrapolation_slope)
            };
        }
        if b < self.b[0] {
            return (self.nu[0], 0.0);
        }
        let k = self.b.partition_point(|&x| x <= b) - 1;
        let h = self.b[k + 1] - self.b[k];
        let s = (b - self.b[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1) = (self.nu[k], self.nu[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        // Written around y0 so flat segments evaluate exactly.
        let v = y0 + h01 * (y1 - y0) + h * (h10 * m0 + h11 * m1);
        let d01 = -6.0 * s2 + 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d11 = 3.0 * s2 - 2.0 * s;
        let dv = d01 * (y1 - y0) / h + d10 * m0 + d11 * m1;
        (v, dv)
    }
}

/// Three-point Gauss-Legendre on `[lo, hi]`, exact for quintics.
fn gauss3(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const X: f64 = 0.774_596_669_241_483_4;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    half * (5.0 / 9.0 * f(mid - half * X) + 8.0 / 9.0 * f(mid) + 5.0 / 9.0 * f(mid + half * X))
}

impl ReluctivitySpline {
    /// Magnetic energy density `int_0^b nu(s) s ds`, in J/m^3.
    pub fn energy_density(&self, b: f64) -> Result<f64> {
        if !(b >= 0.0) {
            return Err(Error::NegativeFluxDensity(b));
        }
        let h = |x: f64| self.eval_unchecked(x).0 * x;
        let b0 = self.b[0];
        if b <= b0 {
            return Ok(0.5 * self.nu[0] * b * b);
        }
        let mut total = 0.5 * self.nu[0] * b0 * b0;
        let n = self.b.len();
        for k in 0..n - 1 {
            let (lo, hi) = (self.b[k], self.b[k + 1]);
            if b <= lo {
                return Ok(total);
            }
            total += gauss3(lo, hi.min(b), h);
        }
        let last = self.b[n - 1];
        if b <= last {
            return Ok(total);
        }
        // Linear continuation up to the ceiling, constant beyond.
        let knee = if self.extrapolation_slope > 0.0 {
            last + (self.ceiling - self.nu[n - 1]) / self.extrapolation_slope
        } else if self.nu[n - 1] >= self.ceiling {
            last
        } else {
            f64::INFINITY
        };
        let linear_end = b.min(knee);
        if linear_end > last {
            total += gauss3(last, linear_end, h);
        }
        if b > knee {
            total += 0.5 * self.ceiling * (b * b - knee * knee);
        }
        Ok(total)
    }
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] > 0.0 {
            0.5 * (delta[k - 1] + delta[k])
        } else {
            0.0
        };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let alpha = m[k] / delta[k];
        let beta = m[k + 1] / delta[k];
        let r2 = alpha * alpha + beta * beta;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m[k] = tau * alpha * delta[k];
            m[k + 1] = tau * beta * delta[k];
        }
    }
    m
}

/// Parse a two-column `B nu` table. `#` starts a comment; blank lines are
/// ignored.
pub fn parse_table(text: &str) -> Result<ReluctivitySpline> {
    let mut b = Vec::new();
    let mut nu = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::Table {
                line: line_no,
                msg: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Table {
                line: line_no,
                msg: format!("`{s}`: {e}"),
            })
        };
        let (bv, nv) = (parse(cols[0])?, parse(cols[1])?);
        if !bv.is_finite() || !nv.is_finite() {
            return Err(Error::Table {
                line: line_no,
                msg: "non-finite value".into(),
            });
        }
        if let Some(&prev) = b.last() {
            if bv <= prev {
                return Err(Error::Table {
                    line: line_no,
                    msg: format!("B = {bv} does not increase (previous {prev})"),
                });
            }
        }
        b.push(bv);
        nu.push(nv);
    }
    ReluctivitySpline::new(b, nu)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reluctivity {
    Constant(f64),
    Spline(ReluctivitySpline),
}

impl Reluctivity {
    fn eval(&self, b: f64) -> Result<(f64, f64)> {
        match self {
            Reluctivity::Constant(v) => {
                if !(b >= 0.0) {
                    return Err(Error::NegativeFluxDensity(b));
                }
                Ok((*v, 0.0))
            }
            Reluctivity::Spline(s) => s.eval(b),
        }
    }

    fn energy_density(&self, b: f64) -> Result<f64> {
        match self {
            Reluctivity::Constant(v) => {
                if !(b >= 0.0) {
                    return Err(Error::NegativeFluxDensity(b));
                }
                Ok(0.5 * v * b * b)
            }
            Reluctivity::Spline(s) => s.energy_density(b),
        }
    }
}

/// Conductivity and reluctivity per region. Wire and insulator are
/// non-conducting vacuum; the shield conducts and may saturate.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialMap {
    shield_conductivity: f64,
    shield_reluctivity: Reluctivity,
}

impl MaterialMap {
    pub fn new(shield_conductivity: f64, shield_reluctivity: Reluctivity) -> Result<Self> {
        if !(shield_conductivity > 0.0 && shield_conductivity.is_finite()) {
            return Err(Error::Material(format!(
                "shield conductivity must be > 0, got {shield_conductivity}"
            )));
        }
        if let Reluctivity::Constant(v) = shield_reluctivity {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Material(format!("constant reluctivity must be > 0, got {v}")));
            }
        }
        Ok(MaterialMap {
            shield_conductivity,
            shield_reluctivity,
        })
    }

    /// 10 MS/m shield with the bundled soft-iron curve.
    pub fn nonlinear_default() -> Self {
        MaterialMap {
            shield_conductivity: 1.0e7,
            shield_reluctivity: Reluctivity::Spline(ReluctivitySpline::default_soft_iron()),
        }
    }

    /// Same shield, but with its reluctivity frozen at the small-field value.
    pub fn linearized(&self) -> Self {
        let nu = self.reluctivity(0.0, Region::Shield).map(|(v, _)| v).unwrap_or(NU0);
        MaterialMap {
            shield_conductivity: self.shield_conductivity,
            shield_reluctivity: Reluctivity::Constant(nu),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.shield_reluctivity, Reluctivity::Constant(_))
    }

    pub fn conductivity(&self, region: Region) -> f64 {
        match region {
            Region::Shield => self.shield_conductivity,
            Region::Wire | Region::Insulator => 0.0,
        }
    }

    /// Magnetic energy density `int_0^b nu(s) s ds`.
    pub fn energy_density(&self, b: f64, region: Region) -> Result<f64> {
        match region {
            Region::Shield => self.shield_reluctivity.energy_density(b),
            Region::Wire | Region::Insulator => {
                if !(b >= 0.0) {
                    return Err(Error::NegativeFluxDensity(b));
                }
                Ok(0.5 * NU0 * b * b)
            }
        }
    }

    /// `(nu, dnu/dB)` for flux density `b >= 0`.
    pub fn reluctivity(&self, b: f64, region: Region) -> Result<(f64, f64)> {
        match region {
            Region::Shield => self.shield_reluctivity.eval(b),
            Region::Wire | Region::Insulator => {
                if !(b >= 0.0) {
                    return Err(Error::NegativeFluxDensity(b));
                }
                Ok((NU0, 0.0))
            }
        }
    }
}
