//! Polygon classes and their per-model constants.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolygonClass {
    Rectangles,
    Squares,
    Ferrers,
    Staircase,
    DirectedConvex,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown polygon class `{0}` (expected rectangles, squares, ferrers, staircase or directed_convex)")]
pub struct UnknownClass(pub String);

impl PolygonClass {
    pub const ALL: [PolygonClass; 5] = [
        PolygonClass::Rectangles,
        PolygonClass::Squares,
        PolygonClass::Ferrers,
        PolygonClass::Staircase,
        PolygonClass::DirectedConvex,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PolygonClass::Rectangles => "rectangles",
            PolygonClass::Squares => "squares",
            PolygonClass::Ferrers => "ferrers",
            PolygonClass::Staircase => "staircase",
            PolygonClass::DirectedConvex => "directed_convex",
        }
    }
}

impl fmt::Display for PolygonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PolygonClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rectangles" => Ok(PolygonClass::Rectangles),
            "squares" => Ok(PolygonClass::Squares),
            "ferrers" => Ok(PolygonClass::Ferrers),
            "staircase" => Ok(PolygonClass::Staircase),
            "directed_convex" | "directed-convex" | "dirconvex" => Ok(PolygonClass::DirectedConvex),
            other => Err(UnknownClass(other.to_string())),
        }
    }
}

/// Location of the dominant singularity of `P(x,1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum CriticalPoint {
    Exact(BigRational),
    Estimate(f64),
}

impl CriticalPoint {
    pub fn to_f64(&self) -> f64 {
        match self {
            CriticalPoint::Exact(r) => ratio_to_f64(r),
            CriticalPoint::Estimate(v) => *v,
        }
    }
}

/// Closed form of the perimeter generating function `g_0(x) = P(x,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum G0ClosedForm {
    /// `x²/(1−x)²`
    Rectangles,
    /// `x²/(1−x²)`
    Squares,
    /// `x²/(1−2x)`
    Ferrers,
    /// `(1−2x−√(1−4x))/2`
    Staircase,
    /// `x²/√(1−4x)`
    DirectedConvex,
}

impl G0ClosedForm {
    pub fn expression(self) -> &'static str {
        match self {
            G0ClosedForm::Rectangles => "x^2/(1-x)^2",
            G0ClosedForm::Squares => "x^2/(1-x^2)",
            G0ClosedForm::Ferrers => "x^2/(1-2x)",
            G0ClosedForm::Staircase => "(1-2x-sqrt(1-4x))/2",
            G0ClosedForm::DirectedConvex => "x^2/sqrt(1-4x)",
        }
    }

    /// Value at `x`, `None` where the closed form diverges.
    pub fn eval(self, x: f64) -> Option<f64> {
        let v = match self {
            G0ClosedForm::Rectangles => {
                if x >= 1.0 {
                    return None;
                }
                x * x / ((1.0 - x) * (1.0 - x))
            }
            G0ClosedForm::Squares => {
                if x >= 1.0 {
                    return None;
                }
                x * x / (1.0 - x * x)
            }
            G0ClosedForm::Ferrers => {
                if x >= 0.5 {
                    return None;
                }
                x * x / (1.0 - 2.0 * x)
            }
            G0ClosedForm::Staircase => {
                if x > 0.25 {
                    return None;
                }
                (1.0 - 2.0 * x - (1.0 - 4.0 * x).sqrt()) / 2.0
            }
            G0ClosedForm::DirectedConvex => {
                if x >= 0.25 {
                    return None;
                }
                x * x / (1.0 - 4.0 * x).sqrt()
            }
        };
        Some(v)
    }
}

/// Exponents and growth constants of one class.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub class: PolygonClass,
    pub x_c: CriticalPoint,
    pub theta: BigRational,
    pub phi: BigRational,
    /// Nonzero counts satisfy `growth_a·m ≤ n`.
    pub growth_a: BigRational,
    /// Nonzero counts satisfy `n ≤ growth_b·m²`.
    pub growth_b: BigRational,
    pub g0_closed_form: G0ClosedForm,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl ModelSpec {
    pub fn of(class: PolygonClass) -> ModelSpec {
        let (x_c, theta, phi, g0) = match class {
            PolygonClass::Rectangles => (rat(1, 1), rat(-1, 1), rat(1, 2), G0ClosedForm::Rectangles),
            PolygonClass::Squares => (rat(1, 1), rat(-1, 2), rat(1, 2), G0ClosedForm::Squares),
            PolygonClass::Ferrers => (rat(1, 2), rat(-1, 2), rat(1, 2), G0ClosedForm::Ferrers),
            PolygonClass::Staircase => (rat(1, 4), rat(1, 3), rat(2, 3), G0ClosedForm::Staircase),
            PolygonClass::DirectedConvex => (rat(1, 4), rat(-1, 3), rat(2, 3), G0ClosedForm::DirectedConvex),
        };
        ModelSpec {
            class,
            x_c: CriticalPoint::Exact(x_c),
            theta,
            phi,
            growth_a: rat(1, 2),
            growth_b: rat(1, 4),
            g0_closed_form: g0,
        }
    }

    /// `γ_0 = −θ/φ`.
    pub fn gamma0(&self) -> BigRational {
        -(&self.theta / &self.phi)
    }

    /// Smallest area of a polygon with half-perimeter `m ≥ 2`.
    pub fn min_area(&self, m: u64) -> u64 {
        match self.class {
            PolygonClass::Squares => (m / 2) * (m / 2),
            _ => m.saturating_sub(1),
        }
    }

    /// Upper bound on the row sum `Σ_n p_{m,n}` used for series tail bounds.
    pub fn row_sum_bound(&self, m: u64) -> f64 {
        if m < 2 {
            return 0.0;
        }
        let e = (m - 2) as f64;
        match self.class {
            PolygonClass::Rectangles => (m - 1) as f64,
            PolygonClass::Squares => {
                if m % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            PolygonClass::Ferrers => 2f64.powf(e),
            PolygonClass::Staircase | PolygonClass::DirectedConvex => 4f64.powf(e),
        }
    }

    /// Checks the growth window `A·m ≤ n ≤ B·m²`.
    pub fn in_growth_window(&self, m: u64, n: u64) -> bool {
        let lhs = &self.growth_a * BigInt::from(m);
        let rhs = &self.growth_b * BigInt::from(m * m);
        let n = BigRational::from_integer(BigInt::from(n));
        lhs <= n && n <= rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for c in PolygonClass::ALL {
            assert_eq!(c.tag().parse::<PolygonClass>().unwrap(), c);
        }
        assert!("convex".parse::<PolygonClass>().is_err());
    }

    #[test]
    fn exponent_constraints() {
        for c in PolygonClass::ALL {
            let s = ModelSpec::of(c);
            let xc = s.x_c.to_f64();
            assert!(xc > 0.0 && xc <= 1.0);
            let phi = ratio_to_f64(&s.phi);
            assert!((0.5..=1.0).contains(&phi));
        }
        assert_eq!(ModelSpec::of(PolygonClass::Staircase).gamma0(), rat(-1, 2));
        assert_eq!(ModelSpec::of(PolygonClass::Rectangles).gamma0(), rat(2, 1));
        assert_eq!(ModelSpec::of(PolygonClass::DirectedConvex).gamma0(), rat(1, 2));
    }

    #[test]
    fn staircase_g0_at_critical_point() {
        let v = G0ClosedForm::Staircase.eval(0.25).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert!(G0ClosedForm::DirectedConvex.eval(0.25).is_none());
    }
}
