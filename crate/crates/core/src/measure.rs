//! Positive measures on ℝⁿ: Lebesgue measure and the one-dimensional power
//! weight `dμ = x^{β-1} χ_{(0,∞)}(x) dx`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Which half-line a radial piece lives on (n = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Negative,
    Positive,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Negative => -1.0,
            Side::Positive => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Lebesgue,
    /// Density `x^{β-1}` on `(0, ∞)`, zero elsewhere. One-dimensional only.
    PowerWeight { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureConfig", into = "MeasureConfig")]
pub struct Measure {
    dim: usize,
    kind: MeasureKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureConfig {
    kind: String,
    #[serde(default = "one")]
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

fn one() -> usize {
    1
}

impl TryFrom<MeasureConfig> for Measure {
    type Error = Error;

    fn try_from(c: MeasureConfig) -> Result<Self> {
        match c.kind.as_str() {
            "lebesgue" => Measure::lebesgue(c.n),
            "power_weight" => {
                if c.n != 1 {
                    return Err(Error::invalid("power_weight measure requires n = 1"));
                }
                let beta = c
                    .beta
                    .ok_or_else(|| Error::invalid("power_weight measure requires beta"))?;
                Measure::power_weight(beta)
            }
            other => Err(Error::invalid(format!("unknown measure kind {other:?}"))),
        }
    }
}

impl From<Measure> for MeasureConfig {
    fn from(m: Measure) -> Self {
        match m.kind {
            MeasureKind::Lebesgue => MeasureConfig {
                kind: "lebesgue".into(),
                n: m.dim,
                beta: None,
            },
            MeasureKind::PowerWeight { beta } => MeasureConfig {
                kind: "power_weight".into(),
                n: 1,
                beta: Some(beta),
            },
        }
    }
}

/// A Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() {
            return Err(Error::invalid("ball center must have at least one coordinate"));
        }
        Ok(Ball { center, radius })
    }

    /// One-dimensional ball, i.e. the interval `(c - r, c + r)`.
    pub fn interval(center: f64, radius: f64) -> Result<Self> {
        Ball::new(vec![center], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => {
            let h = n as f64 / 2.0;
            std::f64::consts::PI.powf(h) / gamma(h + 1.0)
        }
    }
}

impl Measure {
    pub fn lebesgue(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Measure {
            dim: n,
            kind: MeasureKind::Lebesgue,
        })
    }

    pub fn power_weight(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("power weight needs beta > 0, got {beta}")));
        }
        Ok(Measure {
            dim: 1,
            kind: MeasureKind::PowerWeight { beta },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            MeasureKind::PowerWeight { beta } => Some(beta),
            MeasureKind::Lebesgue => None,
        }
    }

    pub fn is_lebesgue(&self) -> bool {
        self.kind == MeasureKind::Lebesgue
    }

    pub(crate) fn require_dim(&self, n: usize) -> Result<()> {
        if self.dim != n {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: n,
            });
        }
        Ok(())
    }

    /// Exponent κ of the density `u^κ` in `u = |x|` on the given side, or
    /// `None` where the measure vanishes. One-dimensional only.
    pub fn radial_density_exponent(&self, side: Side) -> Option<f64> {
        match (self.kind, side) {
            (MeasureKind::Lebesgue, _) => Some(0.0),
            (MeasureKind::PowerWeight { beta }, Side::Positive) => Some(beta - 1.0),
            (MeasureKind::PowerWeight { .. }, Side::Negative) => None,
        }
    }

    /// Mass of `{x : lo < |x| < hi, x on side}` for n = 1.
    pub fn radial_mass(&self, side: Side, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self.radial_density_exponent(side) {
            None => 0.0,
            Some(k) => crate::numeric::power_integral(k, lo, hi),
        }
    }

    /// Mass of the interval `(a, b)` (n = 1). Infinite endpoints are allowed.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut m = 0.0;
        if b > 0.0 {
            m += self.radial_mass(Side::Positive, a.max(0.0), b);
        }
        if a < 0.0 {
            m += self.radial_mass(Side::Negative, (-b).max(0.0), -a);
        }
        m
    }

    /// `ν(B)`, exact.
    pub fn ball_mass(&self, ball: &Ball) -> Result<f64> {
        self.require_dim(ball.dim())?;
        match self.kind {
            MeasureKind::Lebesgue => Ok(unit_ball_volume(self.dim) * ball.radius.powi(self.dim as i32)),
            MeasureKind::PowerWeight { .. } => {
                let c = ball.center[0];
                Ok(self.interval_mass(c - ball.radius, c + ball.radius))
            }
        }
    }

    /// `ν(Ω_t)` with `Ω_t = {2^{t-1} <= |x| < 2^t}`.
    pub fn annulus_mass(&self, t: i32) -> f64 {
        let lo = 2f64.powi(t - 1);
        let hi = 2f64.powi(t);
        match self.kind {
            MeasureKind::Lebesgue => {
                let n = self.dim as i32;
                unit_ball_volume(self.dim) * (hi.powi(n) - lo.powi(n))
            }
            MeasureKind::PowerWeight { .. } => self.radial_mass(Side::Positive, lo, hi),
        }
    }
}

/// Result of [`ball_growth_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub sup_ratio: f64,
    pub argmax_ball: Ball,
}

/// `sup_B ν(B) / m(B)^exponent` over a finite ball sample.
pub fn ball_growth_report(measure: &Measure, exponent: f64, balls: &[Ball]) -> Result<GrowthReport> {
    if !(exponent > 0.0) {
        return Err(Error::invalid(format!("growth exponent must be positive, got {exponent}")));
    }
    if balls.is_empty() {
        return Err(Error::invalid("ball sample is empty"));
    }
    let lebesgue = Measure::lebesgue(measure.dim())?;
    let mut best: Option<(f64, &Ball)> = None;
    for b in balls {
        let ratio = measure.ball_mass(b)? / lebesgue.ball_mass(b)?.powf(exponent);
        if best.is_none_or(|(r, _)| ratio > r) {
            best = Some((ratio, b));
        }
    }
    let (sup_ratio, ball) = best.expect("nonempty sample");
    Ok(GrowthReport {
        sup_ratio,
        argmax_ball: ball.clone(),
    })
}

/// Default one-dimensional ball sample: radii `2^{-k}..2^k`, centers
/// `{0} ∪ {2^{-k}..2^k}`.
pub fn default_ball_sample(k: i32) -> Vec<Ball> {
    let mut centers = vec![0.0];
    centers.extend((-k..=k).map(|j| 2f64.powi(j)));
    let mut out = Vec::new();
    for &c in &centers {
        for j in -k..=k {
            out.push(Ball {
                center: vec![c],
                radius: 2f64.powi(j),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_mass_examples() {
        let leb = Measure::lebesgue(1).unwrap();
        assert_eq!(leb.ball_mass(&Ball::interval(0.0, 3.0).unwrap()).unwrap(), 6.0);
        let pw = Measure::power_weight(0.5).unwrap();
        let m = pw.ball_mass(&Ball::interval(2.0, 2.0).unwrap()).unwrap();
        assert!((m - 4.0).abs() < 1e-14);
        let pw1 = Measure::power_weight(1.0).unwrap();
        assert_eq!(pw1.ball_mass(&Ball::interval(-1.0, 0.5).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let leb = Measure::lebesgue(2).unwrap();
        let err = leb.ball_mass(&Ball::interval(0.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn annulus_mass_examples() {
        let leb = Measure::lebesgue(1).unwrap();
        assert_eq!(leb.annulus_mass(0), 1.0);
        assert_eq!(leb.annulus_mass(1), 2.0);
        let pw1 = Measure::power_weight(1.0).unwrap();
        assert!((pw1.annulus_mass(1) - 1.0).abs() < 1e-15);
        let leb2 = Measure::lebesgue(2).unwrap();
        assert!((leb2.annulus_mass(1) - 3.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn power_weight_requires_positive_beta() {
        assert!(Measure::power_weight(0.0).is_err());
        assert!(Measure::power_weight(-1.0).is_err());
        assert!(Measure::lebesgue(0).is_err());
    }

    #[test]
    fn growth_report_origin_balls_constant() {
        let beta = 0.75;
        let pw = Measure::power_weight(beta).unwrap();
        let balls: Vec<Ball> = (-10..=10).map(|j| Ball::interval(0.0, 2f64.powi(j)).unwrap()).collect();
        let expected = 1.0 / (beta * 2f64.powf(beta));
        for b in &balls {
            let r = pw.ball_mass(b).unwrap() / (2.0 * b.radius).powf(beta);
            assert!((r / expected - 1.0).abs() < 1e-12);
        }
        let rep = ball_growth_report(&pw, beta, &balls).unwrap();
        assert!((rep.sup_ratio / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_report_lebesgue_identity() {
        let leb = Measure::lebesgue(1).unwrap();
        let rep = ball_growth_report(&leb, 1.0, &default_ball_sample(5)).unwrap();
        assert!((rep.sup_ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn growth_report_sup_at_origin_touching_ball() {
        // For β <= 1 the density is decreasing, so intervals with left end at
        // 0 carry the most mass; the ratio there is exactly 1/β.
        let beta = 0.5;
        let pw = Measure::power_weight(beta).unwrap();
        let rep = ball_growth_report(&pw, beta, &default_ball_sample(8)).unwrap();
        assert!(rep.sup_ratio <= 1.0 / beta * (1.0 + 1e-12));
        let b = &rep.argmax_ball;
        assert!(b.center[0] - b.radius <= 0.0 + 1e-15);
        assert!((rep.sup_ratio - 1.0 / beta).abs() < 1e-12);
    }

    #[test]
    fn growth_report_errors() {
        let leb = Measure::lebesgue(1).unwrap();
        assert!(ball_growth_report(&leb, 1.0, &[]).is_err());
        assert!(ball_growth_report(&leb, 0.0, &default_ball_sample(1)).is_err());
    }

    #[test]
    fn serde_shape() {
        let m: Measure = serde_json::from_str(r#"{"kind":"power_weight","n":1,"beta":0.75}"#).unwrap();
        assert_eq!(m.beta(), Some(0.75));
        let s = serde_json::to_string(&Measure::lebesgue(2).unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"lebesgue","n":2}"#);
        assert!(serde_json::from_str::<Measure>(r#"{"kind":"power_weight","n":2,"beta":1}"#).is_err());
    }
}
