use std::fmt;

use serde::{Deserialize, Serialize};

use super::cloud::{SrgCloud, SrgPoint};
use super::operator::Increment;
use crate::error::{Result, SrgError};
use crate::pairings::{pair, PairingSpec};

pub const DEFAULT_CERT_TOL: f64 = 1e-9;

/// Operator property with its parameter, each corresponding to a region of
/// the complex plane that must contain the left SRG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum Property {
    /// `|z| <= l`
    Lipschitz(f64),
    /// `Re z <= c`
    OneSided(f64),
    /// `Re z >= mu`
    StronglyMonotone(f64),
    /// `|z - 1/(2 gamma)| <= 1/(2 gamma)`
    Cocoercive(f64),
}

impl Property {
    pub fn parameter(&self) -> f64 {
        match *self {
            Property::Lipschitz(p)
            | Property::OneSided(p)
            | Property::StronglyMonotone(p)
            | Property::Cocoercive(p) => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Property::Lipschitz(_) => "lipschitz",
            Property::OneSided(_) => "one-sided",
            Property::StronglyMonotone(_) => "strongly-monotone",
            Property::Cocoercive(_) => "cocoercive",
        }
    }

    /// Build from a name as accepted by the CLI.
    pub fn from_name(name: &str, parameter: f64) -> Result<Self> {
        let p = match name {
            "lipschitz" => Property::Lipschitz(parameter),
            "one-sided" | "one_sided" => Property::OneSided(parameter),
            "strongly-monotone" | "strongly_monotone" | "monotone" => {
                Property::StronglyMonotone(parameter)
            }
            "cocoercive" => Property::Cocoercive(parameter),
            other => return Err(SrgError::InvalidParameter(format!("unknown property `{other}`"))),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.parameter();
        let ok = match self {
            Property::Lipschitz(_) | Property::Cocoercive(_) => p > 0.0 && p.is_finite(),
            Property::OneSided(_) => p.is_finite(),
            Property::StronglyMonotone(_) => p >= 0.0 && p.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SrgError::InvalidParameter(format!("{} parameter {p} out of range", self.name())))
        }
    }

    /// Whether a multi-valued direction (the point at infinity) breaks the property.
    fn rejects_infinity(&self) -> bool {
        matches!(self, Property::Lipschitz(_) | Property::Cocoercive(_))
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.parameter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every sampled point lies in the region. Evidence, not proof.
    HoldsOnSamples,
    /// A sampled point lies outside the region; this disproves the property.
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub property: Property,
    pub verdict: Verdict,
    /// Worst signed slack over the cloud (negative means outside the region).
    pub margin: f64,
    pub witness: Option<SrgPoint>,
    pub tolerance: f64,
    pub points_checked: usize,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnSamples
    }
}

/// Signed distance-like slack of `z` with respect to the property region;
/// nonnegative iff `z` lies in the region. Infinity points get `-inf` for
/// bounded regions and `+inf` for half-planes, where `u = 0` makes the
/// defining inequality trivial.
pub fn region_slack(p: &SrgPoint, property: Property) -> f64 {
    if p.is_infinity {
        return if property.rejects_infinity() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    match property {
        Property::Lipschitz(l) => l - p.gain,
        Property::OneSided(c) => c - p.re(),
        Property::StronglyMonotone(mu) => p.re() - mu,
        Property::Cocoercive(g) => {
            let r = 0.5 / g;
            r - (p.re() - r).hypot(p.im())
        }
    }
}

/// The defining pairing inequality evaluated on an increment `(u, v)`,
/// divided by `||u||^2` (or `||u||` for the Lipschitz bound). Its sign agrees
/// with that of [`region_slack`] on the corresponding left SRG point.
pub fn increment_slack(inc: &Increment, spec: PairingSpec, property: Property) -> Result<f64> {
    let nk = spec.norm_kind();
    let nu = inc.u.norm(nk);
    let nv = inc.v.norm(nk);
    if nu == 0.0 {
        return Ok(if property.rejects_infinity() && nv > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    let vu = pair(&inc.v, &inc.u, spec)?;
    let nu2 = nu * nu;
    Ok(match property {
        Property::Lipschitz(l) => l - nv / nu,
        Property::OneSided(c) => c - vu / nu2,
        Property::StronglyMonotone(mu) => vu / nu2 - mu,
        Property::Cocoercive(g) => (vu - g * nv * nv) / nu2,
    })
}

pub fn certify(cloud: &SrgCloud, property: Property) -> Result<CertificateReport> {
    certify_with_tol(cloud, property, DEFAULT_CERT_TOL)
}

pub fn certify_with_tol(cloud: &SrgCloud, property: Property, tol: f64) -> Result<CertificateReport> {
    property.validate()?;
    if !(tol >= 0.0) {
        return Err(SrgError::InvalidParameter(format!("tolerance {tol} must be nonnegative")));
    }
    if cloud.is_empty() {
        return Err(SrgError::InvalidParameter("cannot certify an empty cloud".into()));
    }
    let mut margin = f64::INFINITY;
    let mut worst = None;
    for p in &cloud.points {
        let s = region_slack(p, property);
        if s < margin || worst.is_none() {
            margin = s;
            worst = Some(*p);
        }
    }
    let verdict = if margin >= -tol {
        Verdict::HoldsOnSamples
    } else {
        Verdict::Violated
    };
    Ok(CertificateReport {
        property,
        verdict,
        margin,
        witness: if verdict == Verdict::Violated { worst } else { None },
        tolerance: tol,
        points_checked: cloud.len(),
    })
}

/// Sampled contraction factor `sup |z|`. Infinite when the cloud holds a
/// point at infinity.
pub fn contraction_factor(cloud: &SrgCloud) -> Result<f64> {
    cloud
        .max_gain()
        .ok_or_else(|| SrgError::InvalidParameter("contraction factor of an empty cloud".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Side;
    use crate::srg::cloud::SampleMeta;
    use std::f64::consts::PI;

    fn cloud(points: Vec<SrgPoint>) -> SrgCloud {
        SrgCloud::new(points, PairingSpec::L2Dot, Side::Left, SampleMeta::new("test", 1, 0))
    }

    #[test]
    fn identity_is_one_lipschitz_with_zero_margin() {
        let r = certify(&cloud(vec![SrgPoint::finite(1.0, 0.0); 3]), Property::Lipschitz(1.0)).unwrap();
        assert!(r.holds());
        assert_eq!(r.margin, 0.0);
        assert!(r.witness.is_none());
    }

    #[test]
    fn violation_reports_witness() {
        let bad = SrgPoint::finite(1.0, 0.75 * PI);
        let r = certify(&cloud(vec![SrgPoint::finite(1.0, 0.0), bad]), Property::StronglyMonotone(0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness, Some(bad));
        assert!(r.margin < -r.tolerance);
    }

    #[test]
    fn infinity_handling() {
        let c = cloud(vec![SrgPoint::infinity(), SrgPoint::finite(1.0, 0.0)]);
        assert!(!certify(&c, Property::Lipschitz(5.0)).unwrap().holds());
        assert!(!certify(&c, Property::Cocoercive(0.5)).unwrap().holds());
        assert!(certify(&c, Property::StronglyMonotone(0.5)).unwrap().holds());
        assert!(certify(&c, Property::OneSided(1.0)).unwrap().holds());
        assert_eq!(contraction_factor(&c).unwrap(), f64::INFINITY);
    }

    #[test]
    fn parameter_ranges() {
        let c = cloud(vec![SrgPoint::zero()]);
        assert!(certify(&c, Property::Lipschitz(0.0)).is_err());
        assert!(certify(&c, Property::StronglyMonotone(-1.0)).is_err());
        assert!(certify(&c, Property::Cocoercive(-2.0)).is_err());
        assert!(certify(&c, Property::OneSided(-3.0)).is_ok());
        assert!(certify(&cloud(vec![]), Property::OneSided(0.0)).is_err());
        assert!(contraction_factor(&cloud(vec![])).is_err());
        assert_eq!(contraction_factor(&c).unwrap(), 0.0);
    }

    #[test]
    fn cocoercive_disk_boundary() {
        // gamma = 1: disk centred at 1/2 with radius 1/2 passes through 0 and 1.
        let c = cloud(vec![SrgPoint::finite(1.0, 0.0), SrgPoint::zero(), SrgPoint::finite(0.5f64.sqrt(), PI / 4.0)]);
        let r = certify(&c, Property::Cocoercive(1.0)).unwrap();
        assert!(r.holds());
        assert!(r.margin.abs() < 1e-12);
    }

    #[test]
    fn property_names_round_trip() {
        for p in [
            Property::Lipschitz(0.7),
            Property::OneSided(-1.0),
            Property::StronglyMonotone(0.0),
            Property::Cocoercive(2.0),
        ] {
            assert_eq!(Property::from_name(p.name(), p.parameter()).unwrap(), p);
        }
        assert!(Property::from_name("bogus", 1.0).is_err());
    }
}
