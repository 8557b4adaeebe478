use serde::{Deserialize, Serialize};

use super::cloud::{reflected_phase, srg_from_increments, SampleMeta, SrgCloud, SrgPoint};
use super::operator::{increments_at, sample_increments, Increment, Operator};
use crate::error::{Result, SrgError};
use crate::geometry::{clamp_cos, raw_left_cos, Side};
use crate::pairings::{PairingSpec, Vector};
use crate::sampling::{try_map_slice, ExecMode, IncrementSampler};

/// Slack multiplier applied to an empirical alignment defect before it is
/// used in composition containment checks.
pub const SIGMA_SLACK: f64 = 1.1;
pub const DEFAULT_CALCULUS_TOL: f64 = 1e-9;

/// `alpha * S` for a left cloud under a SIP.
pub fn srg_scale(cloud: &SrgCloud, alpha: f64) -> Result<SrgCloud> {
    cloud.spec.require_sip()?;
    if cloud.side != Side::Left {
        return Err(SrgError::Unsupported("scaling applies to left SRGs".into()));
    }
    if !alpha.is_finite() {
        return Err(SrgError::InvalidParameter(format!("scale factor {alpha} is not finite")));
    }
    let points = cloud
        .points
        .iter()
        .filter_map(|p| {
            if alpha == 0.0 {
                // 0 * A is single-valued, so vertical increments vanish.
                return (!p.is_infinity).then_some(SrgPoint { gain: 0.0, phase: 0.0, ..*p });
            }
            if p.is_infinity {
                return Some(*p);
            }
            let gain = p.gain * alpha.abs();
            let phase = if alpha < 0.0 && gain > 0.0 {
                reflected_phase(p.phase)
            } else {
                p.phase
            };
            Some(SrgPoint { gain, phase, ..*p })
        })
        .collect();
    Ok(SrgCloud::new(points, cloud.spec, Side::Left, cloud.meta.clone()))
}

/// `S^{-1} = { 1 / conj(z) }`: turns the right SRG of `A` into the left SRG
/// of `A^{-1}`. Gains invert, phases are kept, `0` and `inf` swap.
pub fn srg_invert(cloud: &SrgCloud) -> Result<SrgCloud> {
    if cloud.side != Side::Right {
        return Err(SrgError::Unsupported("inversion takes a right SRG".into()));
    }
    let points = cloud
        .points
        .iter()
        .map(|p| {
            if p.is_infinity {
                SrgPoint { gain: 0.0, phase: 0.0, is_infinity: false, sample: p.sample }
            } else if p.gain == 0.0 {
                SrgPoint { sample: p.sample, ..SrgPoint::infinity() }
            } else {
                SrgPoint { gain: 1.0 / p.gain, ..*p }
            }
        })
        .collect();
    Ok(SrgCloud::new(points, cloud.spec, Side::Left, cloud.meta.clone()))
}

fn check_compatible(s1: &SrgCloud, s2: &SrgCloud) -> Result<()> {
    if s1.spec != s2.spec {
        return Err(SrgError::CloudMismatch(format!("pairings differ: {} vs {}", s1.spec, s2.spec)));
    }
    if s1.side != s2.side {
        return Err(SrgError::CloudMismatch(format!("sides differ: {} vs {}", s1.side, s2.side)));
    }
    Ok(())
}

/// `z` belongs to `{z1} ⊞ {z2}` within `tol`.
pub fn boxplus_pair(z: &SrgPoint, z1: &SrgPoint, z2: &SrgPoint, tol: f64) -> bool {
    if z.is_infinity {
        return z1.is_infinity || z2.is_infinity;
    }
    if z1.is_infinity || z2.is_infinity {
        return false;
    }
    let m = z.gain;
    (z.re() - z1.re() - z2.re()).abs() <= tol
        && (z1.gain - z2.gain).abs() - tol <= m
        && m <= z1.gain + z2.gain + tol
}

/// `z` belongs to `{z1} ⋄ {z2}` for alignment defect `sigma`, within `tol`.
pub fn diamond_pair(z: &SrgPoint, z1: &SrgPoint, z2: &SrgPoint, sigma: f64, tol: f64) -> bool {
    if z.is_infinity {
        return z1.is_infinity || z2.is_infinity;
    }
    if z1.is_infinity || z2.is_infinity {
        return false;
    }
    (z.gain - z1.gain * z2.gain).abs() <= tol && (z.re() - z1.re() * z2.re()).abs() <= sigma * z.gain + tol
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(SrgError::InvalidParameter(format!("tolerance {tol} must be finite and nonnegative")))
    }
}

fn validate_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(SrgError::InvalidParameter(format!("sigma {sigma} must be finite and nonnegative")))
    }
}

/// Exhaustive membership test `z ∈ S1 ⊞ S2`.
pub fn boxplus_contains(s1: &SrgCloud, s2: &SrgCloud, z: &SrgPoint, tol: f64) -> Result<bool> {
    check_compatible(s1, s2)?;
    validate_tol(tol)?;
    Ok(s1
        .points
        .iter()
        .any(|z1| s2.points.iter().any(|z2| boxplus_pair(z, z1, z2, tol))))
}

/// Exhaustive membership test `z ∈ S1 ⋄ S2`, where `sigma` is the alignment
/// defect of the outer operator (the one whose cloud is `S1`).
pub fn diamond_contains(s1: &SrgCloud, s2: &SrgCloud, sigma: f64, z: &SrgPoint, tol: f64) -> Result<bool> {
    check_compatible(s1, s2)?;
    validate_tol(tol)?;
    validate_sigma(sigma)?;
    Ok(s1
        .points
        .iter()
        .any(|z1| s2.points.iter().any(|z2| diamond_pair(z, z1, z2, sigma, tol))))
}

/// Alignment defect `|| v/||v|| - cos_L(u, v) u/||u|| ||` of one increment,
/// or `None` when either side vanishes.
pub fn alignment_defect(inc: &Increment, spec: PairingSpec) -> Result<Option<f64>> {
    inc.u.check_same_len(&inc.v)?;
    let nk = spec.norm_kind();
    let nu = inc.u.norm(nk);
    let nv = inc.v.norm(nk);
    if nu == 0.0 || nv == 0.0 {
        return Ok(None);
    }
    let (c, _) = clamp_cos(raw_left_cos(&inc.u, &inc.v, spec))?;
    let d = &inc.v.scaled(1.0 / nv) - &inc.u.scaled(c / nu);
    Ok(Some(d.norm(nk)))
}

/// Largest alignment defect over an increment set (0 if every increment is degenerate).
pub fn sigma_from_increments(increments: &[Increment], spec: PairingSpec) -> Result<f64> {
    spec.require_sip()?;
    let mut sigma: f64 = 0.0;
    for inc in increments {
        if let Some(d) = alignment_defect(inc, spec)? {
            sigma = sigma.max(d);
        }
    }
    Ok(sigma)
}

/// Empirical `sigma_A` from `count` seeded increments. This is a lower bound
/// on the true supremum.
pub fn estimate_sigma(
    op: &Operator,
    spec: PairingSpec,
    sampler: &IncrementSampler,
    count: usize,
    seed: u64,
) -> Result<f64> {
    spec.require_sip()?;
    if count == 0 {
        return Err(SrgError::InvalidParameter("sample count must be at least 1".into()));
    }
    let incs = sample_increments(op, sampler, count, seed, ExecMode::default())?;
    sigma_from_increments(&incs, spec)
}

/// Clouds of two operators and of their sum or composition built on one
/// shared set of base points, so that sample `k` of every cloud comes from
/// the same draw.
#[derive(Debug, Clone)]
pub struct MatchedClouds {
    /// `A` (outer operator for compositions).
    pub first: SrgCloud,
    /// `B` (inner operator for compositions).
    pub second: SrgCloud,
    pub combined: SrgCloud,
    /// Increments of `A` used to build `first`.
    pub first_increments: Vec<Increment>,
}

/// Matched clouds of `A`, `B` and `A + B` at the same base points.
pub fn matched_sum(
    a: &Operator,
    b: &Operator,
    spec: PairingSpec,
    points: &[(Vector, Vector)],
    meta: SampleMeta,
    mode: ExecMode,
) -> Result<MatchedClouds> {
    let sum = Operator::sum(a, b)?;
    let ia = increments_at(a, points, mode)?;
    let ib = increments_at(b, points, mode)?;
    let is = increments_at(&sum, points, mode)?;
    Ok(MatchedClouds {
        first: srg_from_increments(&ia, spec, Side::Left, meta.clone(), mode)?,
        second: srg_from_increments(&ib, spec, Side::Left, meta.clone(), mode)?,
        combined: srg_from_increments(&is, spec, Side::Left, meta, mode)?,
        first_increments: ia,
    })
}

/// Matched clouds for `A B`: `B` at `(x1, x2)`, `A` at `(B x1, B x2)`, and
/// `A B` at `(x1, x2)`.
pub fn matched_composition(
    a: &Operator,
    b: &Operator,
    spec: PairingSpec,
    points: &[(Vector, Vector)],
    meta: SampleMeta,
    mode: ExecMode,
) -> Result<MatchedClouds> {
    let ab = Operator::compose(a, b)?;
    let ib = increments_at(b, points, mode)?;
    let inner: Vec<(Vector, Vector)> = try_map_slice(mode, points, |k, (x1, x2)| {
        let ev = |x: &Vector| {
            b.apply(x).map_err(|e| SrgError::Evaluation { sample: k, reason: e.to_string() })
        };
        Ok((ev(x1)?, ev(x2)?))
    })?;
    let ia = increments_at(a, &inner, mode)?;
    let iab = increments_at(&ab, points, mode)?;
    Ok(MatchedClouds {
        first: srg_from_increments(&ia, spec, Side::Left, meta.clone(), mode)?,
        second: srg_from_increments(&ib, spec, Side::Left, meta.clone(), mode)?,
        combined: srg_from_increments(&iab, spec, Side::Left, meta, mode)?,
        first_increments: ia,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CalculusRule {
    Boxplus,
    Diamond { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub rule: CalculusRule,
    pub tested: usize,
    pub contained: usize,
    /// Points confirmed by their own matched sample, without a search.
    pub matched_hits: usize,
    pub first_failure: Option<SrgPoint>,
    pub tolerance: f64,
}

impl ContainmentReport {
    pub fn all_contained(&self) -> bool {
        self.contained == self.tested
    }
}

/// Check every point of `combined` against `S1 ⊞ S2` or `S1 ⋄ S2`. Each point
/// is first tested against the points sharing its sample index and only
/// falls back to the exhaustive search when that fails.
pub fn containment_report(
    combined: &SrgCloud,
    s1: &SrgCloud,
    s2: &SrgCloud,
    rule: CalculusRule,
    tol: f64,
) -> Result<ContainmentReport> {
    check_compatible(s1, s2)?;
    check_compatible(combined, s1)?;
    validate_tol(tol)?;
    if let CalculusRule::Diamond { sigma } = rule {
        validate_sigma(sigma)?;
    }
    let m1 = s1.by_sample();
    let m2 = s2.by_sample();
    let member = |z: &SrgPoint, z1: &SrgPoint, z2: &SrgPoint| match rule {
        CalculusRule::Boxplus => boxplus_pair(z, z1, z2, tol),
        CalculusRule::Diamond { sigma } => diamond_pair(z, z1, z2, sigma, tol),
    };
    let mut report = ContainmentReport {
        rule,
        tested: combined.len(),
        contained: 0,
        matched_hits: 0,
        first_failure: None,
        tolerance: tol,
    };
    for z in &combined.points {
        let matched = z
            .sample
            .and_then(|k| Some((m1.get(&k)?, m2.get(&k)?)))
            .is_some_and(|(z1, z2)| member(z, z1, z2));
        if matched {
            report.matched_hits += 1;
            report.contained += 1;
        } else if s1.points.iter().any(|z1| s2.points.iter().any(|z2| member(z, z1, z2))) {
            report.contained += 1;
        } else if report.first_failure.is_none() {
            report.first_failure = Some(*z);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cloud(points: Vec<SrgPoint>, spec: PairingSpec, side: Side) -> SrgCloud {
        SrgCloud::new(points, spec, side, SampleMeta::new("test", 1, 0))
    }

    fn one() -> SrgPoint {
        SrgPoint::finite(1.0, 0.0)
    }

    #[test]
    fn scaling_examples() {
        let c = cloud(vec![one(), SrgPoint::finite(2.0, 0.3)], PairingSpec::L1Sign, Side::Left);
        assert_eq!(srg_scale(&c, 1.0).unwrap(), c);
        let neg = srg_scale(&c, -1.0).unwrap();
        assert_eq!(neg.points[0].phase, PI);
        assert_eq!(neg.points[0].gain, 1.0);
        let zero = srg_scale(&c, 0.0).unwrap();
        assert!(zero.points.iter().all(|p| p.gain == 0.0 && p.phase == 0.0));
        assert!(srg_scale(&cloud(vec![one()], PairingSpec::LInfMax, Side::Left), 2.0).is_err());
        assert!(srg_scale(&cloud(vec![one()], PairingSpec::L2Dot, Side::Right), 2.0).is_err());
    }

    #[test]
    fn inversion_examples() {
        let c = cloud(
            vec![SrgPoint::finite(2.0, PI / 3.0), SrgPoint::zero(), SrgPoint::infinity()],
            PairingSpec::L2Dot,
            Side::Right,
        );
        let inv = srg_invert(&c).unwrap();
        assert_eq!(inv.side, Side::Left);
        assert_eq!(inv.points[0].gain, 0.5);
        assert_eq!(inv.points[0].phase, PI / 3.0);
        assert!(inv.points[1].is_infinity);
        assert_eq!(inv.points[2], SrgPoint::zero());
        assert!(srg_invert(&inv).is_err());
    }

    #[test]
    fn boxplus_examples() {
        let s1 = cloud(vec![one()], PairingSpec::L2Dot, Side::Left);
        let s2 = cloud(vec![SrgPoint::finite(1.0, PI / 2.0)], PairingSpec::L2Dot, Side::Left);
        assert!(boxplus_contains(&s1, &s1, &SrgPoint::finite(2.0, 0.0), 1e-9).unwrap());
        let z = SrgPoint::finite(2f64.sqrt(), PI / 4.0);
        assert!(boxplus_contains(&s1, &s2, &z, 1e-9).unwrap());
        assert!(!boxplus_contains(&s1, &s1, &SrgPoint::finite(3.0, 0.0), 1e-9).unwrap());
        let other = cloud(vec![one()], PairingSpec::L1Sign, Side::Left);
        assert!(boxplus_contains(&s1, &other, &z, 1e-9).is_err());
    }

    #[test]
    fn diamond_examples() {
        let s = cloud(vec![one()], PairingSpec::L2Dot, Side::Left);
        assert!(diamond_contains(&s, &s, 0.0, &one(), 1e-9).unwrap());
        let s1 = cloud(vec![SrgPoint::finite(2.0, 0.0)], PairingSpec::L2Dot, Side::Left);
        let s2 = cloud(vec![SrgPoint::finite(3.0, 0.0)], PairingSpec::L2Dot, Side::Left);
        assert!(diamond_contains(&s1, &s2, 0.0, &SrgPoint::finite(6.0, 0.0), 1e-9).unwrap());
        assert!(!diamond_contains(&s1, &s2, 0.0, &SrgPoint::finite(6.0, 1.0), 1e-9).unwrap());
        assert!(diamond_contains(&s1, &s2, -0.1, &one(), 1e-9).is_err());
    }

    #[test]
    fn infinity_membership() {
        let with_inf = cloud(vec![SrgPoint::infinity()], PairingSpec::L2Dot, Side::Left);
        let s = cloud(vec![one()], PairingSpec::L2Dot, Side::Left);
        assert!(boxplus_contains(&with_inf, &s, &SrgPoint::infinity(), 0.0).unwrap());
        assert!(!boxplus_contains(&s, &s, &SrgPoint::infinity(), 0.0).unwrap());
        assert!(diamond_contains(&s, &with_inf, 0.0, &SrgPoint::infinity(), 0.0).unwrap());
    }

    #[test]
    fn sigma_of_identity_and_negative_identity_vanishes() {
        let s = IncrementSampler::new(crate::sampling::SamplerKind::Mixed);
        for spec in [PairingSpec::L2Dot, PairingSpec::L1Sign, PairingSpec::LInfMinIndex] {
            assert!(estimate_sigma(&Operator::identity(3), spec, &s, 200, 3).unwrap() < 1e-12);
            let neg = Operator::identity(3).scaled(-1.0);
            assert!(estimate_sigma(&neg, spec, &s, 200, 3).unwrap() < 1e-12);
        }
        assert!(estimate_sigma(&Operator::identity(3), PairingSpec::LInfMax, &s, 10, 3).is_err());
    }
}
