use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{sample_increments, Increment, Operator};
use crate::error::Result;
use crate::geometry::{clamp_cos, raw_left_cos, Side};
use crate::pairings::PairingSpec;
use crate::sampling::{try_map_slice, ExecMode, IncrementSampler};

/// Relative threshold below which an increment counts as zero.
pub const ZERO_INCREMENT_TOL: f64 = 1e-12;

/// One point `gain * e^{+/- i phase}` of a directional SRG. Only the
/// upper-half-plane representative is stored (`phase` in `[0, pi]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrgPoint {
    pub gain: f64,
    pub phase: f64,
    pub is_infinity: bool,
    /// Index of the generating sample; not persisted.
    #[serde(skip)]
    pub sample: Option<usize>,
}

impl SrgPoint {
    pub fn finite(gain: f64, phase: f64) -> Self {
        SrgPoint {
            gain,
            phase,
            is_infinity: false,
            sample: None,
        }
    }

    pub fn infinity() -> Self {
        SrgPoint {
            gain: f64::INFINITY,
            phase: 0.0,
            is_infinity: true,
            sample: None,
        }
    }

    pub fn zero() -> Self {
        Self::finite(0.0, 0.0)
    }

    /// Upper-half representative of `z` (or of its conjugate).
    pub fn from_complex(z: Complex64) -> Self {
        Self::finite(z.norm(), z.im.abs().atan2(z.re))
    }

    pub fn with_sample(mut self, k: usize) -> Self {
        self.sample = Some(k);
        self
    }

    pub fn re(&self) -> f64 {
        if self.is_infinity {
            f64::INFINITY
        } else {
            self.gain * self.phase.cos()
        }
    }

    pub fn im(&self) -> f64 {
        if self.is_infinity {
            f64::INFINITY
        } else {
            self.gain * self.phase.sin()
        }
    }

    pub fn modulus(&self) -> f64 {
        self.gain
    }

    pub fn to_complex(&self) -> Option<Complex64> {
        (!self.is_infinity).then(|| Complex64::new(self.re(), self.im()))
    }

    /// Both conjugates `gain e^{+i phase}` and `gain e^{-i phase}`.
    pub fn conjugate_pair(&self) -> Option<[Complex64; 2]> {
        self.to_complex().map(|z| [z, z.conj()])
    }

    /// Same gain, phase and infinity flag, ignoring provenance.
    pub fn same_point(&self, other: &SrgPoint) -> bool {
        self.is_infinity == other.is_infinity
            && (self.is_infinity || (self.gain == other.gain && self.phase == other.phase))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub sampler: String,
    pub n: usize,
    pub seed: u64,
}

impl SampleMeta {
    pub fn new(sampler: impl Into<String>, n: usize, seed: u64) -> Self {
        SampleMeta {
            sampler: sampler.into(),
            n,
            seed,
        }
    }
}

/// Finite multiset of SRG points sharing a pairing and a side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrgCloud {
    pub points: Vec<SrgPoint>,
    pub spec: PairingSpec,
    pub side: Side,
    pub meta: SampleMeta,
}

impl SrgCloud {
    pub fn new(points: Vec<SrgPoint>, spec: PairingSpec, side: Side, meta: SampleMeta) -> Self {
        SrgCloud {
            points,
            spec,
            side,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn finite_points(&self) -> impl Iterator<Item = &SrgPoint> {
        self.points.iter().filter(|p| !p.is_infinity)
    }

    pub fn infinity_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_infinity).count()
    }

    pub fn min_re(&self) -> Option<f64> {
        self.finite_points().map(SrgPoint::re).reduce(f64::min)
    }

    pub fn max_re(&self) -> Option<f64> {
        self.finite_points().map(SrgPoint::re).reduce(f64::max)
    }

    /// Largest gain; infinite if the cloud holds a point at infinity.
    pub fn max_gain(&self) -> Option<f64> {
        self.points.iter().map(|p| p.gain).reduce(f64::max)
    }

    /// Conjugate-symmetric export: two complex numbers per finite point.
    pub fn to_complex_pairs(&self) -> Vec<Complex64> {
        self.finite_points()
            .filter_map(SrgPoint::conjugate_pair)
            .flatten()
            .collect()
    }

    /// Index of each point by its generating sample, when provenance is present.
    pub fn by_sample(&self) -> std::collections::HashMap<usize, &SrgPoint> {
        self.points
            .iter()
            .filter_map(|p| p.sample.map(|k| (k, p)))
            .collect()
    }

    /// Multiset equality of the stored points (provenance ignored).
    pub fn same_points(&self, other: &SrgCloud) -> bool {
        if self.points.len() != other.points.len() {
            return false;
        }
        let key = |p: &SrgPoint| (p.is_infinity, p.gain.to_bits(), p.phase.to_bits());
        let mut a: Vec<_> = self.points.iter().map(key).collect();
        let mut b: Vec<_> = other.points.iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// SRG point of one increment, or `None` for the excluded `(0, 0)` pair.
///
/// `u` numerically zero with `v` nonzero gives the point at infinity;
/// `v = 0` with `u` nonzero gives gain 0, phase 0.
pub fn point_from_increment(inc: &Increment, spec: PairingSpec, side: Side) -> Result<Option<SrgPoint>> {
    inc.u.check_same_len(&inc.v)?;
    let nk = spec.norm_kind();
    let nu = inc.u.norm(nk);
    let nv = inc.v.norm(nk);
    let u_zero = nu < ZERO_INCREMENT_TOL * inc.input_scale;
    let v_zero = nv < ZERO_INCREMENT_TOL * inc.output_scale;
    if u_zero && v_zero {
        return Ok(None);
    }
    if u_zero {
        return Ok(Some(SrgPoint::infinity()));
    }
    if nv == 0.0 {
        return Ok(Some(SrgPoint::zero()));
    }
    let raw = match side {
        Side::Left => raw_left_cos(&inc.u, &inc.v, spec),
        Side::Right => raw_left_cos(&inc.v, &inc.u, spec),
    };
    let (c, _) = clamp_cos(raw)?;
    Ok(Some(SrgPoint::finite(nv / nu, c.acos())))
}

/// Directional SRG cloud of an explicit increment set. Provenance of each
/// point is its index in `increments`.
pub fn srg_from_increments(
    increments: &[Increment],
    spec: PairingSpec,
    side: Side,
    meta: SampleMeta,
    mode: ExecMode,
) -> Result<SrgCloud> {
    let points = try_map_slice(mode, increments, |k, inc| {
        Ok(point_from_increment(inc, spec, side)?.map(|p| p.with_sample(k)))
    })?;
    Ok(SrgCloud::new(points.into_iter().flatten().collect(), spec, side, meta))
}

/// Sampled directional SRG of `op` from `count` seeded increments.
pub fn sample_srg(
    op: &Operator,
    spec: PairingSpec,
    side: Side,
    sampler: &IncrementSampler,
    count: usize,
    seed: u64,
) -> Result<SrgCloud> {
    sample_srg_with(op, spec, side, sampler, count, seed, ExecMode::default())
}

pub fn sample_srg_with(
    op: &Operator,
    spec: PairingSpec,
    side: Side,
    sampler: &IncrementSampler,
    count: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<SrgCloud> {
    if count == 0 {
        return Err(crate::error::SrgError::InvalidParameter("sample count must be at least 1".into()));
    }
    let incs = sample_increments(op, sampler, count, seed, mode)?;
    let meta = SampleMeta::new(
        if op.is_evaluatable() { sampler.id() } else { "graph-pairs" },
        count,
        seed,
    );
    srg_from_increments(&incs, spec, side, meta, mode)
}

/// Reflect a phase through the origin: `-z` has argument `pi - phase` in the upper half.
pub(crate) fn reflected_phase(phase: f64) -> f64 {
    PI - phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairings::Vector;
    use crate::sampling::SamplerKind;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn identity_and_negative_identity() {
        let s = IncrementSampler::new(SamplerKind::Mixed);
        for spec in PairingSpec::ALL {
            let c = sample_srg(&Operator::identity(3), spec, Side::Left, &s, 400, 1).unwrap();
            assert!(!c.is_empty());
            for p in &c.points {
                assert_abs_diff_eq!(p.gain, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(p.phase, 0.0, epsilon = 1e-6);
            }
            if spec.is_sip() {
                let neg = Operator::identity(3).scaled(-1.0);
                let c = sample_srg(&neg, spec, Side::Left, &s, 400, 1).unwrap();
                for p in &c.points {
                    assert_abs_diff_eq!(p.gain, 1.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(p.phase, PI, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_pair_conventions() {
        let spec = PairingSpec::L2Dot;
        let z = Vector::zeros(2);
        let nz = v(&[1.0, 2.0]);
        assert_eq!(point_from_increment(&Increment::new(z.clone(), z.clone()), spec, Side::Left).unwrap(), None);
        let inf = point_from_increment(&Increment::new(z.clone(), nz.clone()), spec, Side::Left).unwrap().unwrap();
        assert!(inf.is_infinity);
        let zero = point_from_increment(&Increment::new(nz, z), spec, Side::Left).unwrap().unwrap();
        assert_eq!((zero.gain, zero.phase, zero.is_infinity), (0.0, 0.0, false));
    }

    #[test]
    fn multivalued_graph_yields_infinity() {
        let x = v(&[1.0, 0.0]);
        let g = Operator::finite_graph(vec![(x.clone(), v(&[0.0, 1.0])), (x.clone(), v(&[2.0, 1.0]))]).unwrap();
        let c = sample_srg(&g, PairingSpec::L1Sign, Side::Left, &IncrementSampler::new(SamplerKind::Gaussian), 64, 5)
            .unwrap();
        assert!(c.infinity_count() > 0);
        assert!(c.points.iter().all(|p| p.is_infinity));
        assert_eq!(c.max_gain(), Some(f64::INFINITY));
    }

    #[test]
    fn complex_export_is_conjugate_symmetric() {
        let c = SrgCloud::new(
            vec![SrgPoint::finite(2.0, 1.0), SrgPoint::infinity()],
            PairingSpec::L2Dot,
            Side::Left,
            SampleMeta::new("test", 2, 0),
        );
        let z = c.to_complex_pairs();
        assert_eq!(z.len(), 2);
        assert_eq!(z[0], z[1].conj());
        let back = SrgPoint::from_complex(z[1]);
        assert_abs_diff_eq!(back.gain, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.phase, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluation_errors_carry_sample_index() {
        let bad = Operator::pointwise(2, "bad", |x: &Vector| {
            if x[0] > 0.0 {
                Err(crate::error::SrgError::InvalidParameter("positive".into()))
            } else {
                Ok(x.clone())
            }
        });
        let err = sample_srg(&bad, PairingSpec::L2Dot, Side::Left, &IncrementSampler::new(SamplerKind::Gaussian), 50, 0)
            .unwrap_err();
        assert!(matches!(err, crate::error::SrgError::Evaluation { .. }));
    }
}
