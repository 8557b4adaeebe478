//! Vectors, lp norms, peak-index combinatorics and the regular pairings on
//! `R^n` equipped with the l1, l2 or l-infinity norm.
//!
//! Every pairing is written `pair(u, v)` with `u` in the first slot, the one
//! in which the pairing is subadditive. Compatibility with the norm means
//! `pair(x, x) == norm(x)^2`.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};

/// Dense real coordinate vector with at least one entry, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(SrgError::EmptyVector);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SrgError::NonFinite { index, value });
        }
        Ok(Vector(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// # Panics
    /// If `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "vector dimension must be positive");
        Vector(vec![0.0; n])
    }

    /// Standard basis vector `e_i` (0-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; vectors are never empty. Present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        self.map(|v| alpha * v)
    }

    pub fn check_same_len(&self, other: &Vector) -> Result<()> {
        if self.len() != other.len() {
            return Err(SrgError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.0.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => self.0.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::LInf => self.0.iter().fold(0.0, |m, v| v.abs().max(m)),
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = SrgError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

fn zip_with(a: &Vector, b: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    Vector(a.0.iter().zip(&b.0).map(|(&x, &y)| f(x, y)).collect())
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.map(|v| -v)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scaled(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    LInf,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        })
    }
}

/// Norm together with the regular pairing that governs all geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PairingSpec {
    /// Euclidean inner product on l2.
    L2Dot,
    /// Sign pairing `||v||_1 sign(v)^T u` on l1.
    L1Sign,
    /// Max pairing `max_{i in peaks(v)} u_i v_i` on l-infinity (upper JMT pairing, not a SIP).
    LInfMax,
    /// Min-index pairing `||v||_inf sign(v_m) u_m` on l-infinity, `m` the minimal peak index.
    LInfMinIndex,
}

impl PairingSpec {
    pub const ALL: [PairingSpec; 4] = [
        PairingSpec::L1Sign,
        PairingSpec::L2Dot,
        PairingSpec::LInfMax,
        PairingSpec::LInfMinIndex,
    ];

    pub fn norm_kind(self) -> NormKind {
        match self {
            PairingSpec::L2Dot => NormKind::L2,
            PairingSpec::L1Sign => NormKind::L1,
            PairingSpec::LInfMax | PairingSpec::LInfMinIndex => NormKind::LInf,
        }
    }

    /// Linear (not merely subadditive) in the first argument.
    pub fn is_sip(self) -> bool {
        !matches!(self, PairingSpec::LInfMax)
    }

    pub fn name(self) -> &'static str {
        match self {
            PairingSpec::L2Dot => "l2",
            PairingSpec::L1Sign => "l1",
            PairingSpec::LInfMax => "linf-max",
            PairingSpec::LInfMinIndex => "linf-min",
        }
    }

    pub fn require_sip(self) -> Result<()> {
        if self.is_sip() {
            Ok(())
        } else {
            Err(SrgError::NotSip(self.name()))
        }
    }
}

impl fmt::Display for PairingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairingSpec {
    type Err = SrgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(PairingSpec::L2Dot),
            "l1" => Ok(PairingSpec::L1Sign),
            "linf-max" | "linf" => Ok(PairingSpec::LInfMax),
            "linf-min" => Ok(PairingSpec::LInfMinIndex),
            other => Err(SrgError::InvalidParameter(format!(
                "unknown pairing spec {other:?} (expected l1, l2, linf-max or linf-min)"
            ))),
        }
    }
}

impl From<PairingSpec> for String {
    fn from(s: PairingSpec) -> String {
        s.name().to_string()
    }
}

impl TryFrom<String> for PairingSpec {
    type Error = SrgError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub fn norm(x: &Vector, spec: PairingSpec) -> f64 {
    x.norm(spec.norm_kind())
}

/// Componentwise sign with `sign(0) = 0`.
pub fn sign_map(x: &Vector) -> Vector {
    x.map(sign)
}

pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Peak index set `{ i : |x_i| = ||x||_inf }`. Indices are stored 0-based;
/// [`PeakInfo::display_indices`] gives the 1-based form used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakInfo {
    pub indices: Vec<usize>,
    /// Relative tolerance used for membership (0 means exact).
    pub tol_peak: f64,
}

impl PeakInfo {
    pub fn min_index(&self) -> usize {
        self.indices[0]
    }

    pub fn display_indices(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }
}

pub fn peak_info(x: &Vector, tol_peak: f64) -> Result<PeakInfo> {
    if !(0.0..1.0).contains(&tol_peak) {
        return Err(SrgError::InvalidParameter(format!(
            "peak tolerance {tol_peak} outside [0, 1)"
        )));
    }
    let max = x.norm(NormKind::LInf);
    if max == 0.0 {
        return Err(SrgError::ZeroVector("peak index"));
    }
    let threshold = max * (1.0 - tol_peak);
    let indices = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(PeakInfo { indices, tol_peak })
}

/// Exact peak indices without allocation-heavy bookkeeping; empty for `x = 0`.
fn exact_peaks(x: &Vector) -> impl Iterator<Item = usize> + '_ {
    let max = x.norm(NormKind::LInf);
    x.iter()
        .enumerate()
        .filter(move |(_, v)| max > 0.0 && v.abs() == max)
        .map(|(i, _)| i)
}

/// Regular pairing `[[u, v]]` for the chosen spec. `pair(u, 0) = 0` for every spec.
pub fn pair(u: &Vector, v: &Vector, spec: PairingSpec) -> Result<f64> {
    u.check_same_len(v)?;
    Ok(pair_unchecked(u, v, spec))
}

pub(crate) fn pair_unchecked(u: &Vector, v: &Vector, spec: PairingSpec) -> f64 {
    match spec {
        PairingSpec::L2Dot => v.dot(u),
        PairingSpec::L1Sign => {
            let s: f64 = u.iter().zip(v.iter()).map(|(a, b)| sign(*b) * a).sum();
            v.norm(NormKind::L1) * s
        }
        PairingSpec::LInfMax => exact_peaks(v)
            .map(|i| u[i] * v[i])
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))))
            .unwrap_or(0.0),
        PairingSpec::LInfMinIndex => match exact_peaks(v).next() {
            Some(m) => v.norm(NormKind::LInf) * sign(v[m]) * u[m],
            None => 0.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JmtSide {
    Upper,
    Lower,
}

pub const DEFAULT_JMT_STEPS: [f64; 3] = [1e-2, 1e-4, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JmtEstimate {
    /// Scaled difference quotient at the smallest step.
    pub value: f64,
    /// `||v|| (||v + t u|| - ||v||) / t` for each step in the schedule.
    pub quotients: Vec<f64>,
}

/// Numerical upper/lower JMT pairing: `||v|| lim_{t->0+/-} (||v + t u|| - ||v||) / t`.
pub fn jmt_pair_numeric(
    u: &Vector,
    v: &Vector,
    norm: NormKind,
    side: JmtSide,
    steps: &[f64],
) -> Result<JmtEstimate> {
    u.check_same_len(v)?;
    if v.is_zero() {
        return Err(SrgError::ZeroVector("directional derivative"));
    }
    if steps.is_empty()
        || steps.iter().any(|t| !(*t > 0.0) || !t.is_finite())
        || steps.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(SrgError::InvalidParameter(
            "JMT step schedule must be a nonempty, strictly descending sequence of positive steps"
                .into(),
        ));
    }
    let nv = v.norm(norm);
    let quotients: Vec<f64> = steps
        .iter()
        .map(|&step| {
            let t = match side {
                JmtSide::Upper => step,
                JmtSide::Lower => -step,
            };
            let shifted = Vector(v.iter().zip(u.iter()).map(|(a, b)| a + t * b).collect());
            nv * (shifted.norm(norm) - nv) / t
        })
        .collect();
    Ok(JmtEstimate {
        value: *quotients.last().expect("nonempty schedule"),
        quotients,
    })
}

/// `||x+y||^2 + ||x-y||^2 - 2||x||^2 - 2||y||^2`; identically zero only in inner-product norms.
pub fn parallelogram_defect(x: &Vector, y: &Vector, norm: NormKind) -> Result<f64> {
    x.check_same_len(y)?;
    let sq = |v: &Vector| v.norm(norm).powi(2);
    Ok(sq(&(x + y)) + sq(&(x - y)) - 2.0 * sq(x) - 2.0 * sq(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(Vector::new(vec![]), Err(SrgError::EmptyVector)));
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(SrgError::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn norms_of_example_vectors() {
        let x = v(&[1.0, 0.5]);
        let y = v(&[0.3, 1.0]);
        assert_eq!(norm(&x, PairingSpec::L1Sign), 1.5);
        assert_eq!(norm(&y, PairingSpec::LInfMax), 1.0);
        assert_abs_diff_eq!(norm(&y, PairingSpec::L1Sign), 1.3, epsilon = 1e-15);
        for spec in PairingSpec::ALL {
            assert_eq!(norm(&Vector::zeros(3), spec), 0.0);
        }
    }

    #[test]
    fn sign_map_cases() {
        assert_eq!(sign_map(&v(&[1.0, 0.5])), v(&[1.0, 1.0]));
        assert_eq!(sign_map(&v(&[0.0, -3.0])), v(&[0.0, -1.0]));
        assert_eq!(sign_map(&Vector::zeros(2)), Vector::zeros(2));
        let x = v(&[-2.0, 0.0, 7.0]);
        assert_eq!(sign_map(&sign_map(&x)), sign_map(&x));
    }

    #[test]
    fn peak_sets() {
        let p = peak_info(&v(&[1.0, 0.5]), 0.0).unwrap();
        assert_eq!(p.display_indices(), vec![1]);
        let p = peak_info(&v(&[0.3, 1.0]), 0.0).unwrap();
        assert_eq!(p.display_indices(), vec![2]);
        let p = peak_info(&v(&[1.0, -1.0]), 0.0).unwrap();
        assert_eq!(p.indices, vec![0, 1]);
        assert_eq!(p.min_index(), 0);
        assert!(matches!(
            peak_info(&Vector::zeros(2), 0.0),
            Err(SrgError::ZeroVector(_))
        ));
        // a relative tolerance admits near-peaks
        let p = peak_info(&v(&[1.0, 0.999_999]), 1e-5).unwrap();
        assert_eq!(p.indices, vec![0, 1]);
    }

    #[test]
    fn example_pairings() {
        let x = v(&[1.0, 0.5]);
        let y = v(&[0.3, 1.0]);
        assert_abs_diff_eq!(pair(&x, &y, PairingSpec::L1Sign).unwrap(), 1.95, epsilon = 1e-12);
        assert_abs_diff_eq!(pair(&y, &x, PairingSpec::L1Sign).unwrap(), 1.95, epsilon = 1e-12);
        assert_eq!(pair(&x, &y, PairingSpec::LInfMax).unwrap(), 0.5);
        assert_eq!(pair(&y, &x, PairingSpec::LInfMax).unwrap(), 0.3);
        assert_eq!(pair(&x, &y, PairingSpec::LInfMinIndex).unwrap(), 0.5);
        assert_eq!(pair(&y, &x, PairingSpec::LInfMinIndex).unwrap(), 0.3);
    }

    #[test]
    fn straight_angle_and_zero_convention() {
        let x = v(&[2.0, -1.0]);
        for spec in PairingSpec::ALL {
            let n = norm(&x, spec);
            assert_abs_diff_eq!(pair(&-&x, &x, spec).unwrap(), -n * n, epsilon = 1e-12);
            assert_eq!(pair(&x, &Vector::zeros(2), spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn pair_rejects_dimension_mismatch() {
        let err = pair(&v(&[1.0]), &v(&[1.0, 2.0]), PairingSpec::L2Dot).unwrap_err();
        assert!(matches!(err, SrgError::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn sip_flags() {
        assert!(PairingSpec::L2Dot.is_sip());
        assert!(PairingSpec::L1Sign.is_sip());
        assert!(PairingSpec::LInfMinIndex.is_sip());
        assert!(!PairingSpec::LInfMax.is_sip());
        for spec in PairingSpec::ALL {
            assert_eq!(spec.name().parse::<PairingSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn jmt_examples() {
        let x = v(&[1.0, 0.5]);
        let y = v(&[0.3, 1.0]);
        let e = jmt_pair_numeric(&x, &y, NormKind::LInf, JmtSide::Upper, &DEFAULT_JMT_STEPS).unwrap();
        assert_abs_diff_eq!(e.value, 0.5, epsilon = 1e-8);
        assert_eq!(e.quotients.len(), 3);
        let e = jmt_pair_numeric(&x, &y, NormKind::L1, JmtSide::Upper, &DEFAULT_JMT_STEPS).unwrap();
        assert_abs_diff_eq!(e.value, 1.95, epsilon = 1e-8);
        let z = v(&[1.0, 2.0]);
        for norm in [NormKind::L1, NormKind::L2, NormKind::LInf] {
            for side in [JmtSide::Upper, JmtSide::Lower] {
                let e = jmt_pair_numeric(&z, &z, norm, side, &DEFAULT_JMT_STEPS).unwrap();
                assert_abs_diff_eq!(e.value, z.norm(norm).powi(2), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn jmt_lower_differs_at_kinks() {
        // two peaks: upper JMT picks the larger u_i v_i, lower the smaller
        let u = v(&[1.0, -1.0]);
        let w = v(&[1.0, 1.0]);
        let up = jmt_pair_numeric(&u, &w, NormKind::LInf, JmtSide::Upper, &DEFAULT_JMT_STEPS).unwrap();
        let lo = jmt_pair_numeric(&u, &w, NormKind::LInf, JmtSide::Lower, &DEFAULT_JMT_STEPS).unwrap();
        assert_abs_diff_eq!(up.value, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(lo.value, -1.0, epsilon = 1e-8);
    }

    #[test]
    fn jmt_rejects_bad_schedules() {
        let x = v(&[1.0, 0.5]);
        assert!(jmt_pair_numeric(&x, &Vector::zeros(2), NormKind::L1, JmtSide::Upper, &DEFAULT_JMT_STEPS).is_err());
        assert!(jmt_pair_numeric(&x, &x, NormKind::L1, JmtSide::Upper, &[1e-4, 1e-2]).is_err());
        assert!(jmt_pair_numeric(&x, &x, NormKind::L1, JmtSide::Upper, &[]).is_err());
    }

    #[test]
    fn parallelogram_witnesses() {
        let e1 = Vector::basis(2, 0);
        let e2 = Vector::basis(2, 1);
        assert_abs_diff_eq!(parallelogram_defect(&e1, &e2, NormKind::L2).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(parallelogram_defect(&e1, &e2, NormKind::L1).unwrap(), 4.0);
        assert_eq!(parallelogram_defect(&e1, &e2, NormKind::LInf).unwrap(), -2.0);
    }
}
