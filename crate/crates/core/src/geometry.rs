//! Directional cosines and angles, facet labels of the polyhedral unit balls,
//! logarithmic norms and phase-based monotonicity checks.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};
use crate::linalg::{symmetric_eigenvalues, Matrix, JACOBI_TOL};
use crate::pairings::{pair_unchecked, peak_info, sign, NormKind, PairingSpec, Vector};
use crate::sampling::SphereSampler;

/// Cosines within this distance outside `[-1, 1]` are clamped; larger excursions are errors.
pub const COS_CLAMP_TOL: f64 = 1e-9;
/// Slack on the `pi/2` threshold of the phase monotonicity test.
pub const DEFAULT_TOL_ANGLE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = SrgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(SrgError::InvalidParameter(format!("unknown side {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalAngle {
    pub cos_value: f64,
    pub angle_rad: f64,
    pub side: Side,
    pub spec: PairingSpec,
    /// Amount removed by clamping the raw cosine into `[-1, 1]`.
    pub clamped_by: f64,
}

pub(crate) fn clamp_cos(raw: f64) -> Result<(f64, f64)> {
    if !raw.is_finite() {
        return Err(SrgError::CosineOutOfRange(raw));
    }
    let c = raw.clamp(-1.0, 1.0);
    let excess = (raw - c).abs();
    if excess > COS_CLAMP_TOL {
        return Err(SrgError::CosineOutOfRange(raw));
    }
    Ok((c, excess))
}

/// Raw left cosine `[[y, x]] / (||x|| ||y||)` for nonzero, equal-length inputs.
pub(crate) fn raw_left_cos(x: &Vector, y: &Vector, spec: PairingSpec) -> f64 {
    let nk = spec.norm_kind();
    pair_unchecked(y, x, spec) / (x.norm(nk) * y.norm(nk))
}

fn directional(x: &Vector, y: &Vector, spec: PairingSpec, side: Side) -> Result<DirectionalAngle> {
    x.check_same_len(y)?;
    if x.is_zero() || y.is_zero() {
        return Err(SrgError::ZeroVector("direction"));
    }
    let raw = match side {
        Side::Left => raw_left_cos(x, y, spec),
        Side::Right => raw_left_cos(y, x, spec),
    };
    let (cos_value, clamped_by) = clamp_cos(raw)?;
    Ok(DirectionalAngle {
        cos_value,
        angle_rad: cos_value.acos(),
        side,
        spec,
        clamped_by,
    })
}

/// `cos_L(x, y) = [[y, x]] / (||x|| ||y||)`; note the swapped pairing arguments.
pub fn cos_left(x: &Vector, y: &Vector, spec: PairingSpec) -> Result<DirectionalAngle> {
    directional(x, y, spec, Side::Left)
}

/// `cos_R(x, y) = cos_L(y, x)`.
pub fn cos_right(x: &Vector, y: &Vector, spec: PairingSpec) -> Result<DirectionalAngle> {
    directional(x, y, spec, Side::Right)
}

pub fn cos_directional(x: &Vector, y: &Vector, spec: PairingSpec, side: Side) -> Result<DirectionalAngle> {
    directional(x, y, spec, side)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

const UNIT_TOL: f64 = 1e-9;

/// For unit `x, y, z` and a SIP: `|cos_L(x,z) - cos_L(y,z) cos_L(x,y)| <= ||z - cos_L(y,z) y||`.
pub fn cosine_defect_bound_check(
    x: &Vector,
    y: &Vector,
    z: &Vector,
    spec: PairingSpec,
) -> Result<DefectCheck> {
    spec.require_sip()?;
    x.check_same_len(y)?;
    x.check_same_len(z)?;
    let nk = spec.norm_kind();
    for v in [x, y, z] {
        let n = v.norm(nk);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(SrgError::NotUnit(n));
        }
    }
    let c_xz = cos_left(x, z, spec)?.cos_value;
    let c_yz = cos_left(y, z, spec)?.cos_value;
    let c_xy = cos_left(x, y, spec)?.cos_value;
    let lhs = (c_xz - c_yz * c_xy).abs();
    let rhs = (z - &y.scaled(c_yz)).norm(nk);
    Ok(DefectCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Active facet(s) of the unit ball at `x`: the outward normal sign pattern
/// for l1, the minimal peak facet for the min-index pairing, or the full set of
/// active facets for the max pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FacetLabel {
    L1SignPattern(Vec<i8>),
    LInfMin { index: usize, sign: i8 },
    LInfSet { indices: Vec<usize>, signs: Vec<i8> },
}

impl fmt::Display for FacetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = |s: &i8| match s {
            1 => "+",
            -1 => "-",
            _ => "0",
        };
        match self {
            FacetLabel::L1SignPattern(p) => {
                write!(f, "({})", p.iter().map(sym).collect::<Vec<_>>().join(","))
            }
            FacetLabel::LInfMin { index, sign } => write!(f, "(m={}, {})", index + 1, sym(sign)),
            FacetLabel::LInfSet { indices, signs } => write!(
                f,
                "({{{}}}, ({}))",
                indices.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","),
                signs.iter().map(sym).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

pub fn facet_label(x: &Vector, spec: PairingSpec) -> Result<FacetLabel> {
    if x.is_zero() {
        return Err(SrgError::ZeroVector("facet label"));
    }
    let s = |v: f64| sign(v) as i8;
    match spec {
        PairingSpec::L2Dot => Err(SrgError::Unsupported(
            "the l2 unit ball has no facets".to_string(),
        )),
        PairingSpec::L1Sign => Ok(FacetLabel::L1SignPattern(x.iter().map(|&v| s(v)).collect())),
        PairingSpec::LInfMinIndex => {
            let m = peak_info(x, 0.0)?.min_index();
            Ok(FacetLabel::LInfMin {
                index: m,
                sign: s(x[m]),
            })
        }
        PairingSpec::LInfMax => {
            let peaks = peak_info(x, 0.0)?;
            let signs = peaks.indices.iter().map(|&i| s(x[i])).collect();
            Ok(FacetLabel::LInfSet {
                indices: peaks.indices,
                signs,
            })
        }
    }
}

/// Logarithmic norm from the closed-form expressions for each lp norm.
pub fn log_norm_closed_form(a: &Matrix, spec: PairingSpec) -> Result<f64> {
    let n = a.require_square()?;
    Ok(match spec.norm_kind() {
        NormKind::L2 => {
            let sym = a.symmetric_part()?;
            let eig = symmetric_eigenvalues(&sym, JACOBI_TOL)?;
            *eig.last().expect("nonempty spectrum")
        }
        NormKind::L1 => (0..n)
            .map(|j| a.get(j, j) + (0..n).filter(|&i| i != j).map(|i| a.get(i, j).abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::LInf => (0..n)
            .map(|i| a.get(i, i) + (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// `[[A x, x]]` for `x` on the unit sphere.
pub fn lumer_term(a: &Matrix, x: &Vector, spec: PairingSpec) -> Result<f64> {
    let ax = a.apply(x)?;
    Ok(pair_unchecked(&ax, x, spec))
}

/// `||A x|| cos_L(x, A x)`; zero when `A x = 0`.
pub fn gain_phase_term(a: &Matrix, x: &Vector, spec: PairingSpec) -> Result<f64> {
    let ax = a.apply(x)?;
    if ax.is_zero() {
        return Ok(0.0);
    }
    Ok(ax.norm(spec.norm_kind()) * cos_left(x, &ax, spec)?.cos_value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LumerEstimate {
    pub estimate: f64,
    pub argmax_witness: Vector,
    pub samples: usize,
}

fn check_sampler(a: &Matrix, spec: PairingSpec, sampler: &SphereSampler) -> Result<usize> {
    let n = a.require_square()?;
    if sampler.norm != spec.norm_kind() {
        return Err(SrgError::InvalidParameter(format!(
            "sphere sampler for {} used with pairing {}",
            sampler.norm, spec
        )));
    }
    Ok(n)
}

fn sampled_sup(
    a: &Matrix,
    spec: PairingSpec,
    sampler: &SphereSampler,
    count: usize,
    seed: u64,
    term: impl Fn(&Matrix, &Vector, PairingSpec) -> Result<f64>,
) -> Result<LumerEstimate> {
    let n = check_sampler(a, spec, sampler)?;
    let samples = sampler.sample(n, count, seed);
    let mut best: Option<(f64, &Vector)> = None;
    for x in &samples {
        let t = term(a, x, spec)?;
        if best.is_none_or(|(b, _)| t > b) {
            best = Some((t, x));
        }
    }
    let (estimate, w) = best.ok_or_else(|| SrgError::InvalidParameter("no samples drawn".into()))?;
    Ok(LumerEstimate {
        estimate,
        argmax_witness: w.clone(),
        samples: samples.len(),
    })
}

/// Sampled Lumer identity: max of `[[A x, x]]` over `count` random unit
/// vectors plus the sampler's extreme family (when enabled).
pub fn log_norm_lumer_estimate(
    a: &Matrix,
    spec: PairingSpec,
    sampler: &SphereSampler,
    count: usize,
    seed: u64,
) -> Result<LumerEstimate> {
    sampled_sup(a, spec, sampler, count, seed, lumer_term)
}

/// Gain-phase form of the same supremum: max of `||A x|| cos_L(x, A x)`.
pub fn gain_phase_sup(
    a: &Matrix,
    spec: PairingSpec,
    sampler: &SphereSampler,
    count: usize,
    seed: u64,
) -> Result<f64> {
    Ok(sampled_sup(a, spec, sampler, count, seed, gain_phase_term)?.estimate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCheck {
    pub is_monotone_on_samples: bool,
    /// Largest left angle seen; 0 when every pair was screened out.
    pub worst_angle: f64,
    /// Index into the input of the pair attaining `worst_angle`.
    pub witness: Option<usize>,
    /// Pairs skipped because `u = 0` or `v = 0`.
    pub screened: usize,
}

/// Monotone on the sample iff every left angle `angle_L(u, v)` is at most `pi/2`.
pub fn phase_monotone_check(
    pairs: &[(Vector, Vector)],
    spec: PairingSpec,
    tol_angle: f64,
) -> Result<PhaseCheck> {
    let mut worst = (0.0f64, None);
    let mut screened = 0;
    for (k, (u, v)) in pairs.iter().enumerate() {
        u.check_same_len(v)?;
        if u.is_zero() || v.is_zero() {
            screened += 1;
            continue;
        }
        let angle = cos_left(u, v, spec)?.angle_rad;
        if worst.1.is_none() || angle > worst.0 {
            worst = (angle, Some(k));
        }
    }
    Ok(PhaseCheck {
        is_monotone_on_samples: worst.0 <= FRAC_PI_2 + tol_angle,
        worst_angle: worst.0,
        witness: worst.1,
        screened,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairings::pair;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn example_cosines() {
        let x = v(&[1.0, 0.5]);
        let y = v(&[0.3, 1.0]);
        let l1 = cos_left(&x, &y, PairingSpec::L1Sign).unwrap();
        assert_abs_diff_eq!(l1.cos_value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l1.angle_rad, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(cos_right(&x, &y, PairingSpec::L1Sign).unwrap().cos_value, 1.0, epsilon = 1e-12);
        let l2 = cos_left(&x, &y, PairingSpec::L2Dot).unwrap();
        assert_abs_diff_eq!(l2.cos_value, 16.0 / 545f64.sqrt(), epsilon = 1e-12);
        let li = cos_left(&x, &y, PairingSpec::LInfMax).unwrap();
        assert_abs_diff_eq!(li.cos_value, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(cos_right(&x, &y, PairingSpec::LInfMax).unwrap().cos_value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn self_and_opposite_cosines() {
        let x = v(&[2.0, -1.0, 0.5]);
        for spec in PairingSpec::ALL {
            assert_abs_diff_eq!(cos_left(&x, &x, spec).unwrap().cos_value, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cos_right(&x, &x, spec).unwrap().cos_value, 1.0, epsilon = 1e-12);
            let opp = cos_left(&x, &-&x, spec).unwrap();
            assert_abs_diff_eq!(opp.cos_value, -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(opp.angle_rad, PI, epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_inputs_rejected() {
        let z = Vector::zeros(2);
        assert!(matches!(cos_left(&z, &v(&[1.0, 0.0]), PairingSpec::L2Dot), Err(SrgError::ZeroVector(_))));
        assert!(clamp_cos(1.0 + 1e-6).is_err());
        assert_eq!(clamp_cos(1.0 + 1e-12).unwrap().0, 1.0);
    }

    #[test]
    fn defect_bound_identity_case() {
        let e1 = Vector::basis(3, 0);
        let c = cosine_defect_bound_check(&e1, &e1, &e1, PairingSpec::L2Dot).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
        assert!(matches!(
            cosine_defect_bound_check(&e1, &e1, &e1, PairingSpec::LInfMax),
            Err(SrgError::NotSip(_))
        ));
        assert!(matches!(
            cosine_defect_bound_check(&e1.scaled(2.0), &e1, &e1, PairingSpec::L1Sign),
            Err(SrgError::NotUnit(_))
        ));
    }

    #[test]
    fn facet_labels() {
        assert_eq!(
            facet_label(&v(&[1.0, 0.42]), PairingSpec::LInfMinIndex).unwrap(),
            FacetLabel::LInfMin { index: 0, sign: 1 }
        );
        assert_eq!(
            facet_label(&v(&[0.65, 0.35]), PairingSpec::L1Sign).unwrap(),
            FacetLabel::L1SignPattern(vec![1, 1])
        );
        let l = facet_label(&v(&[1.0, -1.0]), PairingSpec::LInfMax).unwrap();
        assert_eq!(
            l,
            FacetLabel::LInfSet {
                indices: vec![0, 1],
                signs: vec![1, -1]
            }
        );
        assert_eq!(l.to_string(), "({1,2}, (+,-))");
        assert!(facet_label(&v(&[1.0, 0.0]), PairingSpec::L2Dot).is_err());
        assert!(facet_label(&Vector::zeros(2), PairingSpec::L1Sign).is_err());
    }

    #[test]
    fn closed_form_identity_and_non_square() {
        let id = Matrix::identity(4);
        for spec in PairingSpec::ALL {
            assert_abs_diff_eq!(log_norm_closed_form(&id, spec).unwrap(), 1.0, epsilon = 1e-12);
        }
        let r = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(log_norm_closed_form(&r, PairingSpec::L1Sign).is_err());
    }

    #[test]
    fn lumer_trivial_cases() {
        for spec in PairingSpec::ALL {
            let s = SphereSampler::new(spec.norm_kind());
            let e = log_norm_lumer_estimate(&Matrix::identity(3), spec, &s, 1, 3).unwrap();
            assert_abs_diff_eq!(e.estimate, 1.0, epsilon = 1e-12);
            assert_eq!(gain_phase_sup(&Matrix::zeros(3), spec, &s, 50, 3).unwrap(), 0.0);
            let neg = Matrix::identity(3).scaled(-1.0);
            assert_abs_diff_eq!(gain_phase_sup(&neg, spec, &s, 50, 3).unwrap(), -1.0, epsilon = 1e-12);
        }
        let s = SphereSampler::new(NormKind::L2);
        assert!(log_norm_lumer_estimate(&Matrix::identity(2), PairingSpec::L1Sign, &s, 5, 0).is_err());
    }

    #[test]
    fn phase_checks() {
        let u = v(&[1.0, -1.0]);
        let identity_pairs = vec![(u.clone(), u.clone()), (v(&[0.2, 3.0]), v(&[0.2, 3.0]))];
        let c = phase_monotone_check(&identity_pairs, PairingSpec::L1Sign, DEFAULT_TOL_ANGLE).unwrap();
        assert!(c.is_monotone_on_samples);
        assert_abs_diff_eq!(c.worst_angle, 0.0, epsilon = 1e-6);

        let w = v(&[1.0, 1.0]);
        let c = phase_monotone_check(&[(u.clone(), w.clone())], PairingSpec::LInfMax, DEFAULT_TOL_ANGLE).unwrap();
        assert!(c.is_monotone_on_samples);
        assert_eq!(pair(&w, &u, PairingSpec::LInfMax).unwrap(), 1.0);
        // the stronger notion -[[-v, u]] >= 0 fails on the same pair
        assert_eq!(-pair(&-&w, &u, PairingSpec::LInfMax).unwrap(), -1.0);

        for spec in PairingSpec::ALL {
            let pairs = vec![(v(&[1.0, 0.0]), v(&[-1.0, 0.0])), (Vector::zeros(2), w.clone())];
            let c = phase_monotone_check(&pairs, spec, DEFAULT_TOL_ANGLE).unwrap();
            assert!(!c.is_monotone_on_samples);
            assert_abs_diff_eq!(c.worst_angle, PI, epsilon = 1e-6);
            assert_eq!(c.witness, Some(0));
            assert_eq!(c.screened, 1);
        }
    }
}
