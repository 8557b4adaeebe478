use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Result, SrgError};
use crate::linalg::Matrix;
use crate::pairings::Vector;
use crate::sampling::{try_map_seeded, try_map_slice, ExecMode, IncrementSampler};

pub type PointwiseFn = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;

/// An operator on `R^n`, identified with its graph.
#[derive(Clone)]
pub enum Operator {
    Matrix(Matrix),
    /// Single-valued map given by an evaluation function.
    Pointwise {
        dim: usize,
        label: String,
        f: PointwiseFn,
    },
    /// Explicit finite graph; repeated inputs with distinct outputs encode a
    /// multi-valued operator.
    FiniteGraph { dim: usize, pairs: Vec<(Vector, Vector)> },
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Matrix(m) => f.debug_tuple("Matrix").field(m).finish(),
            Operator::Pointwise { dim, label, .. } => f
                .debug_struct("Pointwise")
                .field("dim", dim)
                .field("label", label)
                .finish_non_exhaustive(),
            Operator::FiniteGraph { dim, pairs } => f
                .debug_struct("FiniteGraph")
                .field("dim", dim)
                .field("len", &pairs.len())
                .finish(),
        }
    }
}

impl Operator {
    pub fn matrix(m: Matrix) -> Result<Self> {
        m.require_square()?;
        Ok(Operator::Matrix(m))
    }

    pub fn identity(n: usize) -> Self {
        Operator::Matrix(Matrix::identity(n))
    }

    pub fn pointwise(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Operator::Pointwise {
            dim,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn finite_graph(pairs: Vec<(Vector, Vector)>) -> Result<Self> {
        let dim = pairs
            .first()
            .map(|(x, _)| x.len())
            .ok_or_else(|| SrgError::InvalidParameter("finite graph must be nonempty".into()))?;
        for (x, y) in &pairs {
            if x.len() != dim || y.len() != dim {
                return Err(SrgError::DimensionMismatch {
                    expected: dim,
                    found: if x.len() != dim { x.len() } else { y.len() },
                });
            }
        }
        Ok(Operator::FiniteGraph { dim, pairs })
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Matrix(m) => m.rows(),
            Operator::Pointwise { dim, .. } | Operator::FiniteGraph { dim, .. } => *dim,
        }
    }

    pub fn is_evaluatable(&self) -> bool {
        !matches!(self, Operator::FiniteGraph { .. })
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Operator::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(SrgError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match self {
            Operator::Matrix(m) => Ok(m.apply_unchecked(x)),
            Operator::Pointwise { f, dim, label } => {
                let y = f(x)?;
                if y.len() != *dim {
                    return Err(SrgError::Unsupported(format!(
                        "operator {label} returned a vector of length {} (expected {dim})",
                        y.len()
                    )));
                }
                Ok(y)
            }
            Operator::FiniteGraph { .. } => Err(SrgError::Unsupported(
                "finite graphs cannot be evaluated at arbitrary points".into(),
            )),
        }
    }

    /// `alpha * T`.
    pub fn scaled(&self, alpha: f64) -> Operator {
        match self {
            Operator::Matrix(m) => Operator::Matrix(m.scaled(alpha)),
            Operator::FiniteGraph { dim, pairs } => Operator::FiniteGraph {
                dim: *dim,
                pairs: pairs.iter().map(|(x, y)| (x.clone(), y.scaled(alpha))).collect(),
            },
            Operator::Pointwise { .. } => {
                let inner = self.clone();
                Operator::pointwise(self.dim(), format!("{alpha}*({})", self.label()), move |x| {
                    Ok(inner.apply(x)?.scaled(alpha))
                })
            }
        }
    }

    /// `A + B` for evaluatable operators of equal dimension.
    pub fn sum(a: &Operator, b: &Operator) -> Result<Operator> {
        Self::check_pair(a, b)?;
        if let (Operator::Matrix(ma), Operator::Matrix(mb)) = (a, b) {
            return Ok(Operator::Matrix(ma.add(mb)?));
        }
        let (a2, b2) = (a.clone(), b.clone());
        Ok(Operator::pointwise(
            a.dim(),
            format!("({})+({})", a.label(), b.label()),
            move |x| Ok(&a2.apply(x)? + &b2.apply(x)?),
        ))
    }

    /// Composition `A B`, i.e. `x -> A(B(x))`.
    pub fn compose(a: &Operator, b: &Operator) -> Result<Operator> {
        Self::check_pair(a, b)?;
        if let (Operator::Matrix(ma), Operator::Matrix(mb)) = (a, b) {
            return Ok(Operator::Matrix(ma.matmul(mb)?));
        }
        let (a2, b2) = (a.clone(), b.clone());
        Ok(Operator::pointwise(
            a.dim(),
            format!("({})({})", a.label(), b.label()),
            move |x| a2.apply(&b2.apply(x)?),
        ))
    }

    fn check_pair(a: &Operator, b: &Operator) -> Result<()> {
        if !a.is_evaluatable() || !b.is_evaluatable() {
            return Err(SrgError::Unsupported(
                "sums and compositions need evaluatable operators".into(),
            ));
        }
        if a.dim() != b.dim() {
            return Err(SrgError::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Operator::Matrix(m) => format!("matrix{}x{}", m.rows(), m.cols()),
            Operator::Pointwise { label, .. } => label.clone(),
            Operator::FiniteGraph { pairs, .. } => format!("graph[{}]", pairs.len()),
        }
    }
}

/// One element of `igra(T)`: input increment `u`, output increment `v`, and
/// the magnitudes used to decide when an increment is numerically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Increment {
    pub u: Vector,
    pub v: Vector,
    /// `1 + ||x1|| + ||x2||` for the base points generating `u`.
    pub input_scale: f64,
    /// `1 + ||T x1|| + ||T x2||`.
    pub output_scale: f64,
}

impl Increment {
    /// Increment given directly as differences (unit screening scales).
    pub fn new(u: Vector, v: Vector) -> Self {
        Increment {
            u,
            v,
            input_scale: 1.0,
            output_scale: 1.0,
        }
    }

    pub fn from_points(x1: &Vector, x2: &Vector, y1: &Vector, y2: &Vector) -> Self {
        let n = crate::pairings::NormKind::L2;
        Increment {
            u: x1 - x2,
            v: y1 - y2,
            input_scale: 1.0 + x1.norm(n) + x2.norm(n),
            output_scale: 1.0 + y1.norm(n) + y2.norm(n),
        }
    }

    /// The same increment read backwards, as an element of `igra(T^{-1})`.
    pub fn swapped(&self) -> Self {
        Increment {
            u: self.v.clone(),
            v: self.u.clone(),
            input_scale: self.output_scale,
            output_scale: self.input_scale,
        }
    }
}

/// `count` seeded increments of `op`.
///
/// Evaluatable operators are probed at base-point pairs from `sampler`; finite
/// graphs draw two graph entries uniformly at random (the sampler is unused).
pub fn sample_increments(
    op: &Operator,
    sampler: &IncrementSampler,
    count: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<Increment>> {
    let n = op.dim();
    match op {
        Operator::FiniteGraph { pairs, .. } => try_map_seeded(mode, count, seed, |_, rng| {
            let i = rng.random_range(0..pairs.len());
            let j = rng.random_range(0..pairs.len());
            let (x1, y1) = &pairs[i];
            let (x2, y2) = &pairs[j];
            Ok(Increment::from_points(x1, x2, y1, y2))
        }),
        _ => increments_at(op, &sampler.sample_points(mode, n, count, seed), mode),
    }
}

/// Increments of `op` at explicit base-point pairs `(x1, x2)`. Feeding the
/// same pairs to several operators gives matched samples.
pub fn increments_at(
    op: &Operator,
    points: &[(Vector, Vector)],
    mode: ExecMode,
) -> Result<Vec<Increment>> {
    try_map_slice(mode, points, |k, (x1, x2)| {
        let eval = |x: &Vector| {
            let y = op.apply(x).map_err(|e| SrgError::Evaluation {
                sample: k,
                reason: e.to_string(),
            })?;
            if !y.is_finite() {
                return Err(SrgError::Evaluation {
                    sample: k,
                    reason: "non-finite output".into(),
                });
            }
            Ok(y)
        };
        let y1 = eval(x1)?;
        let y2 = eval(x2)?;
        Ok(Increment::from_points(x1, x2, &y1, &y2))
    })
}
