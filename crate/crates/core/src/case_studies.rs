//! The worked examples: a pair of 3x3 matrices that are monotone in one
//! polyhedral norm but not the other, their nonlinear counterparts, and
//! policy evaluation on a random Markov decision process.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};
use crate::linalg::Matrix;
use crate::pairings::{NormKind, Vector};
use crate::sampling::{IncrementSampler, SamplerKind};
use crate::srg::Operator;

/// `(A1, Ainf)` with `Ainf = A1^T`. `-A1` has zero l1 logarithmic norm while
/// the symmetric part of `A1` is indefinite.
pub fn example_matrices() -> (Matrix, Matrix) {
    let a1 = Matrix::square_from_rows(&[
        vec![0.0, -2.0, -2.0],
        vec![0.0, 2.0, -1.0],
        vec![0.0, 0.0, 3.0],
    ])
    .expect("3x3 literal");
    let ainf = a1.transpose();
    (a1, ainf)
}

/// `x + x^3`, odd, increasing and expansive.
pub fn cubic_phi(x: f64) -> f64 {
    x + x * x * x
}

/// `F(x) = diag(A) phi(x) + (A - diag(A)) x` with `phi` applied componentwise.
pub fn build_f_p(a: &Matrix) -> Result<Operator> {
    let n = a.require_square()?;
    let diag = a.diagonal();
    let mut off = a.clone();
    for i in 0..n {
        off.set(i, i, 0.0);
    }
    Ok(Operator::pointwise(n, "F", move |x: &Vector| {
        let mut y = off.apply(x)?.into_vec();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += diag[i] * cubic_phi(x[i]);
        }
        Ok(Vector::from_vec_unchecked(y))
    }))
}

/// Finite MDP with `transitions[s][a][s']` and `rewards[s][a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<f64>>,
    pub gamma: f64,
    /// Seed used to generate the instance, if random.
    pub seed: Option<u64>,
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl Mdp {
    pub fn new(transitions: Vec<Vec<Vec<f64>>>, rewards: Vec<Vec<f64>>, gamma: f64) -> Result<Self> {
        let mdp = Mdp { transitions, rewards, gamma, seed: None };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn n_actions(&self) -> usize {
        self.transitions.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        let m = self.n_actions();
        if n == 0 || m == 0 {
            return Err(SrgError::InvalidParameter("MDP needs at least one state and one action".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(SrgError::InvalidParameter(format!("discount {} not in [0, 1)", self.gamma)));
        }
        if self.rewards.len() != n {
            return Err(SrgError::DimensionMismatch { expected: n, found: self.rewards.len() });
        }
        for (s, (ps, rs)) in self.transitions.iter().zip(&self.rewards).enumerate() {
            if ps.len() != m || rs.len() != m {
                return Err(SrgError::DimensionMismatch { expected: m, found: ps.len().min(rs.len()) });
            }
            if rs.iter().any(|r| !r.is_finite()) {
                return Err(SrgError::InvalidParameter(format!("non-finite reward in state {s}")));
            }
            for (a, row) in ps.iter().enumerate() {
                if row.len() != n {
                    return Err(SrgError::DimensionMismatch { expected: n, found: row.len() });
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(SrgError::InvalidParameter(format!(
                        "transition row ({s}, {a}) is not a probability vector"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn max_abs_reward(&self) -> f64 {
        self.rewards.iter().flatten().fold(0.0, |m: f64, r| m.max(r.abs()))
    }

    /// `(P_pi, r_pi)` for a deterministic policy.
    pub fn policy_system(&self, policy: &Policy) -> Result<(Matrix, Vector)> {
        self.check_policy(policy)?;
        let rows: Vec<Vec<f64>> = policy
            .actions
            .iter()
            .enumerate()
            .map(|(s, &a)| self.transitions[s][a].clone())
            .collect();
        let r: Vec<f64> = policy.actions.iter().enumerate().map(|(s, &a)| self.rewards[s][a]).collect();
        Ok((Matrix::square_from_rows(&rows)?, Vector::new(r)?))
    }

    fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.actions.len() != self.n_states() {
            return Err(SrgError::DimensionMismatch { expected: self.n_states(), found: policy.actions.len() });
        }
        if let Some(&a) = policy.actions.iter().find(|&&a| a >= self.n_actions()) {
            return Err(SrgError::InvalidParameter(format!("action {a} out of range")));
        }
        Ok(())
    }
}

/// Deterministic stationary policy: `actions[s]` is the action taken in `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub actions: Vec<usize>,
}

impl Policy {
    /// Always take the first action.
    pub fn first_action(n_states: usize) -> Self {
        Policy { actions: vec![0; n_states] }
    }
}

/// Random MDP: each transition row is uniform on the simplex (normalised
/// exponentials), rewards are uniform on `[0, 1]`.
pub fn random_mdp(n_states: usize, n_actions: usize, gamma: f64, seed: u64) -> Result<Mdp> {
    if n_states == 0 || n_actions == 0 {
        return Err(SrgError::InvalidParameter("MDP needs at least one state and one action".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(0.0, 1.0).expect("valid range");
    let mut transitions = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut per_action = Vec::with_capacity(n_actions);
        for _ in 0..n_actions {
            let mut row: Vec<f64> = (0..n_states).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            per_action.push(row);
        }
        transitions.push(per_action);
    }
    let rewards = (0..n_states)
        .map(|_| (0..n_actions).map(|_| unit.sample(&mut rng)).collect())
        .collect();
    let mut mdp = Mdp::new(transitions, rewards, gamma)?;
    mdp.seed = Some(seed);
    debug_assert!(mdp
        .transitions
        .iter()
        .flatten()
        .all(|row| (row.iter().sum::<f64>() - 1.0).abs() <= STOCHASTIC_TOL));
    Ok(mdp)
}

/// `T_pi v = r_pi + gamma P_pi v`.
pub fn bellman_apply(mdp: &Mdp, policy: &Policy, v: &Vector) -> Result<Vector> {
    let (p, r) = mdp.policy_system(policy)?;
    Ok(&r + &p.apply(v)?.scaled(mdp.gamma))
}

/// `-v / (1 + |v|)`: bounded, sign-reversing and 1-Lipschitz.
pub fn soft_phi(v: f64) -> f64 {
    -v / (1.0 + v.abs())
}

/// `T_{pi,alpha} v = T_pi v + alpha phi(v)`.
pub fn regularized_bellman_apply(mdp: &Mdp, policy: &Policy, alpha: f64, v: &Vector) -> Result<Vector> {
    check_alpha(alpha)?;
    Ok(&bellman_apply(mdp, policy, v)? + &v.map(soft_phi).scaled(alpha))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(SrgError::InvalidParameter(format!("regularisation weight {alpha} must be positive")))
    }
}

/// `T_pi` as an operator, with `P_pi` and `r_pi` precomputed.
pub fn bellman_operator(mdp: &Mdp, policy: &Policy) -> Result<Operator> {
    let (p, r) = mdp.policy_system(policy)?;
    let gamma = mdp.gamma;
    Ok(Operator::pointwise(mdp.n_states(), "T_pi", move |v: &Vector| {
        Ok(&r + &p.apply(v)?.scaled(gamma))
    }))
}

pub fn regularized_bellman_operator(mdp: &Mdp, policy: &Policy, alpha: f64) -> Result<Operator> {
    check_alpha(alpha)?;
    let (p, r) = mdp.policy_system(policy)?;
    let gamma = mdp.gamma;
    Ok(Operator::pointwise(mdp.n_states(), "T_pi_alpha", move |v: &Vector| {
        Ok(&(&r + &p.apply(v)?.scaled(gamma)) + &v.map(soft_phi).scaled(alpha))
    }))
}

/// `v_pi = (I - gamma P_pi)^{-1} r_pi`.
pub fn value_function(mdp: &Mdp, policy: &Policy) -> Result<Vector> {
    let (p, r) = mdp.policy_system(policy)?;
    let n = mdp.n_states();
    Matrix::identity(n).add(&p.scaled(-mdp.gamma))?.solve(&r)
}

/// Base points uniform on `[-V, V]^n` with `V = max|r| / (1 - gamma)`, half
/// of them paired through sign-vector increments.
pub fn bellman_sampler(mdp: &Mdp) -> IncrementSampler {
    let v = (mdp.max_abs_reward() / (1.0 - mdp.gamma)).max(1.0);
    IncrementSampler::with_scale(SamplerKind::ValueBox, v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueIterationReport {
    pub fixed_point: Vector,
    /// `||v^{k+1} - v^k||_inf` for each step taken.
    pub residuals: Vec<f64>,
    /// Geometric mean of successive residual ratios (0 when the iteration
    /// lands exactly on the fixed point).
    pub observed_rate: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn value_iteration(op: &Operator, v0: &Vector, max_iter: usize, tol_fix: f64) -> Result<ValueIterationReport> {
    if v0.len() != op.dim() {
        return Err(SrgError::DimensionMismatch { expected: op.dim(), found: v0.len() });
    }
    if !(tol_fix >= 0.0) {
        return Err(SrgError::InvalidParameter(format!("tolerance {tol_fix} must be nonnegative")));
    }
    let mut v = v0.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = op.apply(&v)?;
        let r = (&next - &v).norm(NormKind::LInf);
        residuals.push(r);
        v = next;
        if r <= tol_fix {
            converged = true;
            break;
        }
    }
    Ok(ValueIterationReport {
        fixed_point: v,
        observed_rate: geometric_rate(&residuals),
        converged,
        iterations: residuals.len(),
        residuals,
    })
}

fn geometric_rate(residuals: &[f64]) -> f64 {
    match residuals {
        [first, .., last] if *first > 0.0 => {
            if *last == 0.0 {
                0.0
            } else {
                (last / first).powf(1.0 / (residuals.len() - 1) as f64)
            }
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matrices_and_transpose() {
        let (a1, ainf) = example_matrices();
        assert_eq!(a1.get(0, 1), -2.0);
        assert_eq!(ainf, a1.transpose());
    }

    #[test]
    fn f1_at_e3() {
        let (a1, _) = example_matrices();
        let f = build_f_p(&a1).unwrap();
        assert_eq!(f.apply(&Vector::zeros(3)).unwrap(), Vector::zeros(3));
        assert_eq!(f.apply(&Vector::basis(3, 2)).unwrap().as_slice(), &[-2.0, -1.0, 6.0]);
    }

    #[test]
    fn random_mdp_shape_and_determinism() {
        let m = random_mdp(8, 3, 0.7, 42).unwrap();
        assert_eq!((m.n_states(), m.n_actions()), (8, 3));
        for row in m.transitions.iter().flatten() {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(m, random_mdp(8, 3, 0.7, 42).unwrap());
        assert_ne!(m, random_mdp(8, 3, 0.7, 43).unwrap());
        let one = random_mdp(1, 2, 0.5, 0).unwrap();
        assert_eq!(one.transitions[0][1], vec![1.0]);
        assert!(random_mdp(0, 1, 0.5, 0).is_err());
        assert!(random_mdp(2, 1, 1.0, 0).is_err());
    }

    #[test]
    fn bellman_at_zero_is_reward() {
        let m = random_mdp(5, 2, 0.7, 1).unwrap();
        let pi = Policy::first_action(5);
        let (_, r) = m.policy_system(&pi).unwrap();
        assert_eq!(bellman_apply(&m, &pi, &Vector::zeros(5)).unwrap(), r);
        assert_eq!(regularized_bellman_apply(&m, &pi, 0.25, &Vector::zeros(5)).unwrap(), r);
        assert!(bellman_apply(&m, &pi, &Vector::zeros(4)).is_err());
        assert!(regularized_bellman_apply(&m, &pi, 0.0, &Vector::zeros(5)).is_err());
    }

    #[test]
    fn value_function_is_fixed_point() {
        let m = random_mdp(8, 3, 0.7, 42).unwrap();
        let pi = Policy::first_action(8);
        let v = value_function(&m, &pi).unwrap();
        let tv = bellman_apply(&m, &pi, &v).unwrap();
        assert!((&tv - &v).norm(NormKind::LInf) <= 1e-10);
    }

    #[test]
    fn constant_map_converges_after_one_application() {
        let c = Vector::from_slice(&[1.0, -2.0]).unwrap();
        let c2 = c.clone();
        let op = Operator::pointwise(2, "const", move |_| Ok(c2.clone()));
        let rep = value_iteration(&op, &Vector::zeros(2), 10, 0.0).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.fixed_point, c);
        assert_eq!(rep.residuals, vec![2.0, 0.0]);
        assert_eq!(rep.observed_rate, 0.0);
    }

    #[test]
    fn bellman_iteration_rate_is_at_most_gamma() {
        let m = random_mdp(8, 3, 0.7, 42).unwrap();
        let pi = Policy::first_action(8);
        let rep = value_iteration(&bellman_operator(&m, &pi).unwrap(), &Vector::zeros(8), 500, 1e-12).unwrap();
        assert!(rep.converged);
        assert!(rep.observed_rate <= 0.7 + 1e-6, "{}", rep.observed_rate);
        let exact = value_function(&m, &pi).unwrap();
        assert!((&rep.fixed_point - &exact).norm(NormKind::LInf) < 1e-10);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let op = Operator::pointwise(1, "shift", |v: &Vector| Ok(v.map(|x| x + 1.0)));
        let rep = value_iteration(&op, &Vector::zeros(1), 5, 1e-9).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 5);
    }
}
