//! Continuous double-integrator model and zero-order-hold discretisation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtiContinuous {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtiDiscrete {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub ts: f64,
}

impl LtiContinuous {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, DynamicsError> {
        if !a.is_square() || a.nrows() != b.nrows() {
            return Err(DynamicsError::Dimension(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite);
        }
        Ok(Self { a, b })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
}

impl LtiDiscrete {
    /// `A x + B u`.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let n = self.a.nrows();
        (0..n)
            .map(|i| {
                let ax: f64 = (0..n).map(|k| self.a[(i, k)] * x[k]).sum();
                let bu: f64 = (0..self.b.ncols()).map(|k| self.b[(i, k)] * u[k]).sum();
                ax + bu
            })
            .collect()
    }
}

/// Planar point mass with state `[r_x, v_x, r_y, v_y]` and input `[a_x, a_y]`.
pub fn double_integrator_2d() -> LtiContinuous {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 2, &[
        0.0, 0.0,
        1.0, 0.0,
        0.0, 0.0,
        0.0, 1.0,
    ]);
    LtiContinuous { a, b }
}

/// Position-extraction matrix for the `[r_x, v_x, r_y, v_y]` ordering.
pub fn position_selector() -> DMatrix<f64> {
    #[rustfmt::skip]
    let c = DMatrix::from_row_slice(2, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    ]);
    c
}

const SERIES_TOL: f64 = 1e-15;
const MAX_TERMS: usize = 200;

/// Zero-order-hold discretisation via the exponential of the augmented
/// matrix `[[A_c, B_c], [0, 0]]·Ts`. The Taylor series stops once a term's
/// max-norm drops below 1e-15, so nilpotent systems are reproduced exactly.
pub fn zoh_discretize(sys: &LtiContinuous, ts: f64) -> Result<LtiDiscrete, DynamicsError> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(DynamicsError::SamplePeriod(ts));
    }
    let sys = LtiContinuous::new(sys.a.clone(), sys.b.clone())?;
    let n = sys.states();
    let m = sys.inputs();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&sys.a);
    aug.view_mut((0, n), (n, m)).copy_from(&sys.b);
    aug *= ts;

    // scale only when the plain series would converge slowly
    let norm = aug.amax();
    let squarings = if norm > 1.0 {
        norm.log2().ceil() as u32
    } else {
        0
    };
    if squarings > 0 {
        aug /= 2f64.powi(squarings as i32);
    }

    let size = n + m;
    let mut result = DMatrix::identity(size, size);
    let mut term = DMatrix::identity(size, size);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = &term * &aug / k as f64;
        result += &term;
        if term.amax() < SERIES_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DynamicsError::NoConvergence);
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite);
    }
    Ok(LtiDiscrete {
        a: result.view((0, 0), (n, n)).into_owned(),
        b: result.view((0, n), (n, m)).into_owned(),
        ts,
    })
}
