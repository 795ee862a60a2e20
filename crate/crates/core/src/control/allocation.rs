//! Pseudo-inverse control allocation with clamp-after-solve saturation.

use nalgebra::{DVector, Matrix6xX, MatrixXx6, Vector6};

use crate::airframe::AllocationMatrix;

/// Moore-Penrose inverse; singular values below `1e-9·σ_max` count as zero.
/// `None` only for an all-zero matrix.
pub fn pseudo_inverse(b: &Matrix6xX<f64>) -> Option<MatrixXx6<f64>> {
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let tol = 1e-9 * smax;
    let u = svd.u.as_ref()?;
    let v_t = svd.v_t.as_ref()?;
    let mut pinv = MatrixXx6::zeros(b.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            pinv += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    Some(pinv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub thrusts: DVector<f64>,
    pub saturated: bool,
}

fn clamp_to_limits(mut u: DVector<f64>, limits: &[(f64, f64)]) -> Allocation {
    let mut saturated = false;
    for (v, &(lo, hi)) in u.iter_mut().zip(limits) {
        let c = v.clamp(lo, hi);
        if c != *v {
            saturated = true;
        }
        *v = c;
    }
    Allocation { thrusts: u, saturated }
}

pub fn allocate(b: &AllocationMatrix, wrench: &Vector6<f64>, limits: &[(f64, f64)]) -> Allocation {
    assert_eq!(limits.len(), b.rotor_count(), "one limit pair per rotor");
    let u = match pseudo_inverse(&b.0) {
        Some(p) => p * wrench,
        None => DVector::zeros(b.rotor_count()),
    };
    clamp_to_limits(u, limits)
}

/// Allocator that reuses the pseudo-inverse while the matrix is unchanged.
#[derive(Debug, Clone, Default)]
pub struct Allocator {
    cached: Option<(Matrix6xX<f64>, MatrixXx6<f64>)>,
}

impl Allocator {
    pub fn allocate(&mut self, b: &AllocationMatrix, wrench: &Vector6<f64>, limits: &[(f64, f64)]) -> Allocation {
        let fresh = match &self.cached {
            Some((m, _)) => m != &b.0,
            None => true,
        };
        if fresh {
            self.cached = pseudo_inverse(&b.0).map(|p| (b.0.clone(), p));
        }
        let u = match &self.cached {
            Some((_, p)) => p * wrench,
            None => DVector::zeros(b.rotor_count()),
        };
        clamp_to_limits(u, limits)
    }
}
