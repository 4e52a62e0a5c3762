//! Shared fixtures for the kernel benchmarks.

use qp_core::lattice::{HalfLatticePoint, Region};
use qp_core::operator::{OperatorInstance, OperatorParams};

pub fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

/// d=1 interval operator of radius `n`.
pub fn interval_op(n: u64, eps: f64) -> OperatorInstance {
    let region = Region::integer_cube(n as f64, &HalfLatticePoint::zero(1));
    let params = OperatorParams::new(eps, vec![golden()], 0.37, 0.0);
    OperatorInstance::assemble(&region, &params).expect("nonempty interval")
}

/// d=2 square operator of radius `n`.
pub fn square_op(n: u64, eps: f64) -> OperatorInstance {
    let region = Region::integer_cube(n as f64, &HalfLatticePoint::zero(2));
    let params = OperatorParams::new(eps, vec![golden(), 2f64.sqrt() - 1.0], 0.21, 0.3);
    OperatorInstance::assemble(&region, &params).expect("nonempty square")
}
