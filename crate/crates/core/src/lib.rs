//! Exact computer-algebra kernel for resolving homomorphisms of free
//! modules over affine charts. The pipeline: polynomial arithmetic and
//! Groebner bases over the rationals, charts and ring maps, matrices of
//! polynomials with their determinantal ideals, iterated blowups along
//! those ideals, diagonalization certificates on the resulting leaves,
//! Fitting ideals and complex resolution, and Euler numbers for two-term
//! complexes on toy projective geometries.

pub mod blowup;
pub mod chart;
pub mod diag;
pub mod error;
pub mod euler;
pub mod hom;
pub mod ideal;
pub mod order;
pub mod par;
pub mod parse;
pub mod poly;
pub mod resolve;

pub use blowup::{
    blowup, blowup_with, determinantal_tower, tower_leaf_maps, BlowupChild, BlowupStep,
    BlowupTower, CenterOrder, TowerLeaf, TowerOptions,
};
pub use chart::{pull_ideal, same_ring, Atlas, Chart, Principality, RingMap};
pub use diag::{
    diagonalize_on_chart, is_locally_diagonalizable, kernel_basis, verify_cert, DiagCert,
    DiagOptions, DiagVerdict, KernelBasis, ReduceOutcome, VerifyFailure,
};
pub use euler::{
    chern_of_kernel, chern_of_p2_row_kernel, chern_of_split, euler_number,
    exceptional_vanishing_order, independence_harness, intersection_pairing, splitting_type_p1,
    ChernTotal, DivisorClass, EulerProblem, Geometry, GradedMatrix, ResolvedKernel,
    DEFAULT_DEGREE_CAP,
};
pub use resolve::{
    base_change_verify, fitting_ideal, fitting_independence_check, resolve_complex, torsion_check,
    LeafResolution, Presentation, ResolutionResult,
};
pub use error::{Error, Result};
pub use hom::{
    base_change_check, pullback_hom, rational_rank, ComplexOnChart, MatrixHom, PolyMat,
};
pub use ideal::{
    eliminate, ideal_equal, normal_form, reduced_groebner, saturate, Ideal,
    MembershipCertificate, TrackedBasis,
};
pub use order::MonomialOrder;
pub use parse::{parse_poly, parse_rational};
pub use poly::{divide_multivariate, Monomial, Poly, PolyOp, Rational};
