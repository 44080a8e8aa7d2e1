pub mod dirac;
pub mod error;
pub mod families;
pub mod galerkin;
pub mod geometry;
pub mod grid;
pub mod hermitian;
pub mod perturbation;
pub mod scalar;
pub mod trigpoly;

#[cfg(test)]
pub(crate) mod test_util;

pub use dirac::{DiracOperator, SpinorField};
pub use error::{Error, Result};
pub use galerkin::{BasisKind, GalerkinMatrix, SpectrumReport, TrackedPair};
pub use geometry::{CoframeFamily, MetricSnapshot};
pub use grid::Grid;
pub use perturbation::{Branch, FitResult, PerturbationReport, PseudoInverse, Route};
pub use scalar::{Real, Scalar};
pub use trigpoly::{Matrix3Field, ParseScalar, TrigPoly};

pub type TrigPolyF64 = TrigPoly<f64>;
pub type TrigPolyQ = TrigPoly<num_rational::Rational64>;
pub type Matrix3FieldF64 = Matrix3Field<f64>;
pub type Matrix3FieldQ = Matrix3Field<num_rational::Rational64>;
pub type CoframeFamilyF64 = CoframeFamily<f64>;
pub type CoframeFamilyQ = CoframeFamily<num_rational::Rational64>;
pub type DiracOperatorF64 = DiracOperator<f64>;
pub type SpinorFieldF64 = SpinorField<f64>;
pub type GalerkinMatrixF64 = GalerkinMatrix<f64>;
pub type SpectrumReportF64 = SpectrumReport<f64>;
pub type PerturbationReportF64 = PerturbationReport<f64>;
pub type PerturbationReportQ = PerturbationReport<num_rational::Rational64>;
