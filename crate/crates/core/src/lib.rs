//! Unimodular triangulations of simplicial lattice cones with short
//! subdividing vectors.
//!
//! The pipeline has two phases. [`p2t::run_p2t`] subdivides the base cone
//! until every multiplicity is a power of two, steering the subdividing
//! vectors so that both the multiplicities and the vector lengths stay
//! bounded. [`pow2::refine_to_unimodular`] then halves multiplicities until
//! every cone is unimodular. [`verify`] certifies the result and every bound
//! along the way.
//!
//! ```
//! use conetri_core::{triangulate, LatticeVector, SimplicialCone};
//!
//! let base = SimplicialCone::new(vec![
//!     LatticeVector::from([1, 0]),
//!     LatticeVector::from([1, 3]),
//! ])?;
//! let run = triangulate(base)?;
//! assert_eq!(run.unimodular.len(), 3);
//! assert!(run.certify()?.passed());
//! # Ok::<(), conetri_core::Error>(())
//! ```

pub mod cone;
pub mod error;
pub mod linalg;
pub mod number_theory;
pub mod p2t;
pub mod pow2;
pub mod triangulation;
pub mod verify;

pub use cone::{BarycentricFrame, ConeId, LatticeVector, SimplicialCone, XiLabels};
pub use error::{Error, Result};
pub use linalg::{IntMatrix, RationalVector};
pub use p2t::{run_p2t, P2TState, TraceEvent};
pub use pow2::refine_to_unimodular;
pub use triangulation::Triangulation;
pub use verify::CertificateReport;

/// Both phases for one base cone.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub p2t: P2TState,
    pub unimodular: Triangulation,
}

impl Pipeline {
    pub fn certify(&self) -> Result<CertificateReport> {
        verify::certify(&self.p2t, &self.unimodular)
    }
}

/// Runs the 2-power reduction followed by the unimodular refinement.
pub fn triangulate(base: SimplicialCone) -> Result<Pipeline> {
    triangulate_bounded(base, None)
}

/// [`triangulate`] with a cap on the number of cones in the result.
pub fn triangulate_bounded(base: SimplicialCone, max_cones: Option<usize>) -> Result<Pipeline> {
    let p2t = run_p2t(base)?;
    let unimodular = pow2::refine_bounded(p2t.triangulation.clone(), max_cones)?.triangulation;
    Ok(Pipeline { p2t, unimodular })
}
