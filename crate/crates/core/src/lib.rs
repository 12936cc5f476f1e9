//! Certification toolkit for entrywise (Schur) multipliers: symbol
//! validation, unitary Gram witness search, truncated dilation systems and
//! the operator-algebra checks backing them.

pub mod cert;
pub mod dilation;
pub mod linalg;
pub mod opalg;
pub mod schur;
pub mod witness;
