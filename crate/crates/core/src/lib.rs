//! Exact computer-algebra kernel for jet-space invariants and the contact
//! classification of plane complete intersection germs over fields of
//! arbitrary characteristic.

pub mod error;
pub mod field;
pub mod poly;
pub mod germ;
pub mod window;
pub mod tangent;
pub mod invariants;
pub mod reduction;

pub use error::{Error, Result};
pub use field::{embed, embeds, common_field, nth_root, splitting_roots, Elt, Field, FieldSpec};
