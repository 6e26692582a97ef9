// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fullline;
pub mod io;
pub mod modes;
pub mod observables;
pub mod pdeverify;
pub mod quadrature;
pub mod specfun;
pub mod trapdyn;
pub mod verify;
