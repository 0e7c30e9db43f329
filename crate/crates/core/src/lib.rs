#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod gfp;
pub mod linalg;
pub mod markov;
pub mod numeric;
pub mod ortho;
pub mod par;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod roots;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
