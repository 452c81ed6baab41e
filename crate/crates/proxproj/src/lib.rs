//! Proximal projection: Douglas-Rachford splitting with an exact projection
//! onto `{x : ||A x - b|| <= eps}`, applied to basis pursuit, stable principal
//! component pursuit, earth mover's distance and stable matrix completion,
//! together with the comparison methods and instance generators.

pub mod apps;
pub mod baselines;
pub mod drs;
pub mod error;
pub mod gen;
pub mod instance;
pub mod linalg;
pub mod projection;
pub mod prox;

pub use error::{Error, Result};
