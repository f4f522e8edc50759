pub mod algebra;
pub mod curved;
pub mod error;
pub mod flat;
pub mod forms;
pub mod oracle;
pub mod output;
pub mod sphere;
pub mod symbol;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
