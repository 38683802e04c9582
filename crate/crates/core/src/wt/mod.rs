mod certificate;
mod functional;

pub use certificate::*;
pub use functional::*;
