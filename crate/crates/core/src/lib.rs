pub mod coalition;
pub mod error;
pub mod experiments;
pub mod game;
pub mod lp;
pub mod nucleolus;
pub mod parse;
pub mod rational;
mod span;
pub mod theory;

pub use error::{Error, Result};
pub use game::{Coalition, NormalizedRepresentation, Representation, WeightType, WeightTypeTable};
pub use nucleolus::{nucleolus, nucleus_box, Engine, NucleolusResult, NucleusBox, SolverOptions};
pub use rational::Rational;
