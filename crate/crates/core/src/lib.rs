pub mod field;
pub mod lightcone_asym;
pub mod mb_oracle;
pub mod numerics;
pub mod pulse;
pub mod scattering;
pub mod soliton_spectrum;
pub mod specfun;
pub mod tail_asym;

pub use field::FieldTriple;
