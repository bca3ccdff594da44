pub mod cheb;
pub mod fit;
pub mod ode;
pub mod quad;
pub mod series;
