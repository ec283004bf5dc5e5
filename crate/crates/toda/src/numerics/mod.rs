//! Complex special functions, real-line quadrature, polynomial roots,
//! Newton solvers and an adaptive ODE integrator.

pub mod ode;
pub mod poly;
pub mod quadrature;
pub mod solve;
pub mod special;

pub use poly::{elementary_from_power_sums, elementary_symmetric, multiset_distance, poly_roots, relative_multiset_distance, Polynomial};
pub use quadrature::{gauss_legendre, quad_real_line, ComplexGrid, QuadResult};
pub use solve::{fd_jacobian, newton_system, solve_linear, NewtonOptions, NewtonReport};
pub use special::{dilog, gamma, log_gamma, log_rgamma, log_sin_pi, rgamma, varpi};
