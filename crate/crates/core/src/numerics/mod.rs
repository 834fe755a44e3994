//! Numeric kernels shared by the analytic and simulation layers.

mod grid;
mod lambert;
mod ode;
mod quad;
mod root;

pub use grid::{FunctionGrid, Monotonicity};
pub use lambert::{lambert_w0, lambert_w_minus1, tau_pair};
pub use ode::{solve_ivp, DEFAULT_STEPS};
pub use quad::{integrate_adaptive, integrate_with_breaks, MAX_DEPTH};
pub use root::find_root_bisect;
