//! Lagrangian duality for quadratic programs with quadratic constraints.
//!
//! Data are quadratic functions `q_k(x) = ½⟨x, A_k x⟩ − ⟨b_k, x⟩ + c_k`
//! (`k = 0..m`) over `ℝⁿ`, with an index set `J ⊆ {1..m}` marking which
//! constraints hold with equality (`q_j(x) = 0`) and which as inequalities
//! (`q_j(x) ≤ 0`).  The crate builds:
//!
//! * the Lagrangian `L(x, λ) = q₀(x) + Σ λ_j q_j(x)` and its affine
//!   aggregates `A(λ)`, `b(λ)`, `c(λ)` ([`dual`]);
//! * the dual function `D(λ) = L(x, λ)` with `A(λ)x = b(λ)`, its gradient
//!   `∂D/∂λ_j = q_j(x(λ))` and Hessian, together with membership of `λ` in
//!   the multiplier sets `Y₀`, `Y⁺`, `Y⁻`, `Y_col`, `Y_col±`, `Γ_J` and
//!   their intersections ([`dual`]);
//! * KKT condition checks split by `J`, and graded global-optimality
//!   certificates justified by convexity of `L(·, λ̄)` on the relevant
//!   multiplier set ([`kkt`]);
//! * a projected damped-Newton maximizer of the concave dual over
//!   `Γ_J ∩ Y⁺` (and its mirror for maximization problems) producing
//!   certified solutions ([`solver`]);
//! * brute-force oracles (lattice enumeration, grid/arc sampling, local
//!   perturbation) used as independent ground truth ([`oracle`]);
//! * machine-readable encodings of five worked reference problems with
//!   known critical points and refuted textbook claims ([`corpus`]).
//!
//! All numeric code is generic over the scalar type through [`Scalar`];
//! concrete `f64` aliases are exported at the crate root.

pub mod corpus;
pub mod dual;
pub mod jsonfmt;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod tol;

pub use scalar::Scalar;
pub use tol::Tolerances;

/// `f64` aliases for the main domain types.
pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type QuadForm64 = model::QuadForm<f64>;
pub type Problem64 = model::Problem<f64>;
pub type DualEval64 = dual::DualEval<f64>;
pub type Certificate64 = kkt::Certificate<f64>;
pub type SolveResult64 = solver::SolveResult<f64>;
pub type OracleResult64 = oracle::OracleResult<f64>;
pub type Tolerances64 = tol::Tolerances<f64>;
