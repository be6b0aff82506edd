//! Spectral fractional Laplacian on bounded domains, the truncated Pohozaev
//! matrices `Q⁽¹⁾`, `P⁽ˢ⁾`, `Q⁽ˢ⁾ = P⁽ˢ⁾ ∘ Q⁽¹⁾`, and semilinear Galerkin solvers.

pub mod eigenbasis;
pub mod pohozaev;
pub mod quadrature;
pub mod semilinear;
pub mod sfl;
pub mod special;
