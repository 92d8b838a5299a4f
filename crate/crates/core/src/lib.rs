//! Exact and numerical solutions of the dissipationless Hall-MHD X-point
//! collapse coefficient system.
//!
//! - [`elliptic`]: complete integral `K`, Jacobi `sn/cn/dn` (real and complex
//!   modulus), Weierstrass `℘`.
//! - [`model`]: the coefficient ODEs, their conservation laws, the reduced
//!   quartic-oscillator energy and the orbit-regime classification.
//! - [`closedform`]: closed-form orbits for every regime, periods, blow-up
//!   times, the `e^{2Q}` factors and the `d_e = 0` coefficient reconstruction.
//! - [`integrate`]: an adaptive Dormand-Prince oracle with blow-up detection.

pub mod closedform;
pub mod elliptic;
pub mod integrate;
pub mod model;

pub use elliptic::Complex;
