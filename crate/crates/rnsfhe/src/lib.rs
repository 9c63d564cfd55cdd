//! RNS-CKKS building blocks.
//!
//! * [`modarith`]: primes, roots of unity, Barrett products, twiddles, RNS bases.
//! * [`poly`]: reference and hierarchical NTT, automorphisms, the MAS unit.
//! * [`trivium`]: the 64-bit-seed keystream used to expand key halves.
//! * [`ckks`]: encoding, encryption, multiplication, rescaling, rotation and
//!   key switching for any digit count.
//! * [`codec`]: binary formats for polynomials, ciphertexts and seeded keys.
//! * [`verify`]: oracle-differential suites driven by the command-line tool.

pub mod ckks;
pub mod codec;
pub mod modarith;
pub mod poly;
pub mod trivium;
pub mod verify;

pub use modarith::{find_ntt_prime, mod_mul, PrimeModulus, RnsBasis, TwiddleMode};
pub use poly::{Domain, NttContext, NttPlan, Poly};
