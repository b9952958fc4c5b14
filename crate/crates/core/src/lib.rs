//! Dual groups of `Q*/Γ` and `(Q*)^2/Γ`, where `Γ` is generated by the
//! fractions `(an+b)/(An+B)` (or the pairs `(an+b) ⊗ (An+B)`) for `n > n0`.
//!
//! The pipeline runs in exact arithmetic throughout:
//!
//! 1. [`family`] derives the reduced constraints and modulus bounds.
//! 2. [`eta`] filters Dirichlet characters at each prime power of the bound
//!    by the local character sums `η(β, γ)`.
//! 3. [`dual`] assembles the local survivors by CRT, checks constancy on a
//!    full period and pins the values at the primes dividing the moduli.
//! 4. [`membership`] classifies rationals (or pairs) against the dual group,
//!    and [`finder`] constructs explicit products with exponents in `{-1,0,1}`.

pub mod arith;
pub mod characters;
pub mod cli;
pub mod dual;
pub mod eta;
pub mod family;
pub mod finder;
pub mod membership;
pub mod rational;

pub use characters::{enumerate_characters, CharacterValue, DirichletCharacter};
pub use dual::{assemble_dual, assemble_dual_with, group_structure, DualCharacter, DualGroup, DualOptions};
pub use family::{FamilyConstraints, FractionFamily, Mode, ModulusBounds};
pub use finder::{bounded_search, build_basis, hnf_solve, verify, GeneratorBasis, RepresentationCertificate};
pub use membership::{classify, criterion_table, MembershipVerdict, Target, Verdict};
pub use rational::PositiveRational;
