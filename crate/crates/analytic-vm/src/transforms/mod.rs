//! Machine-to-machine transformations: the limit lemma in both directions,
//! epigraph-based evaluation, the characteristic-function bridge, the
//! Cauchy transform, quantifier-reduction generators, and composition with
//! moduli of continuity. Every transformer is a pure function from programs
//! (or host-level specifications) to programs in the assembly language.

pub mod limit;
pub mod unisim;

pub use limit::{
    cauchy_transform, strong_charfn_to_decider, strong_oracle_to_weak, weak_to_strong,
    weak_to_strong_searcher,
};
