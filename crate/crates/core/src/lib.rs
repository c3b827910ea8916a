//! A workbench for finite universal algebra: congruence lattices of finite
//! algebras, m-permutability decided through chains of three-variable
//! terms, evaluation of the alternating bracket identity families and
//! their generalizations over arbitrary relations, and executable replay
//! of the witness constructions that transport membership from one side
//! of an identity to the other.
//!
//! Everything operates on explicit finite structures: universes are
//! `{0, …, n-1}`, operations are tables, relations are bit matrices.
//! Values are immutable after construction and all operations are pure,
//! so shared concurrent use is safe throughout.

pub mod algebra;
pub mod congruence;
pub mod harness;
pub mod identities;
pub mod malcev;
pub mod reference;
pub mod relation;
pub mod rst;
pub mod textio;

pub use algebra::{
    eval_term, parse_algebra, serialize_algebra, AlgebraError, FiniteAlgebra, OperationTable,
    Term, DEFAULT_SIZE_CAP,
};
pub use congruence::{
    as_congruence, beta_gamma, beta_gamma_sequence, enumerate_con, is_m_permutable, join, meet,
    parse_congruence, principal_congruence, serialize_congruence, BetaGammaPair, Congruence,
    CongruenceError, DEFAULT_CON_CAP,
};
pub use harness::{
    enumerate_algebras, parse_signature, probe_abh_vs_xmstar, serialize_signature,
    square_subalgebras_permutable, AlgebraRecord, SearchReport, SignatureSpec,
};
pub use identities::{
    check_abh, check_identity, extract_witness, h_from_m, AbhOutcome, Family, IdentityInstance,
    IdentityVerdict, Mode, Side, WitnessChain,
};
pub use malcev::{
    build_free3, construct_witnesses_rst, construct_witnesses_xm, hm_search, hm_search_capped,
    hm_verify, parse_chain, serialize_chain, Free3Outcome, FreeAlgebra3, HmChain, HmOutcome,
    HmVerdict, DEFAULT_FREE_CAP, DEFAULT_MAX_M,
};
pub use relation::{
    alt_power, compatible_closure, compose, parse_relation, relation_predicates,
    serialize_relation, transitive_closure, BinRelation, NamedRelation, RelationError,
};
pub use rst::{
    extract_left_witness, rst_check, rst_derived, RstDerived, RstInstance, RstVerdict, RstWitness,
};
pub use textio::ParseError;
