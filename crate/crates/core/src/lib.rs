//! Supervisory control of discrete event systems: automata, monolithic
//! synthesis, supervisor localization and its transformational variant for
//! evolving models, control-equivalence checking, and the cat-and-mouse
//! tower benchmark.

pub mod automaton;
pub mod bench;
pub mod cmt;
pub mod context;
pub mod cover;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod localization;
pub mod synthesis;
pub mod transformational;

pub use automaton::{
    apply_state_order, reachable_trim, sync_product, Automaton, AutomatonBuilder, EventDecl,
    EventId, EventTable, StateId, StateOrder,
};
pub use context::{build_context, AgentSpec, ControlContext};
pub use cover::Cover;
pub use equivalence::{check_control_equivalence, EquivalenceVerdict};
pub use error::{Error, Result};
pub use format::{parse_automaton, parse_automaton_with, write_automaton};
pub use localization::{
    build_local_supervisor, check_merge, is_control_congruence, is_maximally_reduced, localize,
    LocalSupervisor, WaitList,
};
pub use synthesis::synthesize_monolithic;
pub use transformational::{isolate, tsl, AgentMapping, TslOutput};
