//! Library surface of the command-line tool: text grammars, JSON formats,
//! and the command implementations (shared with the integration tests).

pub mod commands;
pub mod jsonio;
pub mod parse;
