//! View synchronization for web services built over autonomous information
//! sources.
//!
//! Views are written in E-SQL ([`esql`]), registered in a view knowledge base
//! ([`wsvkb`]) next to a meta knowledge base of source schemas and
//! substitution constraints ([`wsmkb`]). When a source deletes an attribute
//! or a relation, [`sync::synchronize`] rewrites every affected view
//! according to its evolution parameters, or reports that the web service
//! cannot be synchronized.

pub mod cli;
pub mod esql;
pub mod fuzz;
pub mod kbfile;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sync;
pub mod wsmkb;
pub mod wsvkb;
