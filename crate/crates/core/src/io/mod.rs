//! Interchange: term normalization, the session XML format, assertion
//! extraction and the verb-noun corpus bootstrap.

pub mod assertions;
pub mod corpus;
mod normalize;
pub mod replay;
pub mod session;
pub mod xml;

pub use assertions::{extract_assertions, gerund, Assertion, Relation};
pub use corpus::{bootstrap_corpus, CorpusEntry, CountProvider, TsvCounts};
pub use normalize::normalize_term;
pub use replay::apply_session;
pub use session::{Payload, PoagRecord, Session, SessionAction};
pub use xml::{export_session_xml, parse_session_xml, write_session_xml, XmlError};
