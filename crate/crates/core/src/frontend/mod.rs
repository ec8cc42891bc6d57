//! Corpus construction: the subset-grammar parser and the facts ingester.

mod ast;
mod corpus;
mod facts;
mod lexer;
mod parser;
mod printer;

pub use ast::{AstNode, NodeType};
pub use corpus::{corpus_stats, parse_source, Corpus, CorpusStats, Diagnostics, MethodEntry};
pub use facts::{export_facts, export_path_contexts, ingest_facts};
pub use parser::{parse_file, parse_method, ParsedFile};
pub use printer::{print_class, print_method};
