#![allow(dead_code)]

pub mod bench;
pub mod naive_scanner;
pub mod scenarios;
pub mod strategies;

pub const CORPUS: &str = include_str!("../fixtures/have_corpus.lean");

pub fn corpus_snippets() -> Vec<&'static str> {
    CORPUS.split("-- ==== snippet ====\n").collect()
}
