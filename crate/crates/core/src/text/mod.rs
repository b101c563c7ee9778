//! Tokenization, lemmatization, vocabulary ranking and rank-frequency fitting.

mod lemma;
mod tokenize;
mod vocab;
mod zipf;

pub use lemma::lemmatize;
pub use tokenize::{
    default_exclusions, is_numeric, load_exclusions, parse_exclusions, split_tokens,
    tokenize_and_filter, TermList, Tokenizer,
};
pub use vocab::{author_profiles, build_vocabulary, AuthorProfile, Vocabulary};
pub use zipf::{
    default_fit_options, fit_vocabulary, fit_zipf_mandelbrot, fitted_curve, zipf_objective,
    ZipfFit,
};
