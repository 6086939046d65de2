//! Detection of chatbot-written paragraphs from stylometric features and
//! word embeddings.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads paired human/chatbot paragraphs, splits them and
//!   computes corpus statistics.
//! * [`lingua`] tokenizes, segments and tags text against a bundled
//!   [`Lexicon`](lingua::Lexicon).
//! * [`features`] turns each paragraph into 32 stylometric features.
//! * [`select`] reduces or filters those features (PCA, LDA, permutation
//!   importance, Lasso).
//! * [`learn`] trains logistic regression, linear SVM, random forest,
//!   gradient-boosted trees and MLPs from scratch.
//! * [`embed`] builds TF-IDF, CBOW and GloVe representations as an
//!   alternative input track.
//! * [`ablate`] perturbs features or SVM weights and measures the
//!   accuracy response.
//! * [`genclient`] produces the chatbot half of a corpus through a
//!   chat-completion endpoint.

pub mod ablate;
pub mod corpus;
pub mod embed;
pub mod features;
pub mod genclient;
pub mod learn;
pub mod lingua;
pub mod linalg;
pub mod select;
pub mod synthetic;

mod seed;

pub use corpus::{Corpus, Label, ParagraphRecord};
pub use features::{Feature, FeatureMatrix, FeatureVector};
pub use learn::{ModelSpec, TrainedModel};
pub use lingua::Lexicon;
pub use seed::derive_seed;
