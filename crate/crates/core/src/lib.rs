//! # infinitewalk
//!
//! DeepWalk-style node embeddings computed in closed form.
//!
//! The window-`T` DeepWalk PMI matrix has a simple `T → ∞` limit,
//!
//! ```text
//! M∞ = J + D̃^{-1/2} (L̃⁺ - I) D̃^{-1/2},
//! ```
//!
//! built from the pseudoinverse of the normalized Laplacian. The finite-`T`
//! matrix is then approximated by the entrywise nonlinearity
//! `log(R(J + M∞/T))` and factorized. A cruder variant thresholds the
//! unnormalized Laplacian pseudoinverse at a quantile and factorizes the
//! resulting 0/1 matrix.
//!
//! Modules:
//!
//! - [`graph`]: graphs, edge-list/label parsing, component extraction, the
//!   walkability gate.
//! - [`spectral`]: eigendecomposition of `P̃` and Laplacian pseudoinverses.
//! - [`pmi`]: exact, closed-form, limiting, approximate and sampled PMI.
//! - [`embed`]: truncated factorization and quantile binarization.
//! - [`eval`]: one-vs-rest logistic regression and F1 sweeps.
//! - [`io`]: file formats shared with the command-line tool.

pub mod embed;
pub mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pmi;
pub mod spectral;

pub use embed::{
    binarize_lpinv, embed, embed_with_cache, factorize, BinaryMatrix, EmbedConfig, EmbedMethod, Embedding,
    Factorization,
};
pub use error::{Error, ParseErrorKind, Result, WalkabilityError};
pub use eval::{
    evaluate_sweep, f1_scores, predict_top_k, train_logreg_ovr, Classifier, EvalConfig, EvalReport, EvalRow,
    F1Scores,
};
pub use graph::{
    largest_connected_component, load_edge_list, load_labels, validate_walkable, Edge, Graph, LabeledDataset,
    NodeLabels,
};
pub use pmi::{
    approx_error_report, default_epsilon, empirical_pmi, pmi_approx, pmi_closed_form, pmi_exact, pmi_limit,
    pmi_limit_rank3, ErrorReport, LimitMatrix, PmiConfig, PmiKind, PmiMatrix, Ramp, WalkConfig,
};
pub use spectral::{
    eigendecompose, fiedler_value, normalized_laplacian_pinv, spectral_cache, sym_transition,
    unnormalized_laplacian_pinv, DenseSymMatrix, SpectralCache,
};
