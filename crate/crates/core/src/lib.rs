//! Auto-grading of open-response math solutions.
//!
//! Solutions are split into expressions, canonicalized and encoded as a
//! bag of expressions ([`features`]). Similar solutions are clustered either
//! by similarity ([`mlp_s`]) or with a Bayesian mixture ([`mlp_b`]); an
//! instructor grades one representative per cluster and the grades are
//! propagated to everyone else ([`analysis`]).

pub mod analysis;
pub mod clustering;
pub mod eval;
pub mod expr;
pub mod features;
pub mod io;
pub mod mlp_b;
pub mod mlp_s;

pub use analysis::{analyze, analyze_with_progress, prepare, Analysis, AnalysisError, AnalysisParams, GradeReport, Method, Prepared, RepresentativeEntry};
pub use clustering::{adjusted_rand_index, ClusterAssignment, RepresentativeMethod, RepresentativeSet};
pub use expr::{canonical_key, canonicalize, parse, CanonicalForm, Expr, SimplificationLevel};
pub use features::{build_matrix, EncodingMode, FeatureMatrix, FeatureVector, RawSolution, SolutionFeatures};
pub use io::{DatasetFile, SolutionRecord};
pub use mlp_b::{FeedbackTrace, ModelHyperparams, PosteriorSummary};
pub use mlp_s::SimilarityMatrix;
