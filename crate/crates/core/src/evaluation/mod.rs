//! MaxMatch (M2) evaluation.

pub mod classify;
pub mod edits;
pub mod m2;
pub mod maxmatch;
pub mod report;
pub mod retokenize;

pub use classify::{classify_edit, CoarseType};
pub use edits::{apply_edits, extract_system_edits, Edit, SystemEdit};
pub use m2::{parse_m2, write_m2, AnnotatorEdits, GoldAnnotation, GoldEdit, M2Error, M2ErrorKind};
pub use maxmatch::{max_match_sentence, AnnotatorMatch, MatchError, MaxMatchConfig};
pub use report::{evaluate_corpus, AnnotatorPolicy, Counts, EvalError, EvalOptions, EvalReport, Scores, BETA};
pub use retokenize::{retokenize, Retokenizer};
