//! Fisher's exact test, Spearman correlation and the Wilcoxon signed-rank test.

mod fisher;
mod rank;

pub use fisher::{fisher_exact, ContingencyTable2x2, FisherResult};
pub use rank::{
    midranks, spearman, wilcoxon_signed_rank, SpearmanResult, WilcoxonMethod, WilcoxonResult, WILCOXON_EXACT_MAX,
};
