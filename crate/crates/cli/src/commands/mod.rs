pub mod corrupt;
pub mod evaluate;
pub mod filter;
pub mod relabel;
pub mod retokenize;
pub mod split;
pub mod stats;
