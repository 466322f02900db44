//! Model evaluation: ROC/AUC, stratified cross-validation, the lead/lag
//! evaluation grid and its heatmap rendering.

pub mod cv;
pub mod grid;
pub mod heatmap;
pub mod roc;

pub use cv::{cross_validate, stratified_folds, CvResult};
pub use grid::{run_cell, run_grid, CellResult, CellStatus, EvaluationGrid, GridConfig};
pub use heatmap::{render_heatmap, HeatmapFiles, Metric};
pub use roc::{rank_auc, roc_auc, RocCurve};
