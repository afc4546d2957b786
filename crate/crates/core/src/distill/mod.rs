//! Distillation from a large trained machine into a small one: clause
//! transfer, teacher distributions, and soft-label fitting.

mod enhanced;
mod soft_labels;
mod transfer;

pub use enhanced::{fit_enhanced, fit_enhanced_epoch, soft_updates, DistillParams, SoftUpdate};
pub use soft_labels::{
    class_sums_unclamped, get_soft_labels, soft_label_row, temperature_scale, SoftLabelMatrix,
};
pub use transfer::{
    direct_count, diversity_score, intelligent_transfer, ClassSelection, TransferSelection,
};
