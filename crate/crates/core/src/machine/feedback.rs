/// Desired output of a class bank during an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// The sample does not belong to the class (`y = 0`).
    Zero,
    /// The sample belongs to the class (`y = 1`).
    One,
}

/// Probability that any one clause receives feedback, given the class sum.
///
/// The sum is clipped to `[-T, T]` first, so feedback fades as the vote
/// approaches the target margin.
pub fn feedback_probability(class_sum: f64, target: Target, threshold: u32) -> f64 {
    let t = f64::from(threshold.max(1));
    let s = class_sum.clamp(-t, t);
    match target {
        Target::Zero => (t + s) / (2.0 * t),
        Target::One => (t - s) / (2.0 * t),
    }
}
