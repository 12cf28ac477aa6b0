//! Shared inputs for the criterion benches.

use sft_core::superpoly::{SuperElement, TruncationPolicy};

/// `(sum of all variables)^k` truncated by `policy`, a dense test element.
pub fn dense_power(vars: &[SuperElement], k: u32, policy: &TruncationPolicy) -> SuperElement {
    let table = vars[0].table().clone();
    let mut sum = SuperElement::zero(&table);
    for v in vars {
        sum += v;
    }
    let mut acc = SuperElement::one(&table);
    for _ in 0..k {
        acc = acc.mul_truncated(&sum, policy);
    }
    acc
}
