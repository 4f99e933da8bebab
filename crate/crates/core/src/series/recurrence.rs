//! Solving `Σⱼ pⱼ tʲ r(t)^(m+j) = ±1` for the coefficients of `r(t)`.
//!
//! Coefficients are dense arrays; products are Cauchy convolutions truncated
//! at the current order. Each new coefficient `r_n` enters the order-`n`
//! equation only through the leading term, with pivot `m p_m r₀^(m−1)`.

use crate::scalar::Real;

/// Truncated product of two coefficient arrays, keeping degrees `0..=deg`.
pub(crate) fn mul_truncated<T: Real>(a: &[T], b: &[T], deg: usize) -> Vec<T> {
    (0..=deg)
        .map(|n| {
            let mut acc = T::zero();
            for i in 0..=n {
                if i < a.len() && n - i < b.len() {
                    acc = acc + a[i].clone() * b[n - i].clone();
                }
            }
            acc
        })
        .collect()
}

/// Why the recurrence could not start.
#[derive(Debug, Clone, PartialEq)]
pub enum RecurrenceFailure {
    /// `sign · p_m ≤ threshold`, so `r₀` is not real or the pivot vanishes.
    Pivot { leading: f64 },
}

/// Solves for `r₀..=r_order`.
///
/// `parts[j]` holds `p_{m+j}`; missing entries are treated as zero. `sign`
/// selects the level `±t^m`. `pivot_floor` is the smallest admissible
/// `|p_m|`.
pub fn solve_radial_series<T: Real>(
    parts: &[T],
    m: usize,
    order: usize,
    sign: f64,
    pivot_floor: f64,
) -> Result<Vec<T>, RecurrenceFailure> {
    let lead = parts.first().cloned().unwrap_or_else(T::zero);
    let signed = lead.value() * sign;
    if !(signed > pivot_floor) {
        return Err(RecurrenceFailure::Pivot {
            leading: lead.value(),
        });
    }
    let r0 = lead.scale(sign).powf(-1.0 / m as f64);
    let pivot = (lead * r0.powi(m - 1)).scale(m as f64);
    let mut r = vec![r0];
    for n in 1..=order {
        r.push(T::zero());
        // powers[k] = r^k truncated at degree n
        let mut acc = T::zero();
        let mut power = r.clone();
        for k in 2..=(m + n) {
            power = mul_truncated(&power, &r, n);
            if k >= m {
                let j = k - m;
                if j <= n && j < parts.len() {
                    acc = acc + parts[j].clone() * power[n - j].clone();
                }
            }
        }
        r[n] = -(acc / pivot.clone());
    }
    Ok(r)
}
