use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BASE_LR: f64 = 0.192;
pub const DEFAULT_REDUCTIONS: usize = 13;
pub const DEFAULT_FACTOR: f64 = 0.5;

/// Step learning-rate schedule with linear warmup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrSchedule {
    pub base_lr: f64,
    pub warmup_iters: usize,
    pub total_iters: usize,
    pub num_reductions: usize,
    pub factor: f64,
    /// Learning rate of every iteration, `total_iters` entries.
    pub values: Vec<f64>,
}

impl LrSchedule {
    /// Lengths of the constant plateaus after warmup.
    pub fn plateau_lengths(&self) -> Vec<usize> {
        plateau_lengths(self.total_iters - self.warmup_iters, self.num_reductions + 1)
    }

    pub fn final_lr(&self) -> f64 {
        *self.values.last().expect("non-empty schedule")
    }
}

fn plateau_lengths(iters: usize, plateaus: usize) -> Vec<usize> {
    let base = iters / plateaus;
    let extra = iters % plateaus;
    (0..plateaus).map(|i| base + usize::from(i < extra)).collect()
}

/// Linear warmup from `base / warmup` to `base`, then `reductions + 1`
/// equal-length plateaus at `base * factor^i`. When the post-warmup length
/// does not divide evenly the earlier plateaus are one iteration longer.
pub fn lr_schedule(
    base_lr: f64,
    warmup_iters: usize,
    total_iters: usize,
    reductions: usize,
    factor: f64,
) -> Result<LrSchedule> {
    if !(base_lr.is_finite() && base_lr > 0.0) {
        return Err(Error::invalid("base learning rate must be positive"));
    }
    if !(factor.is_finite() && factor > 0.0 && factor < 1.0) {
        return Err(Error::invalid("factor must lie in (0, 1)"));
    }
    if total_iters <= warmup_iters {
        return Err(Error::invalid("total iterations must exceed warmup"));
    }
    let plateaus = reductions + 1;
    let steady = total_iters - warmup_iters;
    if steady < plateaus {
        return Err(Error::invalid(format!(
            "{steady} post-warmup iterations cannot hold {plateaus} plateaus"
        )));
    }
    let mut values = Vec::with_capacity(total_iters);
    for i in 0..warmup_iters {
        values.push(base_lr * (i + 1) as f64 / warmup_iters as f64);
    }
    let mut lr = base_lr;
    for len in plateau_lengths(steady, plateaus) {
        values.extend(std::iter::repeat_n(lr, len));
        lr *= factor;
    }
    Ok(LrSchedule {
        base_lr,
        warmup_iters,
        total_iters,
        num_reductions: reductions,
        factor,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Run-length encoding of the post-warmup values; independent of
    /// `plateau_lengths`.
    fn runs(values: &[f64]) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in values {
            match out.last_mut() {
                Some((last, n)) if *last == v => *n += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    #[test]
    fn final_plateau_value() {
        let s = lr_schedule(0.192, 0, 1400, 13, 0.5).unwrap();
        assert_eq!(s.final_lr(), 2.34375e-5);
        assert_eq!(s.final_lr(), 0.192 / 8192.0);
    }

    #[test]
    fn no_reductions_is_constant() {
        let s = lr_schedule(0.1, 5, 50, 0, 0.5).unwrap();
        assert!(s.values[5..].iter().all(|&v| v == 0.1));
    }

    #[test]
    fn fourteen_plateaus_of_ten() {
        let s = lr_schedule(0.192, 10, 150, 13, 0.5).unwrap();
        let r = runs(&s.values[10..]);
        assert_eq!(r.len(), 14);
        assert!(r.iter().all(|&(_, n)| n == 10));
        assert_eq!(s.values[9], 0.192);
        assert!((s.values[0] - 0.0192).abs() < 1e-15);
    }

    #[test]
    fn infeasible_lengths_rejected() {
        assert!(lr_schedule(0.192, 10, 20, 13, 0.5).is_err());
        assert!(lr_schedule(0.192, 10, 10, 0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn plateaus_are_exact_and_balanced(warmup in 0usize..50, steady in 14usize..500, red in 0usize..14) {
            prop_assume!(steady > red);
            let s = lr_schedule(0.192, warmup, warmup + steady, red, 0.5).unwrap();
            prop_assert_eq!(s.values.len(), warmup + steady);
            let r = runs(&s.values[warmup..]);
            prop_assert_eq!(r.len(), red + 1);
            let mut expected = 0.192;
            for (i, &(v, _)) in r.iter().enumerate() {
                prop_assert_eq!(v, expected, "plateau {}", i);
                expected *= 0.5;
            }
            let lens: Vec<usize> = r.iter().map(|x| x.1).collect();
            prop_assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
            prop_assert!(s.values[warmup..].windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
