/// Position learning rate: linear from `init` to `fin` over `max_steps`, then held at `fin`.
pub fn position_lr(t: usize, init: f64, fin: f64, max_steps: usize) -> f64 {
    if t >= max_steps {
        return fin;
    }
    let s = t as f64 / max_steps as f64;
    init * (1.0 - s) + fin * s
}

/// Active SH degree: `min(3, floor(4t / iterations))`.
pub fn sh_schedule(t: usize, iterations: usize) -> usize {
    if iterations == 0 {
        return 0;
    }
    ((4 * t) / iterations).min(3)
}

/// Whether densification and pruning run after step `t`.
pub fn is_densify_step(t: usize, start: usize, end: usize, interval: usize) -> bool {
    (start..=end).contains(&t) && t % interval == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn position_lr_endpoints() {
        assert_eq!(position_lr(0, 1.6e-4, 1.6e-6, 30_000), 1.6e-4);
        assert_eq!(position_lr(30_000, 1.6e-4, 1.6e-6, 30_000), 1.6e-6);
        assert_eq!(position_lr(90_000, 1.6e-4, 1.6e-6, 30_000), 1.6e-6);
        assert!((position_lr(15_000, 1.6e-4, 1.6e-6, 30_000) - 8.08e-5).abs() < 1e-18);
    }

    #[test]
    fn sh_endpoints() {
        assert_eq!(sh_schedule(0, 5000), 0);
        assert_eq!(sh_schedule(4999, 5000), 3);
        assert_eq!(sh_schedule(1250, 5000), 1);
    }

    #[test]
    fn densify_window() {
        assert!(!is_densify_step(400, 500, 15_000, 100));
        assert!(is_densify_step(500, 500, 15_000, 100));
        assert!(!is_densify_step(550, 500, 15_000, 100));
        assert!(is_densify_step(15_000, 500, 15_000, 100));
        assert!(!is_densify_step(15_100, 500, 15_000, 100));
    }

    proptest! {
        #[test]
        fn sh_is_monotone(iters in 1usize..20_000, a in 0usize..30_000, b in 0usize..30_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(sh_schedule(lo, iters) <= sh_schedule(hi, iters));
        }

        #[test]
        fn lr_is_between_endpoints(t in 0usize..60_000) {
            let lr = position_lr(t, 1.6e-4, 1.6e-6, 30_000);
            prop_assert!((1.6e-6..=1.6e-4).contains(&lr));
        }
    }
}
