//! Convergence-order fits for grid refinement studies.

/// Least-squares slope of `log err` against `log N`, sign-flipped so that
/// `err ~ C N^{-p}` gives `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    pub sizes: Vec<usize>,
    pub errors: Vec<f64>,
    pub order: f64,
    /// Errors strictly decrease with every refinement.
    pub monotone: bool,
}

impl OrderFit {
    pub fn new(sizes: &[usize], errors: &[f64]) -> OrderFit {
        assert_eq!(sizes.len(), errors.len(), "one error per grid size");
        assert!(sizes.len() >= 2, "need at least two grids");
        let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let monotone = errors.windows(2).all(|w| w[1] < w[0]);
        OrderFit { sizes: sizes.to_vec(), errors: errors.to_vec(), order: -sxy / sxx, monotone }
    }

    /// Passes when the fit reaches `required` with monotone decay, or when
    /// every error already sits below `floor` (nothing left to converge).
    pub fn passes(&self, required: f64, floor: f64) -> bool {
        self.errors.iter().all(|e| *e <= floor) || (self.monotone && self.order >= required)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let sizes = [16, 32, 64];
        let errs: Vec<f64> = sizes.iter().map(|&n| 3.0 * (n as f64).powf(-4.0)).collect();
        let fit = OrderFit::new(&sizes, &errs);
        assert!((fit.order - 4.0).abs() < 1e-12);
        assert!(fit.monotone && fit.passes(3.5, 0.0));
    }

    #[test]
    fn floor_and_non_monotone() {
        let fit = OrderFit::new(&[16, 32, 64], &[1e-3, 2e-3, 1e-6]);
        assert!(!fit.monotone && !fit.passes(1.0, 1e-9));
        let tiny = OrderFit::new(&[16, 32], &[1e-14, 3e-14]);
        assert!(tiny.passes(3.5, 1e-12));
    }
}
