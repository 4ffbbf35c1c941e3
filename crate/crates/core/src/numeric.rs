//! Small numeric helpers shared by the statistics code.

/// Neumaier compensated summation. Results are independent of how the
/// inputs were batched up to rounding in the compensation term.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(sum(v), 1.0);
    }

    #[test]
    fn normal_cdf_reference_points() {
        // Reference values from scipy; statrs is accurate to ~1e-11 here.
        let cases = [
            (0.0, 0.5),
            (1.0, 0.8413447460685429),
            (-1.0, 0.15865525393145707),
            (1.96, 0.9750021048517795),
            (-3.0, 0.0013498980316300933),
            (5.0, 0.9999997133484281),
            (-6.0, 9.865876450376946e-10),
        ];
        for (x, want) in cases {
            let got = normal_cdf(x);
            assert!((got - want).abs() <= 1e-9, "x = {x}: {got} vs {want}");
        }
    }
}
