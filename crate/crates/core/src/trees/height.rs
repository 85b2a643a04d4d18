/// Piecewise-linear leaf-height function: value `h(i/(n+1))` is the depth of the `i`-th leaf
/// from the left, with `h(0) = h(1) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafHeightFunction {
    values: Vec<f64>,
}

impl LeafHeightFunction {
    pub fn new(leaf_depths: Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(leaf_depths.len() + 2);
        values.push(0.0);
        values.extend(leaf_depths);
        values.push(0.0);
        LeafHeightFunction { values }
    }

    pub fn n_leaves(&self) -> usize {
        self.values.len() - 2
    }

    /// Breakpoints `(t, h(t))` for `t = 0, 1/(n+1), ..., 1`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let m = (self.values.len() - 1) as f64;
        self.values.iter().enumerate().map(|(i, &h)| (i as f64 / m, h)).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let m = (self.values.len() - 1) as f64;
        let x = t * m;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Uniform distance to another height function, evaluated on the union of breakpoints.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut ts: Vec<f64> = self.breakpoints().iter().chain(other.breakpoints().iter()).map(|p| p.0).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.iter().map(|&t| (self.eval(t) - other.eval(t)).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> Self {
        LeafHeightFunction { values: self.values.iter().map(|v| v * a).collect() }
    }
}

#[cfg(test)]
mod tests {
    use crate::trees::OrderedCladogram;

    #[test]
    fn two_leaves() {
        let h = OrderedCladogram::parse("(1,2)").unwrap().leaf_height_function();
        assert_eq!(h.eval(1.0 / 3.0), 2.0);
        assert_eq!(h.eval(2.0 / 3.0), 2.0);
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.eval(1.0), 0.0);
        assert!((h.eval(1.0 / 6.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_comb() {
        let h = OrderedCladogram::parse("(4,(3,(1,2)))").unwrap().leaf_height_function();
        let got: Vec<f64> = (1..=4).map(|i| h.eval(i as f64 / 5.0)).collect();
        for (g, e) in got.iter().zip([2.0, 3.0, 4.0, 4.0]) {
            assert!((g - e).abs() < 1e-12);
        }
        assert_eq!(h.max(), 4.0);
    }
}
