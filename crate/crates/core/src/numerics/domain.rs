use std::fmt;
use std::sync::Arc;

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Open parameter region. Evaluations outside it are rejected, never extrapolated.
#[derive(Clone)]
pub enum Domain {
    /// Open box `lo < x < hi`, infinite bounds allowed.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Arbitrary membership test.
    Predicate { dim: usize, test: Predicate },
}

impl Domain {
    pub fn open_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds must have equal length");
        Domain::Box { lo, hi }
    }

    pub fn unbounded(dim: usize) -> Self {
        Domain::Box {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    pub fn predicate(dim: usize, test: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Domain::Predicate {
            dim,
            test: Arc::new(test),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Predicate { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v > *l && *v < *h),
            Domain::Predicate { test, .. } => test(x),
        }
    }

    /// Box bounds if this is a box domain.
    pub fn bounds(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Domain::Box { lo, hi } => Some((lo, hi)),
            Domain::Predicate { .. } => None,
        }
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Box { lo, hi } => f.debug_struct("Box").field("lo", lo).field("hi", hi).finish(),
            Domain::Predicate { dim, .. } => f.debug_struct("Predicate").field("dim", dim).finish(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_is_open() {
        let d = Domain::open_box(vec![0.0], vec![1.0]);
        assert!(d.contains(&[0.5]));
        assert!(!d.contains(&[0.0]));
        assert!(!d.contains(&[1.0]));
        assert!(!d.contains(&[0.5, 0.5]));
    }

    #[test]
    fn predicate_domain() {
        let d = Domain::predicate(2, |x| x[0] * x[0] + x[1] * x[1] < 1.0);
        assert!(d.contains(&[0.1, 0.2]));
        assert!(!d.contains(&[1.0, 0.2]));
        assert!(!d.contains(&[f64::NAN, 0.0]));
    }
}
