/// Result of [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub evaluations: usize,
    /// False when the evaluation cap stopped refinement early.
    pub converged: bool,
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`, with at most `max_evals` evaluations of `f`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_evals: usize) -> Quadrature {
    let mut q = State { f: &f, evals: 3, max_evals, converged: true };
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = q.step(a, b, fa, fm, fb, whole, tol, 60);
    Quadrature { value, evaluations: q.evals, converged: q.converged }
}

struct State<'a, F> {
    f: &'a F,
    evals: usize,
    max_evals: usize,
    converged: bool,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        if self.evals + 2 > self.max_evals {
            self.converged = false;
            return whole;
        }
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((self.f)(lm), (self.f)(rm));
        self.evals += 2;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth == 0 {
            self.converged = false;
            return left + right + delta / 15.0;
        }
        self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_sine() {
        let q = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12, 1_000_000);
        assert!(q.converged);
        assert!((q.value - 2.0).abs() < 1e-11);
    }

    #[test]
    fn kinked_integrand() {
        let q = adaptive_simpson(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12, 1_000_000);
        assert!((q.value - 0.29).abs() < 1e-11);
    }

    #[test]
    fn evaluation_cap_is_respected() {
        let q = adaptive_simpson(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, 1e-16, 101);
        assert!(!q.converged);
        assert!(q.evaluations <= 101);
    }
}
