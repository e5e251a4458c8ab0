//! Closeness guarantees between the continuous system and its quantized
//! abstraction.

/// `ε = T·δ·H·𝓛`.
pub fn epsilon_bound(horizon: usize, delta: f64, lipschitz: f64, lebesgue: f64) -> f64 {
    horizon as f64 * delta * lipschitz * lebesgue
}

/// Discretization needed for a target `ε`: `δ = ε / (T·H·𝓛)`.
pub fn delta_for_epsilon(epsilon: f64, horizon: usize, lipschitz: f64, lebesgue: f64) -> f64 {
    epsilon / (horizon as f64 * lipschitz * lebesgue)
}

/// `[max(0, p − ε), min(1, p + ε)]`.
pub fn policy_interval(p: f64, epsilon: f64) -> (f64, f64) {
    ((p - epsilon).max(0.0), (p + epsilon).min(1.0))
}

/// Distance between the optimum of the abstraction and that of the original
/// system.
pub fn optimal_gap(epsilon: f64) -> f64 {
    2.0 * epsilon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_examples() {
        // 2.4678 is the four-decimal rounding of the room constant
        let h_room = 2.0 * 0.978 / (0.3162 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((epsilon_bound(10, 0.01, 2.4678, 1.0) - 0.2468).abs() < 5e-5);
        assert!((epsilon_bound(10, 0.05, 0.15963, 1.0) - 0.0798).abs() < 5e-5);
        assert!((epsilon_bound(10, 0.2, h_room, 1.0) - 4.9357).abs() < 5e-5);
    }

    #[test]
    fn epsilon_is_linear_in_each_argument() {
        let e = epsilon_bound(10, 0.03, 1.7, 1.2);
        assert!((epsilon_bound(20, 0.03, 1.7, 1.2) - 2.0 * e).abs() < 1e-14);
        assert!((epsilon_bound(10, 0.09, 1.7, 1.2) - 3.0 * e).abs() < 1e-14);
        assert!((epsilon_bound(10, 0.03, 0.85, 1.2) - 0.5 * e).abs() < 1e-14);
        assert!((epsilon_bound(10, 0.03, 1.7, 2.4) - 2.0 * e).abs() < 1e-14);
    }

    #[test]
    fn delta_examples() {
        assert!((delta_for_epsilon(0.2468, 10, 2.4678, 1.0) - 0.01).abs() < 1e-5);
        assert!((delta_for_epsilon(1.0, 10, 1.0, 1.0) - 0.1).abs() < 1e-15);
        let eps = 0.37;
        let d = delta_for_epsilon(eps, 7, 1.3, 2.0);
        assert!((epsilon_bound(7, d, 1.3, 2.0) - eps).abs() < 1e-15);
    }

    #[test]
    fn interval_examples() {
        let (l, h) = policy_interval(0.9753, 0.2468);
        assert!((l - 0.7285).abs() < 5e-5);
        assert_eq!(h, 1.0);
        let (l, h) = policy_interval(0.9995, 0.1596);
        assert!((l - 0.8399).abs() < 5e-5);
        assert_eq!(h, 1.0);
        assert_eq!(policy_interval(0.5, 0.0), (0.5, 0.5));
    }

    #[test]
    fn gap_examples() {
        assert!((optimal_gap(0.016) - 0.032).abs() < 1e-15);
        assert_eq!(optimal_gap(0.0), 0.0);
        let e = epsilon_bound(10, 0.1, 0.15963, 1.0);
        assert_eq!(optimal_gap(e) / 2.0, e);
    }
}
