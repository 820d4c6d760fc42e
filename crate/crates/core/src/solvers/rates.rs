use crate::error::{Error, Result};

/// Learning rates from the strong-concavity and smoothness constants, with
/// admissibility flags for the one- and two-sided step-size conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRates {
    pub alpha: f64,
    pub beta: f64,
    /// `beta < 1/(4 L_y^2)` and `alpha <= min(1/L_x, 1/(L_x/2 + 2 L_x^2/(gamma^2 beta) + beta L_x^2/2))`.
    pub one_sided_admissible: bool,
    /// `beta < gamma/(4 (3 L_y^2 + 2))` and `alpha <= min(L_x, 1/(L_x/2 + 6 L_x^2/(gamma^2 beta) + 3 beta L_x^2/2))`.
    pub two_sided_admissible: bool,
}

/// `beta = gamma/(8 L_y^2)`, `alpha = 1/(L_x + 4 L_x^2/(gamma^2 beta) + beta L_x^2)`.
pub fn theory_rates(gamma: f64, l_x: f64, l_y: f64) -> Result<TheoryRates> {
    for (name, v) in [("gamma", gamma), ("L_x", l_x), ("L_y", l_y)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let beta = gamma / (8.0 * l_y * l_y);
    let alpha = 1.0 / (l_x + 4.0 * l_x * l_x / (gamma * gamma * beta) + beta * l_x * l_x);

    let g2b = gamma * gamma * beta;
    let one_sided_admissible = beta < 1.0 / (4.0 * l_y * l_y)
        && alpha <= (1.0 / l_x).min(1.0 / (l_x / 2.0 + 2.0 * l_x * l_x / g2b + beta * l_x * l_x / 2.0));
    let two_sided_admissible = beta < gamma / (4.0 * (3.0 * l_y * l_y + 2.0))
        && alpha <= l_x.min(1.0 / (l_x / 2.0 + 6.0 * l_x * l_x / g2b + 3.0 * beta * l_x * l_x / 2.0));

    Ok(TheoryRates {
        alpha,
        beta,
        one_sided_admissible,
        two_sided_admissible,
    })
}
