use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stationarity {
    Saddle,
    SecondOrder,
    NonStationary,
}

impl Stationarity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stationarity::Saddle => "saddle",
            Stationarity::SecondOrder => "second-order",
            Stationarity::NonStationary => "non-stationary",
        }
    }
}

impl fmt::Display for Stationarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label a point from its gradient norm and smallest Hessian eigenvalue.
/// `epsilon` and `rho_hat` must be positive. Ties go to `Saddle`.
pub fn classify_stationarity(gradnorm: f64, lambda_min: f64, epsilon: f64, rho_hat: f64) -> Stationarity {
    if gradnorm > epsilon {
        return Stationarity::NonStationary;
    }
    if lambda_min <= -(rho_hat * epsilon).sqrt() {
        Stationarity::Saddle
    } else {
        Stationarity::SecondOrder
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(classify_stationarity(0.0, -4.0, 0.1, 8.0), Stationarity::Saddle);
        assert_eq!(classify_stationarity(0.0, 4.0, 0.1, 8.0), Stationarity::SecondOrder);
        assert_eq!(classify_stationarity(1.0, -4.0, 0.1, 8.0), Stationarity::NonStationary);
    }

    #[test]
    fn boundary_is_saddle() {
        let lam = -(0.8f64).sqrt();
        assert_eq!(classify_stationarity(0.1, lam, 0.1, 8.0), Stationarity::Saddle);
    }
}
