//! Closed-form Fisher-information ratios for a pure, unsqueezed input
//! (`T = 1`, `r = 0`): optimal homodyne and heterodyne against the QFI, and
//! heterodyne against optimal homodyne.

use crate::error::{ensure, Error, Result};

struct Pieces {
    g: f64,
    e: f64,
    q: f64,
    het_num: f64,
    het_den: f64,
    tau4: f64,
}

fn pieces(tau: f64, lambda_tilde: f64) -> Result<Pieces> {
    ensure(tau.is_finite() && tau >= 0.0, || format!("tau must be >= 0, got {tau}"))?;
    ensure(lambda_tilde.is_finite() && lambda_tilde >= 0.0, || {
        format!("lambda_tilde must be >= 0, got {lambda_tilde}")
    })?;
    if lambda_tilde == 0.0 {
        return Err(Error::DegeneratePureState);
    }
    if tau == 0.0 {
        return Err(Error::Uninformative);
    }
    let t2 = tau * tau;
    let b = 1.0 + t2 / 3.0;
    let c = tau * t2 * lambda_tilde / 12.0;
    let a = b + c;
    let root = (9.0 + 3.0 * t2 + t2 * t2).sqrt();
    let h = 1.0 + t2 / 6.0;
    let k1 = 1.0 + 0.5 * tau * lambda_tilde;
    let k2 = 1.0 + t2 / 4.0 + lambda_tilde * tau * t2 / 24.0;
    Ok(Pieces {
        g: lambda_tilde * tau * a,
        e: t2 / (3.0 + t2 + root) + 2.0 * c,
        q: 0.5 * b * b + b * c + c * c,
        het_num: a * a + h * h,
        het_den: (k1 * k2) * (k1 * k2),
        tau4: t2 * t2,
    })
}

/// `F_homodyne / H` for the optimal quadrature.
pub fn ratio_hom_qfi(tau: f64, lambda_tilde: f64) -> Result<f64> {
    let p = pieces(tau, lambda_tilde)?;
    Ok(p.tau4 * p.g * (p.g + 2.0) / (72.0 * p.e * p.e * p.q))
}

/// `F_heterodyne / H`.
pub fn ratio_het_qfi(tau: f64, lambda_tilde: f64) -> Result<f64> {
    let p = pieces(tau, lambda_tilde)?;
    Ok(p.g * (p.g + 2.0) * p.het_num / (16.0 * p.het_den * p.q))
}

/// `F_heterodyne / F_homodyne` for the optimal quadrature.
pub fn ratio_het_hom(tau: f64, lambda_tilde: f64) -> Result<f64> {
    let p = pieces(tau, lambda_tilde)?;
    Ok(9.0 * p.het_num * p.e * p.e / (2.0 * p.tau4 * p.het_den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SqueezedThermalSpec;
    use crate::fisher::{heterodyne_crb, optimal_homodyne_crb, qcrb_closed_form};
    use approx::assert_relative_eq;

    fn composed(tau: f64, l: f64) -> (f64, f64, f64) {
        let sp = SqueezedThermalSpec::thermal(1.0).unwrap();
        let h = 1.0 / qcrb_closed_form(&sp, tau, l, 1.0).unwrap().dimensionless_bound;
        let hom = 1.0 / optimal_homodyne_crb(&sp, tau, l, 1.0).unwrap().dimensionless_bound;
        let het = 1.0 / heterodyne_crb(&sp, tau, l, 1.0).unwrap().dimensionless_bound;
        (hom / h, het / h, het / hom)
    }

    #[test]
    fn closed_forms_equal_composed_ratios() {
        for &(tau, l) in &[(0.5, 0.2), (3.0, 1e-3), (1e3, 1e-8), (1e6, 5.0), (0.01, 100.0)] {
            let (hq, heq, hh) = composed(tau, l);
            assert_relative_eq!(ratio_hom_qfi(tau, l).unwrap(), hq, max_relative = 1e-9);
            assert_relative_eq!(ratio_het_qfi(tau, l).unwrap(), heq, max_relative = 1e-9);
            assert_relative_eq!(ratio_het_hom(tau, l).unwrap(), hh, max_relative = 1e-9);
        }
    }

    #[test]
    fn classical_never_beats_quantum() {
        for tau in [1e-2, 1.0, 1e2, 1e5] {
            for l in [1e-10, 1e-4, 1.0, 1e2] {
                assert!(ratio_hom_qfi(tau, l).unwrap() <= 1.0 + 1e-12);
                assert!(ratio_het_qfi(tau, l).unwrap() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn heterodyne_gains_at_most_two_at_long_times() {
        let r = ratio_het_hom(1e6, 1e2).unwrap();
        assert!(r > 1.0 && r <= 2.0 + 1e-9, "{r}");
        assert!(ratio_het_hom(1e6, 1e-12).unwrap() < 1e-3);
    }

    #[test]
    fn degenerate_corner() {
        assert_eq!(ratio_hom_qfi(2.0, 0.0).unwrap_err(), Error::DegeneratePureState);
        assert_eq!(ratio_het_hom(0.0, 1.0).unwrap_err(), Error::Uninformative);
    }
}
