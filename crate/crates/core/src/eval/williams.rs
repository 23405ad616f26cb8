use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilliamsOutcome {
    pub t_statistic: f64,
    /// One-sided, for `r12 > r13`.
    pub p_value: f64,
    pub df: f64,
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").sf(t)
}

/// Williams' test for two dependent correlations sharing variable 1.
///
/// `r12` and `r13` are the correlations of metrics A and B with the human
/// scores; `r23` is the correlation between A and B.
pub fn williams_test(r12: f64, r13: f64, r23: f64, n: usize) -> Result<WilliamsOutcome> {
    if n < 4 {
        return Err(Error::DomainError(format!("need n >= 4, got {n}")));
    }
    let df = (n - 3) as f64;
    let unit = |r: f64| r.is_finite() && (-1.0..=1.0).contains(&r);
    if !(unit(r12) && unit(r13) && unit(r23)) {
        return Err(Error::DomainError(format!(
            "correlations must lie in [-1, 1]: r12={r12}, r13={r13}, r23={r23}"
        )));
    }
    // Identical correlations carry no evidence either way, even when A and B
    // coincide (r23 = 1) and the statistic would be 0/0.
    if r12 == r13 {
        return Ok(WilliamsOutcome {
            t_statistic: 0.0,
            p_value: 0.5,
            df,
        });
    }
    let inside = |r: f64| r > -1.0 && r < 1.0;
    if !(inside(r12) && inside(r13) && inside(r23)) {
        return Err(Error::DomainError(format!(
            "correlations must lie strictly inside (-1, 1): r12={r12}, r13={r13}, r23={r23}"
        )));
    }
    let nf = n as f64;
    let k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if k < 0.0 {
        return Err(Error::DomainError(format!(
            "correlations do not form a valid correlation matrix (determinant {k})"
        )));
    }
    let r_bar = 0.5 * (r12 + r13);
    let denom = 2.0 * k * (nf - 1.0) / (nf - 3.0) + r_bar * r_bar * (1.0 - r23).powi(3);
    if denom <= 0.0 {
        return Err(Error::DomainError("degenerate variance term".into()));
    }
    let t = (r12 - r13) * ((nf - 1.0) * (1.0 + r23)).sqrt() / denom.sqrt();
    Ok(WilliamsOutcome {
        t_statistic: t,
        p_value: student_t_sf(t, df),
        df,
    })
}
