use super::{Contrast, EffectEstimate, Estimand, Estimate, InfluenceVector};
use crate::error::{Error, Result};

/// `ATT(rho) = ATT + rho * delta`, with influence `psi_ATT + rho * psi_delta`.
///
/// `rho = 0` gives the ATT and `rho = 1` the AOTT.
pub fn att_rho(att: &Estimate, delta: &Estimate, rho: f64) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    if att.summary.estimand != Estimand::Effect(Contrast::Att)
        || delta.summary.estimand != Estimand::Effect(Contrast::Delta)
    {
        return Err(Error::Config(format!(
            "att_rho needs ATT and Delta estimates, got {} and {}",
            att.summary.estimand, delta.summary.estimand
        )));
    }
    if att.summary.estimator != delta.summary.estimator
        || att.influence.values.len() != delta.influence.values.len()
    {
        return Err(Error::Config(
            "ATT and Delta estimates come from different estimators or samples".into(),
        ));
    }
    let psi = att
        .influence
        .values
        .iter()
        .zip(&delta.influence.values)
        .map(|(a, d)| a + rho * d)
        .collect();
    Ok(Estimate::from_influence(
        Estimand::AttRho(rho),
        att.summary.estimator,
        att.point() + rho * delta.point(),
        psi,
        att.summary.time_index,
    ))
}

/// Average of per-period estimates of one contrast over `t = 1..T`.
///
/// The variance treats the per-period estimators as independent:
/// `var = sum_t se_t^2 / T^2`. The attached influence vector is the average of
/// the per-period vectors; it is kept for reference and is not what the
/// standard error is computed from.
pub fn time_averaged(estimates: &[Estimate]) -> Result<Estimate> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::Domain("cannot average an empty list of estimates".into()))?;
    let Estimand::Effect(contrast) = first.summary.estimand else {
        return Err(Error::Config(format!(
            "cannot time-average {}",
            first.summary.estimand
        )));
    };
    let n = first.influence.values.len();
    for e in estimates {
        if e.summary.estimand != first.summary.estimand
            || e.summary.estimator != first.summary.estimator
            || e.influence.values.len() != n
        {
            return Err(Error::Config(
                "time averaging needs one estimand and estimator over a common sample".into(),
            ));
        }
    }
    let t = estimates.len() as f64;
    let point = estimates.iter().map(Estimate::point).sum::<f64>() / t;
    let se = estimates
        .iter()
        .map(|e| e.se() * e.se())
        .sum::<f64>()
        .sqrt()
        / t;
    let mut psi = vec![0.0; n];
    for e in estimates {
        for (acc, v) in psi.iter_mut().zip(&e.influence.values) {
            *acc += v / t;
        }
    }
    let estimand = Estimand::TimeAvg(contrast);
    Ok(Estimate {
        summary: EffectEstimate::new(estimand, first.summary.estimator, point, se, n, None),
        influence: InfluenceVector {
            estimand,
            values: psi,
        },
    })
}

/// [`time_averaged`] restricted to AOTT estimates.
pub fn time_averaged_aott(estimates: &[Estimate]) -> Result<Estimate> {
    if let Some(e) = estimates
        .iter()
        .find(|e| e.summary.estimand != Estimand::Effect(Contrast::Aott))
    {
        return Err(Error::Config(format!(
            "expected AOTT estimates, found {}",
            e.summary.estimand
        )));
    }
    time_averaged(estimates)
}
