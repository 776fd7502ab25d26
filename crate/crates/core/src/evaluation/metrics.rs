use crate::error::{Error, Result};

/// Actuals with magnitude below this are left out of MAPE.
pub const MAPE_EPS: f64 = 1e-6;

fn check(predictions: &[f64], actuals: &[f64], what: &'static str) -> Result<()> {
    if predictions.len() != actuals.len() {
        return Err(Error::shape(what, actuals.len(), predictions.len()));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    check(predictions, actuals, "mse lengths")?;
    let sse: f64 = predictions.iter().zip(actuals).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(sse / predictions.len() as f64)
}

/// MAPE in percent with the number of excluded near-zero actuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    pub percent: f64,
    pub excluded: usize,
}

/// `100 · mean(|p − a| / |a|)` over actuals with `|a| ≥ 1e-6`.
pub fn mape(predictions: &[f64], actuals: &[f64]) -> Result<Mape> {
    check(predictions, actuals, "mape lengths")?;
    let (mut sum, mut used) = (0.0, 0usize);
    for (p, a) in predictions.iter().zip(actuals) {
        if a.abs() >= MAPE_EPS {
            sum += (p - a).abs() / a.abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::invalid("MAPE undefined: every actual is below 1e-6 in magnitude"));
    }
    Ok(Mape {
        percent: 100.0 * sum / used as f64,
        excluded: predictions.len() - used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn exact_predictions() {
        let a = [70.0, 80.5, 91.0];
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mape(&a, &a).unwrap(), Mape { percent: 0.0, excluded: 0 });
    }

    #[test]
    fn hand_examples() {
        assert_eq!(mse(&[3.0], &[1.0]).unwrap(), 4.0);
        assert_eq!(mape(&[3.0], &[1.0]).unwrap().percent, 200.0);
        assert_eq!(mse(&[2.0, 4.0], &[1.0, 4.0]).unwrap(), 0.5);
        assert_eq!(mape(&[2.0, 4.0], &[1.0, 4.0]).unwrap().percent, 50.0);
    }

    #[test]
    fn zero_actuals_excluded_and_counted() {
        let m = mape(&[1.0, 2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(m, Mape { percent: 100.0, excluded: 1 });
        assert!(mape(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn permutation_invariant() {
        let mut rng = Rng::new(1);
        let p = rng.uniform_vec(50);
        let a: alloc::vec::Vec<f64> = rng.uniform_vec(50).iter().map(|v| v + 1.0).collect();
        let mut idx: alloc::vec::Vec<usize> = (0..50).collect();
        rng.shuffle(&mut idx);
        let pp: alloc::vec::Vec<f64> = idx.iter().map(|&i| p[i]).collect();
        let pa: alloc::vec::Vec<f64> = idx.iter().map(|&i| a[i]).collect();
        assert!((mse(&p, &a).unwrap() - mse(&pp, &pa).unwrap()).abs() < 1e-15);
        assert!((mape(&p, &a).unwrap().percent - mape(&pp, &pa).unwrap().percent).abs() < 1e-12);
    }
}
