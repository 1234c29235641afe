use crate::ModelError;

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// `-sum_i p_i ln p_i`, taking `0 ln 0 = 0`.
pub fn entropy_loss(policy: &[f64]) -> Result<f64, ModelError> {
    if policy.is_empty() || policy.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(ModelError::NotDistribution);
    }
    if (policy.iter().sum::<f64>() - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(ModelError::NotDistribution);
    }
    Ok(-policy.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>())
}

/// Root mean square of the advantages.
pub fn baseline_loss(advantages: &[f64]) -> Result<f64, ModelError> {
    if advantages.is_empty() {
        return Err(ModelError::ShapeMismatch("no advantages".into()));
    }
    let mean_sq = advantages.iter().map(|a| a * a).sum::<f64>() / advantages.len() as f64;
    Ok(mean_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        let uniform = [0.25; 4];
        assert!((entropy_loss(&uniform).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert_eq!(entropy_loss(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy_loss(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_non_distributions() {
        assert!(entropy_loss(&[0.5, 0.6]).is_err());
        assert!(entropy_loss(&[-0.1, 1.1]).is_err());
        assert!(entropy_loss(&[]).is_err());
    }

    #[test]
    fn baseline_values() {
        assert_eq!(baseline_loss(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((baseline_loss(&[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(baseline_loss(&[-2.5]).unwrap(), 2.5);
        assert!(baseline_loss(&[]).is_err());
    }
}
