//! BiQuEst: standardized QuEst-17 features and a binary SVM.

pub mod scaler;
pub mod smo;
pub mod svm;

pub use scaler::Scaler;
pub use svm::{svm_train, Kernel, SvmFit, SvmModel, SvmParams};

use crate::error::{Error, Result};
use crate::features::FeatureVector17;
use crate::scalar::Real;

/// Converts raw feature vectors into rows of scalar `T`.
pub fn feature_rows<T: Real>(rows: &[FeatureVector17]) -> Vec<Vec<T>> {
    rows.iter().map(|r| r.0.iter().map(|&v| T::of(v)).collect()).collect()
}

/// Fits the scaler, trains the SVM on 0/1 labels and attaches the scaler.
pub fn train_biquest<T: Real>(rows: &[Vec<T>], labels: &[u8], params: &SvmParams<T>) -> Result<SvmFit<T>> {
    if rows.len() != labels.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let (scaler, x) = Scaler::fit_transform(rows)?;
    let y: Vec<T> = labels
        .iter()
        .map(|&l| if l == 1 { T::one() } else { -T::one() })
        .collect();
    let mut fit = svm_train(&x, &y, params)?;
    fit.model.scaler = Some(scaler);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicts_training_points_consistently() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64, 7.0]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let fit = train_biquest(&rows, &labels, &SvmParams::defaults(3)).unwrap();
        let scaler = fit.model.scaler.as_ref().unwrap();
        assert!(scaler.constant[2]);
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| fit.model.predict(r).unwrap().0 == l)
            .count();
        assert!(correct >= 18);
        let dup = rows[4].clone();
        assert_eq!(fit.model.predict(&dup).unwrap(), fit.model.predict(&rows[4]).unwrap());
    }

    #[test]
    fn rejects_bad_labels() {
        let rows = vec![vec![0.0f64], vec![1.0]];
        assert!(train_biquest(&rows, &[0, 2], &SvmParams::defaults(1)).is_err());
        assert!(train_biquest(&rows, &[1, 1], &SvmParams::defaults(1)).is_err());
    }
}
