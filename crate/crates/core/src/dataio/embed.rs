use crate::dataio::SampleBatch;
use crate::error::{Error, Result};
use crate::layer::LayerInput;
use crate::numerics::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    /// Every row carries its true label.
    Positive,
    /// Every row carries a wrong label.
    Negative,
    /// Candidate labels used for scoring; may or may not match.
    Probe,
}

/// A batch with class labels written over the first `c` input entries.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVariant {
    pub inputs: Matrix,
    pub overlay_labels: Vec<usize>,
    pub polarity: Polarity,
    pub input_dim: usize,
    pub timesteps: usize,
}

impl LabeledVariant {
    /// Per-timestep network input: static rows are fed as a constant current.
    pub fn layer_input(&self) -> LayerInput {
        if self.timesteps == 1 {
            LayerInput::Constant(self.inputs.clone())
        } else {
            LayerInput::Steps(
                (0..self.timesteps)
                    .map(|t| self.inputs.column_block(t * self.input_dim, self.input_dim))
                    .collect(),
            )
        }
    }
}

/// Overlays `overlay[i]` on row `i`: the first `c` entries of every timestep block
/// are zeroed and the entry at the label index is set to the row's maximum over
/// all original entries. Everything at index `>= c` is copied untouched.
pub fn embed_label(
    batch: &SampleBatch,
    overlay: &[usize],
    num_classes: usize,
) -> Result<LabeledVariant> {
    if overlay.len() != batch.len() {
        return Err(Error::Argument(format!(
            "{} overlay labels for a batch of {}",
            overlay.len(),
            batch.len()
        )));
    }
    if batch.input_dim < num_classes {
        return Err(Error::Argument(format!(
            "input dim {} < class count {num_classes}",
            batch.input_dim
        )));
    }
    if let Some(&bad) = overlay.iter().find(|&&y| y >= num_classes) {
        return Err(Error::Argument(format!(
            "overlay label {bad} out of range for {num_classes} classes"
        )));
    }
    let mut inputs = batch.inputs.clone();
    let d = batch.input_dim;
    for (r, &y) in overlay.iter().enumerate() {
        let row = inputs.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for block in row.chunks_exact_mut(d) {
            block[..num_classes].iter_mut().for_each(|x| *x = 0.0);
            block[y] = m;
        }
    }
    let polarity = if overlay == batch.labels.as_slice() {
        Polarity::Positive
    } else if overlay.iter().zip(&batch.labels).all(|(o, t)| o != t) {
        Polarity::Negative
    } else {
        Polarity::Probe
    };
    Ok(LabeledVariant {
        inputs,
        overlay_labels: overlay.to_vec(),
        polarity,
        input_dim: d,
        timesteps: batch.timesteps,
    })
}

pub fn make_positive(batch: &SampleBatch, num_classes: usize) -> Result<LabeledVariant> {
    let mut v = embed_label(batch, &batch.labels, num_classes)?;
    v.polarity = Polarity::Positive;
    Ok(v)
}

/// Embeds the given wrong labels; every entry must differ from the true label.
pub fn make_negative(
    batch: &SampleBatch,
    negative_labels: &[usize],
    num_classes: usize,
) -> Result<LabeledVariant> {
    if let Some(i) = negative_labels
        .iter()
        .zip(&batch.labels)
        .position(|(n, t)| n == t)
    {
        return Err(Error::Argument(format!(
            "negative label for sample {i} equals its true label {}",
            batch.labels[i]
        )));
    }
    let mut v = embed_label(batch, negative_labels, num_classes)?;
    v.polarity = Polarity::Negative;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(rows: &[&[f64]], labels: Vec<usize>) -> SampleBatch {
        let d = rows[0].len();
        SampleBatch {
            inputs: Matrix::from_rows(rows),
            labels,
            input_dim: d,
            timesteps: 1,
        }
    }

    #[test]
    fn substitutes_row_maximum() {
        let b = batch(&[&[0.2, 0.5, 0.1, 0.9]], vec![0]);
        let v = embed_label(&b, &[1], 2).unwrap();
        assert_eq!(v.inputs.row(0), &[0.0, 0.9, 0.1, 0.9]);
        assert_eq!(v.polarity, Polarity::Negative);
    }

    #[test]
    fn zero_row_stays_zero() {
        let b = batch(&[&[0.0; 6]], vec![2]);
        for y in 0..3 {
            assert_eq!(embed_label(&b, &[y], 3).unwrap().inputs.row(0), &[0.0; 6]);
        }
    }

    #[test]
    fn positive_uses_true_labels() {
        let b = batch(
            &[&[0.1, 0.2, 0.3, 0.4, 0.5], &[0.5, 0.4, 0.3, 0.2, 0.1]],
            vec![3, 1],
        );
        let v = make_positive(&b, 4).unwrap();
        assert_eq!(v.overlay_labels, vec![3, 1]);
        assert_eq!(v.polarity, Polarity::Positive);
        assert_eq!(v, {
            let mut e = embed_label(&b, &[3, 1], 4).unwrap();
            e.polarity = Polarity::Positive;
            e
        });
        for r in 0..2 {
            let lit: Vec<usize> = (0..4).filter(|&i| v.inputs.get(r, i) != 0.0).collect();
            assert_eq!(lit, vec![v.overlay_labels[r]]);
        }
    }

    #[test]
    fn errors() {
        let b = batch(&[&[0.1, 0.2, 0.3]], vec![0]);
        assert!(embed_label(&b, &[3], 3).is_err());
        assert!(embed_label(&b, &[0], 4).is_err());
        assert!(make_negative(&b, &[0], 2).is_err());
        assert!(make_negative(&b, &[1], 2).is_ok());
    }

    #[test]
    fn temporal_overlay_every_timestep() {
        // d = 3, T = 2, c = 2; max over the whole sample is 4
        let b = SampleBatch {
            inputs: Matrix::from_rows(&[[1.0, 0.0, 2.0, 0.0, 4.0, 3.0]]),
            labels: vec![0],
            input_dim: 3,
            timesteps: 2,
        };
        let v = make_positive(&b, 2).unwrap();
        assert_eq!(v.inputs.row(0), &[4.0, 0.0, 2.0, 4.0, 0.0, 3.0]);
        match v.layer_input() {
            LayerInput::Steps(s) => {
                assert_eq!(s.len(), 2);
                assert_eq!(s[1].row(0), &[4.0, 0.0, 3.0]);
            }
            LayerInput::Constant(_) => panic!("temporal input must be per-step"),
        }
    }

    proptest! {
        #[test]
        fn tail_preserved_and_label_recoverable(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 12), 1..6),
            seed in 0usize..1000,
        ) {
            let c = 5;
            let labels: Vec<usize> = (0..rows.len()).map(|i| (seed + 3 * i) % c).collect();
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            let b = batch(&refs, labels.clone());
            let v = make_positive(&b, c).unwrap();
            for r in 0..rows.len() {
                let out = v.inputs.row(r);
                for i in c..12 {
                    prop_assert_eq!(out[i].to_bits(), rows[r][i].to_bits());
                }
                let m = rows[r].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if m > 0.0 {
                    let arg = (0..c).max_by(|&a, &b| out[a].partial_cmp(&out[b]).unwrap()).unwrap();
                    prop_assert_eq!(arg, labels[r]);
                    prop_assert_eq!(out[labels[r]], m);
                }
            }
        }
    }
}
