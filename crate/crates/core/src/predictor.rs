//! Label scoring and accuracy evaluation.

use crate::dataio::{Dataset, SampleBatch};
use crate::error::{Error, Result};
use crate::network::FFNetwork;
use crate::trainer::label_goodness;

/// Samples scored per chunk in [`evaluate`]; bounds memory on large test sets.
pub const EVAL_CHUNK: usize = 256;

/// Summed goodness for every candidate label of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelScore {
    pub scores: Vec<f64>,
    pub predicted: usize,
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Scores every label overlay of every sample with eval-mode statistics.
pub fn score_labels(net: &FFNetwork, batch: &SampleBatch) -> Result<Vec<LabelScore>> {
    if !net.stats_populated() {
        return Err(Error::Usage(
            "network has no running normalization statistics; train it or load a trained checkpoint first".into(),
        ));
    }
    if batch.input_dim != net.input_dim {
        return Err(Error::Argument(format!(
            "samples have {} features, network expects {}",
            batch.input_dim, net.input_dim
        )));
    }
    Ok(label_goodness(net, batch)?
        .into_iter()
        .map(|scores| LabelScore {
            predicted: argmax(&scores),
            scores,
        })
        .collect())
}

/// Predicted labels for a whole dataset, computed in chunks.
pub fn predict(net: &FFNetwork, dataset: &Dataset) -> Result<Vec<LabelScore>> {
    let mut out = Vec::with_capacity(dataset.len());
    let idx: Vec<usize> = (0..dataset.len()).collect();
    for chunk in idx.chunks(EVAL_CHUNK) {
        out.extend(score_labels(net, &dataset.batch(chunk))?);
    }
    Ok(out)
}

/// Fraction of samples whose predicted label equals the true label.
pub fn evaluate(net: &FFNetwork, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Usage("cannot evaluate on an empty dataset".into()));
    }
    let hits = predict(net, dataset)?
        .iter()
        .zip(&dataset.labels)
        .filter(|(s, &y)| s.predicted == y)
        .count();
    Ok(hits as f64 / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::synthetic::gaussian_blobs;
    use crate::layer::{LayerInput, Mode};
    use crate::neuron::NeuronConfig;
    use crate::numerics::RngStream;

    #[test]
    fn argmax_ties_pick_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn untrained_network_is_rejected() {
        let mut rng = RngStream::new(1);
        let ds = gaussian_blobs(4, &mut rng);
        let net = FFNetwork::new(12, &[4], 2, 2, NeuronConfig::default(), false, &mut rng).unwrap();
        assert!(matches!(
            score_labels(&net, &ds.as_batch()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn one_pass_per_label_variant() {
        let mut rng = RngStream::new(2);
        let ds = gaussian_blobs(300, &mut rng);
        let mut net =
            FFNetwork::new(12, &[4, 4], 2, 2, NeuronConfig::default(), false, &mut rng).unwrap();
        net.forward_train(&LayerInput::Constant(ds.inputs.clone()))
            .unwrap();
        net.eval_passes.reset();
        let preds = predict(&net, &ds).unwrap();
        assert_eq!(preds.len(), 300);
        assert_eq!(net.eval_passes.get(), 600);
        let _ = Mode::Eval;
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let mut rng = RngStream::new(3);
        let ds = gaussian_blobs(4, &mut rng).take(0);
        let net = FFNetwork::new(12, &[4], 2, 2, NeuronConfig::default(), false, &mut rng).unwrap();
        assert!(evaluate(&net, &ds).is_err());
    }
}
