//! Average precision with 101-point interpolation over the recall grid
//! {0.00, 0.01, ..., 1.00}.

use super::EvalError;

/// One entry of a ranked detection list for a single class. The ranking
/// must follow the total order (confidence desc, image_id asc, x_min asc)
/// so that AP is reproducible run to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDetection {
    pub confidence: f64,
    pub image_id: String,
    pub x_min: f64,
    pub is_tp: bool,
}

/// Average precision for one class at one IoU threshold.
///
/// Builds the cumulative precision/recall points, replaces every precision
/// with the maximum precision at equal-or-higher recall (the monotone
/// envelope), samples the envelope at 101 evenly spaced recall values, and
/// averages the samples.
///
/// Returns `Ok(None)` when AP is undefined (no ground truths and no
/// detections); a class with no ground truths but spurious detections gets
/// `Some(0.0)`.
pub fn average_precision(
    ranked: &[RankedDetection],
    n_gt: usize,
) -> Result<Option<f64>, EvalError> {
    for (i, w) in ranked.windows(2).enumerate() {
        let ord = w[1]
            .confidence
            .partial_cmp(&w[0].confidence)
            .ok_or(EvalError::UnsortedInput(i + 1))?;
        let in_order = match ord {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                (w[0].image_id.as_str(), w[0].x_min) <= (w[1].image_id.as_str(), w[1].x_min)
            }
        };
        if !in_order {
            return Err(EvalError::UnsortedInput(i + 1));
        }
    }
    if n_gt == 0 {
        return Ok(if ranked.is_empty() { None } else { Some(0.0) });
    }
    if ranked.is_empty() {
        return Ok(Some(0.0));
    }

    // cumulative (recall, precision) points
    let mut points = Vec::with_capacity(ranked.len());
    let (mut tp, mut fp) = (0u64, 0u64);
    for r in ranked {
        if r.is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }

    let samples = sample_envelope_101(&points);
    Ok(Some(samples.iter().sum::<f64>() / 101.0))
}

/// Sample the monotone precision envelope of cumulative (recall, precision)
/// points at the 101 recall values {0.00, 0.01, ..., 1.00}. The envelope is
/// 0 beyond the maximum achieved recall.
pub(crate) fn sample_envelope_101(points: &[(f64, f64)]) -> Vec<f64> {
    // envelope[i] = max precision over points[i..]
    let mut envelope = vec![0.0f64; points.len()];
    let mut running = 0.0f64;
    for i in (0..points.len()).rev() {
        running = running.max(points[i].1);
        envelope[i] = running;
    }
    (0..=100u32)
        .map(|i| {
            let r = i as f64 / 100.0;
            let pos = points.partition_point(|p| p.0 < r);
            if pos < points.len() {
                envelope[pos]
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked(flags: &[bool]) -> Vec<RankedDetection> {
        flags
            .iter()
            .enumerate()
            .map(|(i, &is_tp)| RankedDetection {
                confidence: 1.0 - i as f64 * 0.01,
                image_id: "img".into(),
                x_min: 0.0,
                is_tp,
            })
            .collect()
    }

    #[test]
    fn perfect_detector_has_ap_one() {
        let ap = average_precision(&ranked(&[true]), 1).unwrap().unwrap();
        assert!((ap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tp_fp_tp_over_two_gts() {
        // exact envelope area = 0.5 * 1 + 0.5 * (2/3) = 0.83333; the
        // 101-point interpolation must stay within 0.01 of it
        let exact = 0.5 + 0.5 * (2.0 / 3.0);
        let ap = average_precision(&ranked(&[true, false, true]), 2).unwrap().unwrap();
        assert!((ap - exact).abs() <= 0.01, "ap={ap} exact={exact}");
    }

    #[test]
    fn all_false_positives_is_zero() {
        let ap = average_precision(&ranked(&[false, false, false]), 2).unwrap().unwrap();
        assert_eq!(ap, 0.0);
    }

    #[test]
    fn undefined_without_gts_or_detections() {
        assert_eq!(average_precision(&[], 0).unwrap(), None);
        assert_eq!(average_precision(&ranked(&[false]), 0).unwrap(), Some(0.0));
        assert_eq!(average_precision(&[], 3).unwrap(), Some(0.0));
    }

    #[test]
    fn unsorted_input_is_rejected() {
        let mut entries = ranked(&[true, true]);
        entries[0].confidence = 0.1; // now ascending
        assert!(matches!(
            average_precision(&entries, 2),
            Err(EvalError::UnsortedInput(1))
        ));
    }

    #[test]
    fn tie_break_order_is_enforced() {
        let entries = vec![
            RankedDetection { confidence: 0.5, image_id: "b".into(), x_min: 0.0, is_tp: true },
            RankedDetection { confidence: 0.5, image_id: "a".into(), x_min: 0.0, is_tp: true },
        ];
        assert!(average_precision(&entries, 2).is_err());
    }

    #[test]
    fn rescaling_confidences_preserves_ap() {
        let base = ranked(&[true, false, true, true, false]);
        let scaled: Vec<RankedDetection> = base
            .iter()
            .map(|r| RankedDetection { confidence: r.confidence * 0.5, ..r.clone() })
            .collect();
        let a = average_precision(&base, 3).unwrap();
        let b = average_precision(&scaled, 3).unwrap();
        assert_eq!(a, b);
    }
}
