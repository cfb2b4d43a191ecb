//! Overlapping fixed-length chunking of a frame sequence with crossfade weights.

/// Window spans and, per window, the blend weight of each frame it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct Windows {
    /// Half-open `[start, end)` spans.
    pub spans: Vec<(usize, usize)>,
    /// `weights[w][f - start]`; across windows the weights of one frame sum to 1.
    pub weights: Vec<Vec<f64>>,
}

/// Windows of length `size` advance by `size - overlap`; the last window is
/// right-aligned to end at `frames`. Sequences shorter than `size` get one window.
/// A frame's weight in a window grows linearly with its distance from the window
/// edges, normalized over all windows covering it.
pub fn sliding_windows(frames: usize, size: usize, overlap: usize) -> Windows {
    assert!(frames >= 1, "need at least one frame");
    assert!(overlap < size, "overlap must be shorter than the window");
    let stride = size - overlap;
    let mut spans = Vec::new();
    if frames <= size {
        spans.push((0, frames));
    } else {
        let mut start = 0;
        while start + size < frames {
            spans.push((start, start + size));
            start += stride;
        }
        let tail = frames - size;
        if spans.last().map(|s| s.0) != Some(tail) {
            spans.push((tail, frames));
        }
    }
    let raw: Vec<Vec<f64>> = spans
        .iter()
        .map(|&(s, e)| (s..e).map(|f| ((f - s + 1).min(e - f)) as f64).collect())
        .collect();
    let mut totals = vec![0.0; frames];
    for (w, &(s, _)) in raw.iter().zip(&spans) {
        for (k, v) in w.iter().enumerate() {
            totals[s + k] += v;
        }
    }
    let weights = raw
        .iter()
        .zip(&spans)
        .map(|(w, &(s, _))| w.iter().enumerate().map(|(k, v)| v / totals[s + k]).collect())
        .collect();
    Windows { spans, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_fit_is_one_window() {
        let w = sliding_windows(48, 48, 4);
        assert_eq!(w.spans, vec![(0, 48)]);
        assert!(w.weights[0].iter().all(|v| *v == 1.0));
    }

    #[test]
    fn hundred_frames() {
        assert_eq!(sliding_windows(100, 48, 4).spans, vec![(0, 48), (44, 92), (52, 100)]);
    }

    #[test]
    fn overlap_crossfade_is_linear() {
        let w = sliding_windows(92, 48, 4);
        assert_eq!(w.spans, vec![(0, 48), (44, 92)]);
        let tail: Vec<f64> = w.weights[0][44..].to_vec();
        assert_eq!(tail, vec![0.8, 0.6, 0.4, 0.2]);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(frames in 1usize..400, size in 2usize..64, overlap_frac in 0.0f64..0.9) {
            let overlap = ((size as f64) * overlap_frac) as usize;
            let w = sliding_windows(frames, size, overlap.min(size - 1));
            let mut sum = vec![0.0; frames];
            for (ws, &(s, e)) in w.weights.iter().zip(&w.spans) {
                prop_assert!(e <= frames && s < e);
                for (k, v) in ws.iter().enumerate() {
                    sum[s + k] += v;
                }
            }
            for v in sum {
                prop_assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }
}
