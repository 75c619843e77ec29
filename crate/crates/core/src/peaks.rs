//! Peak picking by topographic prominence on sampled curves.

/// A local maximum (or plateau of equal maxima) of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Index of the first sample of the plateau.
    pub index: usize,
    pub height: f64,
    /// Height above the higher of the two bases reached before climbing to
    /// a strictly higher sample (or hitting the end of the data).
    pub prominence: f64,
}

/// All local maxima, endpoints included, with their prominences.
pub fn local_maxima(values: &[f64]) -> Vec<Peak> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let h = values[i];
        let left_ok = i == 0 || values[i - 1] < h;
        let right_ok = j + 1 == n || values[j + 1] < h;
        if left_ok && right_ok && !(i == 0 && j + 1 == n) {
            peaks.push(Peak {
                index: i,
                height: h,
                prominence: prominence(values, i, j),
            });
        }
        i = j + 1;
    }
    peaks
}

fn prominence(values: &[f64], first: usize, last: usize) -> f64 {
    let h = values[first];
    let left = values[..first]
        .iter()
        .rev()
        .take_while(|&&v| v <= h)
        .fold(None, |m: Option<f64>, &v| Some(m.map_or(v, |m| m.min(v))));
    let right = values[last + 1..]
        .iter()
        .take_while(|&&v| v <= h)
        .fold(None, |m: Option<f64>, &v| Some(m.map_or(v, |m| m.min(v))));
    let base = match (left, right) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => h,
    };
    h - base
}

/// Local maxima higher than `min_height` and more prominent than `min_prominence`.
pub fn prominent_peaks(values: &[f64], min_height: f64, min_prominence: f64) -> Vec<Peak> {
    local_maxima(values)
        .into_iter()
        .filter(|p| p.height > min_height && p.prominence > min_prominence)
        .collect()
}
