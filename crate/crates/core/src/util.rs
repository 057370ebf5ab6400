//! Small shared helpers: bit sets and deterministic arg-max tracking.

#[derive(Clone, Debug)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }
}

/// Largest value seen so far together with a key; ties keep the smaller key
/// so parallel reductions are schedule independent. NaN counts as +inf.
#[derive(Clone, Debug)]
pub(crate) struct ArgMax<K: Ord + Clone> {
    pub value: f64,
    pub key: Option<K>,
}

impl<K: Ord + Clone> ArgMax<K> {
    pub fn new() -> Self {
        ArgMax { value: f64::NEG_INFINITY, key: None }
    }

    pub fn offer(&mut self, value: f64, key: K) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        let take = match &self.key {
            None => true,
            Some(k) => value > self.value || (value == self.value && key < *k),
        };
        if take {
            self.value = value;
            self.key = Some(key);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        if let Some(k) = other.key {
            self.offer(other.value, k);
        }
        self
    }
}

/// Ratio with the conventions used for diameters: 0/0 is 1, x/0 is infinite.
#[inline]
pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Ordinary least squares slope of `ys` against `xs`.
pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        if xs[0] != 0.0 {
            ys[0] / xs[0]
        } else {
            0.0
        }
    } else {
        sxy / sxx
    }
}
