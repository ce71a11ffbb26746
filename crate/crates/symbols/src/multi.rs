use serde::{Deserialize, Serialize};

/// Multi-index in `N_0^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, assuming `other <= self`.
    pub fn minus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `alpha! / (alpha - beta)!`
    pub fn falling(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| ((a - b + 1)..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `xi^alpha`
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&k, &x)| x.powi(k as i32)).product()
    }

    /// Every multi-index of dimension `n` and order at most `m`, by order then lexicographically.
    pub fn up_to(n: usize, m: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for k in 0..=m {
            let mut cur = vec![0; n];
            fill(&mut out, &mut cur, 0, k);
        }
        out
    }

    /// Every multi-index `sigma <= self`.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::new())];
        for &k in &self.0 {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..=k).map(move |j| {
                        let mut v = m.0.clone();
                        v.push(j);
                        MultiIndex(v)
                    })
                })
                .collect();
        }
        out
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration() {
        let all = MultiIndex::up_to(2, 2);
        let want: Vec<Vec<u32>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(all.iter().map(|m| m.0.clone()).collect::<Vec<_>>(), want);
        assert_eq!(MultiIndex(vec![2, 1]).factorial(), 2.0);
        assert_eq!(MultiIndex(vec![3]).falling(&MultiIndex(vec![2])), 6.0);
        assert_eq!(MultiIndex(vec![1, 2]).below().len(), 6);
    }
}
