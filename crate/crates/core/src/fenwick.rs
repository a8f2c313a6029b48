//! Prefix-sum tree over integer weights.

use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl Fenwick {
    pub fn from_weights(w: &[u64]) -> Self {
        let n = w.len();
        let mut tree = alloc::vec![0u64; n + 1];
        for (i, &x) in w.iter().enumerate() {
            tree[i + 1] += x;
            let j = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if j <= n {
                let v = tree[i + 1];
                tree[j] += v;
            }
        }
        Self { tree, weights: w.to_vec(), total: w.iter().sum() }
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn set(&mut self, i: usize, w: u64) {
        let old = self.weights[i];
        if old == w {
            return;
        }
        self.weights[i] = w;
        self.total = self.total - old + w;
        let n = self.weights.len();
        let mut k = i + 1;
        if w > old {
            let d = w - old;
            while k <= n {
                self.tree[k] += d;
                k += k & k.wrapping_neg();
            }
        } else {
            let d = old - w;
            while k <= n {
                self.tree[k] -= d;
                k += k & k.wrapping_neg();
            }
        }
    }

    /// Smallest index `i` with `Σ_{k≤i} w_k > target`. Requires
    /// `target < total`.
    pub fn find(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let n = self.weights.len();
        let mut pos = 0usize;
        let mut step = if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_matches_linear_scan() {
        let w = [3u64, 0, 5, 1, 0, 0, 7, 2, 0, 4];
        let mut f = Fenwick::from_weights(&w);
        let check = |f: &Fenwick, w: &[u64]| {
            let total: u64 = w.iter().sum();
            assert_eq!(f.total(), total);
            for t in 0..total {
                let mut acc = 0;
                let mut idx = 0;
                for (i, &x) in w.iter().enumerate() {
                    acc += x;
                    if acc > t {
                        idx = i;
                        break;
                    }
                }
                assert_eq!(f.find(t), idx);
            }
        };
        check(&f, &w);
        let mut w2 = w;
        w2[1] = 9;
        w2[6] = 0;
        f.set(1, 9);
        f.set(6, 0);
        check(&f, &w2);
        assert_eq!(Fenwick::from_weights(&[0; 3]).total(), 0);
    }
}
