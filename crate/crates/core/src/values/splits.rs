//! Assignments of living experts to labels, up to symmetry.

/// How many experts of each budget level predict each label.
///
/// `parts[y * levels + i]` experts with budget `i` predict label `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Split {
    pub k: usize,
    pub levels: usize,
    pub parts: Vec<u32>,
}

impl Split {
    pub fn part(&self, y: usize) -> &[u32] {
        &self.parts[y * self.levels..(y + 1) * self.levels]
    }

    /// Number of labels predicted by at least one expert.
    pub fn used_labels(&self) -> usize {
        (0..self.k)
            .filter(|&y| self.part(y).iter().any(|&c| c > 0))
            .count()
    }
}

/// Count vectors after positive and after negative feedback on `yhat`.
///
/// Positive feedback keeps the predictors of `yhat` and moves everybody else
/// one level down; negative feedback moves the predictors of `yhat` down.
/// Experts falling below level 0 die.
pub fn split_children(split: &Split, yhat: usize) -> (Vec<u32>, Vec<u32>) {
    let l = split.levels;
    let mut pos = vec![0u32; l];
    let mut neg = vec![0u32; l];
    for y in 0..split.k {
        let part = split.part(y);
        for i in 0..l {
            let c = part[i];
            if c == 0 {
                continue;
            }
            if y == yhat {
                pos[i] += c;
                if i > 0 {
                    neg[i - 1] += c;
                }
            } else {
                neg[i] += c;
                if i > 0 {
                    pos[i - 1] += c;
                }
            }
        }
    }
    (pos, neg)
}

/// All ways to split the experts of `m` among `k` labels, listing each
/// multiset of per-label count vectors once (labels are sorted in
/// non-increasing lexicographic order of their vectors).
pub fn canonical_splits(m: &[u32], k: usize) -> Vec<Split> {
    let levels = m.len();
    let mut out = Vec::new();
    let mut parts: Vec<u32> = Vec::with_capacity(k * levels);
    rec(m, k, levels, &mut parts, &mut out);
    out
}

fn rec(rem: &[u32], k: usize, levels: usize, parts: &mut Vec<u32>, out: &mut Vec<Split>) {
    let placed = parts.len() / levels;
    if placed + 1 == k {
        // The last label takes what is left.
        if placed == 0 || rem <= &parts[(placed - 1) * levels..placed * levels] {
            let mut p = parts.clone();
            p.extend_from_slice(rem);
            out.push(Split {
                k,
                levels,
                parts: p,
            });
        }
        return;
    }
    let prev: Option<Vec<u32>> = if placed == 0 {
        None
    } else {
        Some(parts[(placed - 1) * levels..placed * levels].to_vec())
    };
    let mut v = vec![0u32; levels];
    loop {
        if prev.as_deref().is_none_or(|p| v.as_slice() <= p) {
            let rest: Vec<u32> = rem.iter().zip(&v).map(|(a, b)| a - b).collect();
            parts.extend_from_slice(&v);
            rec(&rest, k, levels, parts, out);
            parts.truncate(placed * levels);
        }
        // Odometer over 0..=rem[i], last coordinate fastest.
        let mut i = levels;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if v[i] < rem[i] {
                v[i] += 1;
                for w in v.iter_mut().skip(i + 1) {
                    *w = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_experts_two_labels() {
        let s = canonical_splits(&[2], 2);
        let parts: Vec<_> = s.iter().map(|s| s.parts.clone()).collect();
        assert_eq!(parts, vec![vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn splits_cover_every_expert() {
        let m = [1, 2, 1];
        for s in canonical_splits(&m, 3) {
            for (i, &count) in m.iter().enumerate() {
                let total: u32 = (0..3).map(|y| s.part(y)[i]).sum();
                assert_eq!(total, count);
            }
        }
    }

    #[test]
    fn split_count_matches_brute_force() {
        use std::collections::HashSet;
        // Brute force: label every expert, canonicalize by sorting parts.
        let m = [2u32, 1];
        let k: usize = 3;
        let experts: Vec<usize> = vec![0, 0, 1];
        let mut seen = HashSet::new();
        for code in 0..k.pow(experts.len() as u32) {
            let mut parts = vec![vec![0u32; 2]; k];
            let mut c = code;
            for &lvl in &experts {
                parts[c % k][lvl] += 1;
                c /= k;
            }
            parts.sort();
            parts.reverse();
            seen.insert(parts);
        }
        assert_eq!(canonical_splits(&m, k).len(), seen.len());
    }

    #[test]
    fn children_of_budgeted_split() {
        // Label 0 gets one expert at level 1, label 1 one at level 0.
        let s = Split {
            k: 2,
            levels: 2,
            parts: vec![0, 1, 1, 0],
        };
        let (pos, neg) = split_children(&s, 0);
        assert_eq!(pos, vec![0, 1]);
        assert_eq!(neg, vec![2, 0]);
        let (pos, neg) = split_children(&s, 1);
        assert_eq!(pos, vec![2, 0]);
        assert_eq!(neg, vec![0, 1]);
    }
}
