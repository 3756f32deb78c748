//! Strictly increasing multi-indices: ranking, unranking and merge signs.
//!
//! Multi-indices are zero-based, strictly increasing subsets of
//! `{0, ..., n-1}`, enumerated in lexicographic order. All antisymmetry
//! bookkeeping reduces to the parity of the shuffle that sorts a
//! concatenation of two disjoint sorted lists.

/// Binomial coefficient, zero when `k > n`. Sizes stay far below overflow
/// (the largest in use is C(6,3)).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographic rank of a strictly increasing multi-index in `{0..n-1}`.
pub fn subset_rank(n: usize, combo: &[u8]) -> usize {
    let k = combo.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (pos, &c) in combo.iter().enumerate() {
        for skipped in (prev + 1) as usize..usize::from(c) {
            rank += binomial(n - 1 - skipped, k - 1 - pos);
        }
        prev = isize::try_from(usize::from(c)).expect("index fits isize");
    }
    rank
}

/// Inverse of [`subset_rank`]: the `rank`-th strictly increasing `k`-subset
/// of `{0..n-1}` in lexicographic order.
pub fn subset_unrank(n: usize, k: usize, mut rank: usize) -> Vec<u8> {
    let mut combo = Vec::with_capacity(k);
    let mut next = 0usize;
    for pos in 0..k {
        let mut c = next;
        loop {
            let tail = binomial(n - 1 - c, k - 1 - pos);
            if rank < tail {
                break;
            }
            rank -= tail;
            c += 1;
        }
        combo.push(u8::try_from(c).expect("index fits u8"));
        next = c + 1;
    }
    combo
}

/// Sign of the shuffle that sorts the concatenation `[a, b]` of two strictly
/// increasing lists, or `0` if they share an element (the wedge term dies).
pub fn merge_sign(a: &[u8], b: &[u8]) -> i8 {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return 0;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sorted union of two disjoint strictly increasing lists.
pub fn merged(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sorts an arbitrary index list, returning the sorted list and the sign of
/// the sorting permutation, or `None` if an index repeats.
pub fn sort_signed(indices: &[u8]) -> Option<(Vec<u8>, i8)> {
    let mut sorted: Vec<u8> = indices.to_vec();
    let mut inversions = 0usize;
    // Insertion sort with inversion count; lists have at most six entries.
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            inversions += 1;
            j -= 1;
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Some((sorted, sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_lexicographic_and_invertible() {
        for n in 0..=6 {
            for k in 0..=n {
                let count = binomial(n, k);
                let mut seen = Vec::new();
                for rank in 0..count {
                    let combo = subset_unrank(n, k, rank);
                    assert_eq!(combo.len(), k);
                    assert!(combo.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(subset_rank(n, &combo), rank);
                    seen.push(combo);
                }
                for pair in seen.windows(2) {
                    assert!(pair[0] < pair[1], "not lexicographic: {pair:?}");
                }
            }
        }
    }

    #[test]
    fn merge_sign_counts_crossings() {
        assert_eq!(merge_sign(&[0], &[1]), 1);
        assert_eq!(merge_sign(&[1], &[0]), -1);
        assert_eq!(merge_sign(&[0, 3], &[1, 2]), 1); // 3 crosses both of 1,2
        assert_eq!(merge_sign(&[2], &[0, 1]), 1);
        assert_eq!(merge_sign(&[1, 2], &[1]), 0);
    }

    #[test]
    fn merge_sign_is_transposition_parity() {
        // Swapping the arguments flips the sign by |a||b|.
        let a = [0u8, 2, 5];
        let b = [1u8, 3];
        let forward = merge_sign(&a, &b);
        let backward = merge_sign(&b, &a);
        assert_eq!(forward * backward, if (a.len() * b.len()) % 2 == 0 { 1 } else { -1 });
    }

    #[test]
    fn sort_signed_matches_merge_sign() {
        let (sorted, sign) = sort_signed(&[3, 0, 2]).unwrap();
        assert_eq!(sorted, vec![0, 2, 3]);
        assert_eq!(sign, 1); // 302 -> 032 -> 023: two swaps
        assert!(sort_signed(&[1, 1]).is_none());
    }
}
