use crate::error::{Error, Result};

/// Largest ground-set size accepted by the enumerators. Catalan(12) = 208012
/// partitions; everything the acceptance suite needs stays at n <= 10.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// A partition of `{1..n}` into disjoint nonempty blocks.
///
/// Canonical form: every block is sorted ascending and blocks are ordered by
/// their minimum element, so `==` is structural equality of partitions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl std::fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let xs: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", xs.join(","))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl SetPartition {
    /// Builds a partition from blocks, validating that they are disjoint,
    /// nonempty and cover `{1..n}` exactly; canonicalizes the ordering.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ground set must be nonempty".into()));
        }
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &x in b {
                if x == 0 || x > n {
                    return Err(Error::Domain(format!("element {x} outside 1..={n}")));
                }
                if seen[x] {
                    return Err(Error::Domain(format!("element {x} appears twice")));
                }
                seen[x] = true;
                count += 1;
            }
        }
        if count != n {
            return Err(Error::Domain(format!(
                "blocks cover {count} of {n} elements"
            )));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { n, blocks })
    }

    /// The partition `{{1},...,{n}}`.
    pub fn singletons(n: usize) -> Self {
        SetPartition {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    /// The one-block partition `{{1..n}}`.
    pub fn full(n: usize) -> Self {
        SetPartition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing each element (1-based elements).
    pub fn membership(&self) -> Vec<usize> {
        let mut memb = vec![0usize; self.n + 1];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &x in b {
                memb[x] = bi;
            }
        }
        memb
    }

    /// True when no quadruple a < b < c < d has {a,c} and {b,d} split across
    /// two distinct blocks. Pairwise region test, O(n^2).
    pub fn is_noncrossing(&self) -> bool {
        // For blocks B != C: C crosses B iff C has elements in two different
        // "regions" cut out by B (the gaps between consecutive B-elements and
        // the outside of [min B, max B]).
        for (bi, b) in self.blocks.iter().enumerate() {
            if b.len() < 2 {
                continue;
            }
            for (ci, c) in self.blocks.iter().enumerate() {
                if bi == ci {
                    continue;
                }
                // region of x relative to b: number of b-elements < x
                let region_of = |x: usize| b.partition_point(|&e| e < x);
                let r0 = region_of(c[0]);
                let outside = r0 == 0 || r0 == b.len();
                for &x in &c[1..] {
                    let r = region_of(x);
                    if outside {
                        if !(r == 0 || r == b.len()) {
                            return false;
                        }
                    } else if r != r0 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A perfect matching of `{1..2k}`: a set partition all of whose blocks have
/// exactly two elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PairPartition(SetPartition);

impl PairPartition {
    pub fn new(p: SetPartition) -> Result<Self> {
        if p.n() % 2 != 0 {
            return Err(Error::Domain(
                "pair partition needs an even ground set".into(),
            ));
        }
        if p.blocks().iter().any(|b| b.len() != 2) {
            return Err(Error::Domain(
                "pair partition blocks must have size 2".into(),
            ));
        }
        Ok(PairPartition(p))
    }

    pub fn as_partition(&self) -> &SetPartition {
        &self.0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.blocks().iter().map(|b| (b[0], b[1]))
    }
}

/// All non-crossing partitions of `{1..n}` in lexicographic order of their
/// restricted-growth strings. The count is the n-th Catalan number.
pub fn enumerate_noncrossing(n: usize) -> Result<Vec<SetPartition>> {
    if n == 0 || n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity(format!(
            "ground-set size {n} outside 1..={DEFAULT_ENUMERATION_CAP}"
        )));
    }
    let mut out = Vec::new();
    let mut st = EnumState::new(n);
    st.run(1, false, &mut |blocks| {
        out.push(SetPartition {
            n,
            blocks: blocks.to_vec(),
        })
    });
    Ok(out)
}

/// All non-crossing pairings of `{1..m}` (m even), RGS-lexicographic order;
/// the count is Catalan(m/2).
pub fn enumerate_noncrossing_pairings(m: usize) -> Result<Vec<PairPartition>> {
    if m % 2 != 0 {
        return Err(Error::Domain(format!(
            "non-crossing pairings need an even ground set, got {m}"
        )));
    }
    if m == 0 || m > 2 * DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity(format!(
            "ground-set size {m} outside 2..={}",
            2 * DEFAULT_ENUMERATION_CAP
        )));
    }
    let mut out = Vec::new();
    let mut st = EnumState::new(m);
    st.run(1, true, &mut |blocks| {
        out.push(PairPartition(SetPartition {
            n: m,
            blocks: blocks.to_vec(),
        }))
    });
    Ok(out)
}

/// Depth-first generator over non-crossing partitions.
///
/// Scanning 1..n, each element either joins an open block (which permanently
/// seals every block opened after it) or opens a new one. The stack of open
/// blocks carries increasing block letters bottom-to-top, so visiting joins
/// bottom-up and then opening a new block emits partitions in RGS-lex order.
struct EnumState {
    n: usize,
    blocks: Vec<Vec<usize>>,
    stack: Vec<usize>,
}

impl EnumState {
    fn new(n: usize) -> Self {
        EnumState {
            n,
            blocks: Vec::new(),
            stack: Vec::new(),
        }
    }

    fn run(&mut self, i: usize, pairs_only: bool, emit: &mut impl FnMut(&[Vec<usize>])) {
        if i > self.n {
            if !pairs_only || self.stack.is_empty() {
                emit(&self.blocks);
            }
            return;
        }
        let depth = self.stack.len();
        for d in 0..depth {
            // Joining stack[d] seals everything above it; for pairings the
            // sealed blocks would be stuck at size 1, so only the top works.
            if pairs_only && d + 1 != depth {
                continue;
            }
            let bi = self.stack[d];
            let tail: Vec<usize> = self.stack[d..].to_vec();
            self.blocks[bi].push(i);
            // A pairing block is complete at size 2 and leaves the stack.
            let keep = if pairs_only { d } else { d + 1 };
            self.stack.truncate(keep);
            self.run(i + 1, pairs_only, emit);
            self.stack.truncate(d);
            self.stack.extend_from_slice(&tail);
            self.blocks[bi].pop();
        }
        self.blocks.push(vec![i]);
        self.stack.push(self.blocks.len() - 1);
        self.run(i + 1, pairs_only, emit);
        self.stack.pop();
        self.blocks.pop();
    }
}

/// Kreweras complement of a non-crossing partition.
///
/// Interleave `1,1',2,2',...,n,n'` on a circle; `K(pi)` is the coarsest
/// partition of the primes whose union with `pi` stays non-crossing. Two
/// primes join exactly when the chord between them splits no block of `pi`.
/// Satisfies `|pi| + |K(pi)| = n + 1`, and `K(K(pi))` is `pi` rotated down by
/// one position.
pub fn kreweras_complement(pi: &SetPartition) -> Result<SetPartition> {
    if !pi.is_noncrossing() {
        return Err(Error::Domain(format!(
            "kreweras complement needs a non-crossing partition, got {pi:?}"
        )));
    }
    let n = pi.n();
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Chord between primes i and j (i < j): the inside arc holds originals
    // i+1..=j. The chord is admissible iff no block has elements on both
    // sides.
    for i in 1..=n {
        'chord: for j in (i + 1)..=n {
            for b in pi.blocks() {
                let mut inside = false;
                let mut outside = false;
                for &x in b {
                    if x > i && x <= j {
                        inside = true;
                    } else {
                        outside = true;
                    }
                    if inside && outside {
                        continue 'chord;
                    }
                }
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 1..=n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    SetPartition::new(n, groups.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::catalan;

    /// Independent crossing check: brute force over quadruples.
    fn crossing_brute(p: &SetPartition) -> bool {
        let memb = p.membership();
        let n = p.n();
        for a in 1..=n {
            for b in (a + 1)..=n {
                for c in (b + 1)..=n {
                    for d in (c + 1)..=n {
                        if memb[a] == memb[c] && memb[b] == memb[d] && memb[a] != memb[b] {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn enumeration_counts_match_catalan() {
        for n in 1..=8 {
            let ps = enumerate_noncrossing(n).unwrap();
            assert_eq!(ps.len() as u128, catalan(n as u64), "n={n}");
        }
        assert_eq!(enumerate_noncrossing(1).unwrap().len(), 1);
        assert_eq!(enumerate_noncrossing(3).unwrap().len(), 5);
        assert_eq!(enumerate_noncrossing(4).unwrap().len(), 14);
    }

    #[test]
    fn enumeration_is_noncrossing_and_unique() {
        for n in 1..=7 {
            let ps = enumerate_noncrossing(n).unwrap();
            let mut seen = std::collections::HashSet::new();
            for p in &ps {
                assert!(!crossing_brute(p), "{p:?} crosses");
                assert!(p.is_noncrossing(), "{p:?} fails fast checker");
                assert!(seen.insert(format!("{p:?}")), "{p:?} repeated");
            }
        }
    }

    #[test]
    fn fast_crossing_checker_agrees_with_brute_force() {
        // All partitions of {1..n} via restricted growth strings.
        fn all_partitions(n: usize) -> Vec<SetPartition> {
            let mut out = Vec::new();
            fn rec(i: usize, maxv: usize, rgs: &mut Vec<usize>, out: &mut Vec<SetPartition>) {
                let n = rgs.len();
                if i == n {
                    let mut blocks = vec![Vec::new(); maxv + 1];
                    for (k, &v) in rgs.iter().enumerate() {
                        blocks[v].push(k + 1);
                    }
                    out.push(SetPartition::new(n, blocks).unwrap());
                    return;
                }
                for v in 0..=maxv + 1 {
                    rgs[i] = v;
                    rec(i + 1, maxv.max(v), rgs, out);
                }
            }
            let mut rgs = vec![0usize; n];
            rec(1, 0, &mut rgs, &mut out);
            out
        }
        for n in 2..=6 {
            for p in all_partitions(n) {
                assert_eq!(p.is_noncrossing(), !crossing_brute(&p), "{p:?}");
            }
        }
    }

    #[test]
    fn enumeration_order_is_rgs_lexicographic() {
        fn rgs_of(p: &SetPartition) -> Vec<usize> {
            let memb = p.membership();
            // blocks are ordered by minimum, which is first-appearance order
            (1..=p.n()).map(|x| memb[x]).collect()
        }
        for n in 1..=6 {
            let ps = enumerate_noncrossing(n).unwrap();
            let rgs: Vec<Vec<usize>> = ps.iter().map(rgs_of).collect();
            let mut sorted = rgs.clone();
            sorted.sort();
            assert_eq!(rgs, sorted, "n={n} not RGS-lex");
        }
    }

    #[test]
    fn pairings_counts_and_examples() {
        assert_eq!(enumerate_noncrossing_pairings(2).unwrap().len(), 1);
        let p4 = enumerate_noncrossing_pairings(4).unwrap();
        assert_eq!(p4.len(), 2);
        let shown: Vec<String> = p4
            .iter()
            .map(|p| format!("{:?}", p.as_partition()))
            .collect();
        assert!(shown.contains(&"{{1,2},{3,4}}".to_string()));
        assert!(shown.contains(&"{{1,4},{2,3}}".to_string()));
        // the crossing pairing {{1,3},{2,4}} is excluded
        assert!(!shown.contains(&"{{1,3},{2,4}}".to_string()));
        assert_eq!(enumerate_noncrossing_pairings(6).unwrap().len(), 5);
        for m in [2usize, 4, 6, 8, 10] {
            let ps = enumerate_noncrossing_pairings(m).unwrap();
            assert_eq!(ps.len() as u128, catalan((m / 2) as u64));
            for p in &ps {
                assert!(!crossing_brute(p.as_partition()));
                assert!(p.as_partition().blocks().iter().all(|b| b.len() == 2));
            }
        }
    }

    #[test]
    fn pairings_reject_odd() {
        assert!(matches!(
            enumerate_noncrossing_pairings(5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn enumeration_cap() {
        let err = enumerate_noncrossing(13).unwrap_err();
        match err {
            Error::Capacity(m) => assert!(m.contains("12"), "{m}"),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    fn rotate_down(p: &SetPartition) -> SetPartition {
        let n = p.n();
        let blocks = p
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&x| ((x + n - 2) % n) + 1).collect())
            .collect();
        SetPartition::new(n, blocks).unwrap()
    }

    #[test]
    fn kreweras_identities() {
        for n in 1..=6 {
            for pi in enumerate_noncrossing(n).unwrap() {
                let k = kreweras_complement(&pi).unwrap();
                assert_eq!(pi.block_count() + k.block_count(), n + 1, "{pi:?}");
                assert!(k.is_noncrossing());
                let kk = kreweras_complement(&k).unwrap();
                assert_eq!(kk, rotate_down(&pi), "{pi:?} -> {k:?} -> {kk:?}");
            }
        }
    }

    #[test]
    fn kreweras_extremes() {
        for n in 1..=8 {
            assert_eq!(
                kreweras_complement(&SetPartition::full(n)).unwrap(),
                SetPartition::singletons(n)
            );
            assert_eq!(
                kreweras_complement(&SetPartition::singletons(n)).unwrap(),
                SetPartition::full(n)
            );
        }
    }

    #[test]
    fn kreweras_union_stays_noncrossing() {
        // Interleave pi on odd positions and K(pi) on even positions of
        // {1..2n}; the union must be non-crossing.
        for n in 1..=6 {
            for pi in enumerate_noncrossing(n).unwrap() {
                let k = kreweras_complement(&pi).unwrap();
                let mut blocks: Vec<Vec<usize>> = pi
                    .blocks()
                    .iter()
                    .map(|b| b.iter().map(|&x| 2 * x - 1).collect())
                    .collect();
                blocks.extend(
                    k.blocks()
                        .iter()
                        .map(|b| b.iter().map(|&x| 2 * x).collect::<Vec<_>>()),
                );
                let union = SetPartition::new(2 * n, blocks).unwrap();
                assert!(union.is_noncrossing(), "pi={pi:?} K={k:?}");
            }
        }
    }

    #[test]
    fn kreweras_rejects_crossing() {
        let crossing = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        assert!(matches!(
            kreweras_complement(&crossing),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn partition_validation() {
        assert!(SetPartition::new(3, vec![vec![1, 2]]).is_err()); // missing 3
        assert!(SetPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err()); // dup
        assert!(SetPartition::new(3, vec![vec![1, 2, 4]]).is_err()); // out of range
        let p = SetPartition::new(3, vec![vec![3, 1], vec![2]]).unwrap();
        assert_eq!(format!("{p:?}"), "{{1,3},{2}}");
    }
}
