//! Small dense linear algebra over GF(2).

/// Fixed-length bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> BitRow {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_ones<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> BitRow {
        let mut r = BitRow::zeros(len);
        for i in ones {
            r.flip(i);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        if self.get(i) != v {
            self.flip(i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn dot(&self, other: &BitRow) -> bool {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &w) in self.words.iter().enumerate() {
            let mut m = w;
            while m != 0 {
                out.push(k * 64 + m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        out
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Incremental row echelon form that remembers how each pivot row was built
/// from the inserted vectors.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    rows: Vec<(usize, BitRow, BitRow)>,
    inserted: usize,
    capacity: usize,
}

impl Echelon {
    /// `capacity` bounds the number of vectors that will be inserted.
    pub fn new(len: usize, capacity: usize) -> Echelon {
        Echelon { len, rows: Vec::new(), inserted: 0, capacity }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the pivots; returns the residual and the combination used.
    pub fn reduce(&self, v: &BitRow) -> (BitRow, BitRow) {
        let mut r = v.clone();
        let mut combo = BitRow::zeros(self.capacity);
        for (pivot, row, c) in &self.rows {
            if r.get(*pivot) {
                r.xor_assign(row);
                combo.xor_assign(c);
            }
        }
        (r, combo)
    }

    /// Inserts `v` and returns true when it was independent of the earlier vectors.
    pub fn insert(&mut self, v: &BitRow) -> bool {
        assert!(self.inserted < self.capacity, "echelon capacity exceeded");
        debug_assert_eq!(v.len(), self.len);
        let (r, mut combo) = self.reduce(v);
        combo.flip(self.inserted);
        self.inserted += 1;
        match r.first_one() {
            None => false,
            Some(p) => {
                for (_, row, c) in self.rows.iter_mut() {
                    if row.get(p) {
                        row.xor_assign(&r);
                        c.xor_assign(&combo);
                    }
                }
                self.rows.push((p, r, combo));
                true
            }
        }
    }

    /// Indices of inserted vectors summing to `v`, if `v` is in the span.
    pub fn express(&self, v: &BitRow) -> Option<Vec<usize>> {
        let (r, combo) = self.reduce(v);
        r.is_zero().then(|| combo.ones())
    }

    pub fn contains(&self, v: &BitRow) -> bool {
        self.reduce(v).0.is_zero()
    }
}

/// Basis of `{ v : rows[i] · v = 0 for all i }` over `ncols` columns.
pub fn nullspace(rows: &[BitRow], ncols: usize) -> Vec<BitRow> {
    let mut m: Vec<BitRow> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(k) = (r..m.len()).find(|&k| m[k].get(col)) else {
            continue;
        };
        m.swap(r, k);
        let pr = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && row.get(col) {
                row.xor_assign(&pr);
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_set.contains(c)) {
        let mut v = BitRow::zeros(ncols);
        v.flip(free);
        for (k, &p) in pivots.iter().enumerate() {
            if m[k].get(free) {
                v.flip(p);
            }
        }
        out.push(v);
    }
    out
}

pub fn rank(rows: &[BitRow]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut e = Echelon::new(first.len(), rows.len());
    rows.iter().filter(|r| e.insert(r)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_is_orthogonal() {
        let rows = vec![BitRow::from_ones(4, [0, 1]), BitRow::from_ones(4, [1, 2])];
        let ns = nullspace(&rows, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                assert!(!r.dot(v));
            }
        }
    }

    #[test]
    fn echelon_expresses_combinations() {
        let mut e = Echelon::new(3, 3);
        assert!(e.insert(&BitRow::from_ones(3, [0, 1])));
        assert!(e.insert(&BitRow::from_ones(3, [1, 2])));
        assert!(!e.insert(&BitRow::from_ones(3, [0, 2])));
        assert_eq!(e.express(&BitRow::from_ones(3, [0, 2])), Some(vec![0, 1]));
        assert_eq!(e.express(&BitRow::from_ones(3, [0])), None);
    }
}
