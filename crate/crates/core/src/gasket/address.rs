//! Symbolic coordinates on a gasket: corner letters, words, vertex
//! addresses and their exact dyadic barycentric coordinates.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{FifError, Result};

/// Deepest vertex set [`enumerate_vertices`] will build.
pub const MAX_ENUM_DEPTH: usize = 13;

/// Longest word whose dyadic coordinates fit the `u64` numerators of [`DyadicBary`].
pub const MAX_EXACT_LEVEL: usize = 62;

/// One of the three corners `p1, p2, p3` (and the matching contraction `L_i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner(u8);

impl Corner {
    pub const ALL: [Corner; 3] = [Corner(0), Corner(1), Corner(2)];

    /// Builds a corner from its 1-based label.
    pub fn new(label: u8) -> Result<Self> {
        match label {
            1..=3 => Ok(Corner(label - 1)),
            _ => Err(FifError::Validation(format!(
                "corner label must be 1, 2 or 3, got {label}"
            ))),
        }
    }

    /// Builds a corner from its 0-based index. Panics for `index > 2`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < 3, "corner index out of range: {index}");
        Corner(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn label(self) -> u8 {
        self.0 + 1
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A finite string of corner letters selecting a nested cell `L_{w1} ∘ … ∘ L_{wm}`.
///
/// Ordering is lexicographic with a proper prefix sorting first.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Corner>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Corner>) -> Self {
        Word(letters)
    }

    pub fn repeat(letter: Corner, len: usize) -> Self {
        Word(vec![letter; len])
    }

    /// The word of length `len` whose base-3 digits (first letter most significant) are `index`.
    pub fn from_index(mut index: usize, len: usize) -> Self {
        let mut letters = vec![Corner(0); len];
        for slot in letters.iter_mut().rev() {
            *slot = Corner((index % 3) as u8);
            index /= 3;
        }
        Word(letters)
    }

    /// Base-3 rank of the word among words of the same length; matches lexicographic order.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, c| acc * 3 + c.index())
    }

    pub fn letters(&self) -> &[Corner] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Corner> {
        self.0.last().copied()
    }

    pub fn push(&mut self, c: Corner) {
        self.0.push(c);
    }

    pub fn pop(&mut self) -> Option<Corner> {
        self.0.pop()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Every word of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = Word> {
        let count = 3usize.pow(len as u32);
        (0..count).map(move |i| Word::from_index(i, len))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = FifError;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'1'..=b'3' => Ok(Corner(b - b'1')),
                _ => Err(FifError::Validation(format!(
                    "invalid letter {:?} in word {s:?}; letters are 1, 2, 3",
                    b as char
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// Drops the first `k` letters; over-shifting yields the empty word.
pub fn shift(w: &Word, k: usize) -> Word {
    Word(w.0.get(k.min(w.len())..).unwrap_or_default().to_vec())
}

/// The gasket vertex `L_word(p_corner)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    pub word: Word,
    pub corner: Corner,
}

impl Address {
    pub fn new(word: Word, corner: Corner) -> Self {
        Address { word, corner }
    }

    /// The bare outer corner `p_c`.
    pub fn corner(c: Corner) -> Self {
        Address {
            word: Word::empty(),
            corner: c,
        }
    }

    /// True when the canonical form is one of the three outer corners.
    pub fn is_outer_corner(&self) -> bool {
        canonicalize(self).word.is_empty()
    }

    /// Same point, word extended by repeating the terminal corner up to `len` letters.
    pub fn padded(&self, len: usize) -> Address {
        let mut word = self.word.clone();
        while word.len() < len {
            word.push(self.corner);
        }
        Address::new(word, self.corner)
    }

    /// Exact barycentric coordinates of the vertex, computed in `f64`.
    ///
    /// Exact for words up to 52 letters; longer words round gracefully.
    pub fn bary(&self) -> [f64; 3] {
        let mut b = [0.0; 3];
        b[self.corner.index()] = 1.0;
        for c in self.word.letters().iter().rev() {
            for x in b.iter_mut() {
                *x *= 0.5;
            }
            b[c.index()] += 0.5;
        }
        b
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.word, self.corner)
    }
}

impl FromStr for Address {
    type Err = FifError;

    /// Parses `"<letters>@<corner>"`, e.g. `"12@3"` or `"@1"` for a bare corner.
    fn from_str(s: &str) -> Result<Self> {
        let (w, c) = s.split_once('@').ok_or_else(|| {
            FifError::Validation(format!("address {s:?} must have the form \"<letters>@<corner>\""))
        })?;
        let word: Word = w.parse()?;
        let corner = match c.as_bytes() {
            [b @ b'1'..=b'3'] => Corner(b - b'1'),
            _ => {
                return Err(FifError::Validation(format!(
                    "address {s:?} has invalid corner {c:?}"
                )))
            }
        };
        Ok(Address { word, corner })
    }
}

/// Exact barycentric coordinates `nums / 2^level` of a dyadic gasket point.
///
/// Equality and hashing compare the represented point, not the level.
#[derive(Debug, Clone, Copy)]
pub struct DyadicBary {
    pub nums: [u64; 3],
    pub level: u32,
}

impl DyadicBary {
    pub fn new(nums: [u64; 3], level: u32) -> Result<Self> {
        let sum: u128 = nums.iter().map(|&n| n as u128).sum();
        if level as usize > MAX_EXACT_LEVEL || sum != 1u128 << level {
            return Err(FifError::Validation(format!(
                "numerators {nums:?} do not sum to 2^{level}"
            )));
        }
        Ok(DyadicBary { nums, level })
    }

    /// Lowest-level representation of the same point.
    pub fn reduced(&self) -> DyadicBary {
        let mut r = *self;
        while r.level > 0 && r.nums.iter().all(|n| n % 2 == 0) {
            r.nums.iter_mut().for_each(|n| *n /= 2);
            r.level -= 1;
        }
        r
    }

    /// Same point expressed at a finer `level`. Panics if `level` is coarser.
    pub fn lifted(&self, level: u32) -> DyadicBary {
        assert!(level >= self.level && level as usize <= MAX_EXACT_LEVEL);
        let k = level - self.level;
        DyadicBary {
            nums: self.nums.map(|n| n << k),
            level,
        }
    }

    pub fn to_f64(&self) -> [f64; 3] {
        let d = (self.level as f64).exp2();
        self.nums.map(|n| n as f64 / d)
    }
}

impl PartialEq for DyadicBary {
    fn eq(&self, other: &Self) -> bool {
        let level = self.level.max(other.level);
        self.lifted(level).nums == other.lifted(level).nums
    }
}

impl Eq for DyadicBary {}

impl Hash for DyadicBary {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        r.nums.hash(state);
        r.level.hash(state);
    }
}

/// Exact dyadic barycentric coordinates of an address, at level `|word|`.
///
/// Panics when the word is longer than [`MAX_EXACT_LEVEL`].
pub fn address_dyadic(a: &Address) -> DyadicBary {
    let m = a.word.len();
    assert!(
        m <= MAX_EXACT_LEVEL,
        "address deeper than {MAX_EXACT_LEVEL} letters has no u64 dyadic form"
    );
    let mut nums = [0u64; 3];
    for (k, c) in a.word.letters().iter().enumerate() {
        nums[c.index()] += 1u64 << (m - 1 - k);
    }
    nums[a.corner.index()] += 1;
    DyadicBary {
        nums,
        level: m as u32,
    }
}

/// Unique representative of the geometric point named by `a`.
///
/// Trailing letters equal to the corner are dropped (`L_{w·v}(p_v) = L_w(p_v)`),
/// then an edge midpoint `(w·l, v)` is swapped to `(w·v, l)` if that sorts lower.
pub fn canonicalize(a: &Address) -> Address {
    let mut word = a.word.clone();
    let corner = a.corner;
    while word.last() == Some(corner) {
        word.pop();
    }
    match word.last() {
        Some(l) if corner < l => {
            word.pop();
            word.push(corner);
            Address::new(word, l)
        }
        _ => Address::new(word, corner),
    }
}

/// All distinct vertices `L_w(p_i)`, `|w| = m`, as sorted canonical addresses.
///
/// There are `3(3^m + 1)/2` of them: the three outer corners plus one midpoint
/// per edge of every cell of depth `< m`.
pub fn enumerate_vertices(m: usize) -> Result<Vec<Address>> {
    if m > MAX_ENUM_DEPTH {
        return Err(FifError::Capacity(format!(
            "vertex enumeration depth {m} exceeds the limit {MAX_ENUM_DEPTH}"
        )));
    }
    let mut out = Vec::with_capacity(vertex_count(m));
    out.extend(Corner::ALL.iter().map(|&c| Address::corner(c)));
    for k in 0..m {
        for w in Word::all(k) {
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let mut word = w.clone();
                word.push(Corner(a));
                out.push(Address::new(word, Corner(b)));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `3(3^m + 1)/2`.
pub fn vertex_count(m: usize) -> usize {
    3 * (3usize.pow(m as u32) + 1) / 2
}

/// Compares addresses by the point they name.
pub fn same_point(a: &Address, b: &Address) -> bool {
    canonicalize(a) == canonicalize(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashSet};

    fn addr(s: &str) -> Address {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["@1", "12@3", "3321@2"] {
            assert_eq!(addr(s).to_string(), s);
        }
        assert!("12".parse::<Address>().is_err());
        assert!("14@1".parse::<Address>().is_err());
        assert!("1@0".parse::<Address>().is_err());
        assert!("1@12".parse::<Address>().is_err());
    }

    #[test]
    fn dyadic_coordinates() {
        assert_eq!(address_dyadic(&addr("@1")).nums, [1, 0, 0]);
        let d = address_dyadic(&addr("1@2"));
        assert_eq!((d.nums, d.level), ([1, 1, 0], 1));
        let d = address_dyadic(&addr("12@3"));
        assert_eq!((d.nums, d.level), ([2, 1, 1], 2));
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&addr("11@1")), addr("@1"));
        assert_eq!(canonicalize(&addr("2@1")), addr("1@2"));
        assert_eq!(canonicalize(&addr("1@2")), addr("1@2"));
        assert_eq!(canonicalize(&addr("121@2")), canonicalize(&addr("122@1")));
        assert_eq!(
            address_dyadic(&addr("121@2")),
            address_dyadic(&addr("122@1"))
        );
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&w("123"), 1), w("23"));
        assert_eq!(shift(&w("123"), 3), Word::empty());
        assert_eq!(shift(&w("123"), 5), Word::empty());
        assert_eq!(shift(&w("123"), 0), w("123"));
    }

    #[test]
    fn vertex_counts_small() {
        assert_eq!(enumerate_vertices(0).unwrap().len(), 3);
        assert_eq!(enumerate_vertices(1).unwrap().len(), 6);
        assert_eq!(enumerate_vertices(2).unwrap().len(), 15);
        assert!(matches!(
            enumerate_vertices(MAX_ENUM_DEPTH + 1),
            Err(FifError::Capacity(_))
        ));
    }

    /// Brute-force oracle: all `(w, i)` with `|w| = m`, deduplicated by exact coordinates.
    fn brute_force_vertices(m: usize) -> HashSet<DyadicBary> {
        Word::all(m)
            .flat_map(|w| Corner::ALL.map(|c| address_dyadic(&Address::new(w.clone(), c))))
            .collect()
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for m in 0..=4 {
            let fast: HashSet<DyadicBary> = enumerate_vertices(m)
                .unwrap()
                .iter()
                .map(address_dyadic)
                .collect();
            let brute = brute_force_vertices(m);
            assert_eq!(fast, brute, "depth {m}");
            assert_eq!(brute.len(), vertex_count(m));
        }
        for m in 0..=6 {
            assert_eq!(enumerate_vertices(m).unwrap().len(), vertex_count(m));
        }
    }

    #[test]
    fn enumerated_addresses_are_canonical() {
        for a in enumerate_vertices(4).unwrap() {
            assert_eq!(canonicalize(&a), a);
        }
    }

    #[test]
    fn canonical_form_iff_same_coordinates() {
        let mut all = Vec::new();
        for m in 0..=4 {
            for w in Word::all(m) {
                for c in Corner::ALL {
                    all.push(Address::new(w.clone(), c));
                }
            }
        }
        let canon: Vec<Address> = all.iter().map(canonicalize).collect();
        let coords: Vec<DyadicBary> = all.iter().map(address_dyadic).collect();
        for (a, c) in all.iter().zip(&canon) {
            assert_eq!(&canonicalize(c), c, "not idempotent for {a}");
            assert_eq!(address_dyadic(a), address_dyadic(c), "moved point for {a}");
        }
        // Equal coordinates must map to one canonical address per class.
        let mut classes: std::collections::HashMap<DyadicBary, BTreeSet<Address>> =
            Default::default();
        for (c, d) in canon.iter().zip(&coords) {
            classes.entry(*d).or_default().insert(c.clone());
        }
        for (d, reps) in classes {
            assert_eq!(reps.len(), 1, "{d:?} has reps {reps:?}");
        }
    }

    #[test]
    fn word_index_round_trip() {
        for len in 0..4 {
            for (i, word) in Word::all(len).enumerate() {
                assert_eq!(word.index(), i);
                assert_eq!(word.len(), len);
            }
        }
    }

    #[test]
    fn bary_matches_dyadic() {
        for a in enumerate_vertices(5).unwrap() {
            assert_eq!(a.bary(), address_dyadic(&a).to_f64());
        }
    }
}
