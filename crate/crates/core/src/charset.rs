//! Sets of Unicode scalar values stored as sorted disjoint ranges.
//!
//! Every set is finite as a list of ranges, so both finite character sets
//! (`[0-9]`) and co-finite ones (`~"."`, `tt`) share one canonical form. Two
//! sets are equal iff their range lists are equal.

use std::fmt;

const MAX_SCALAR: u32 = 0x10FFFF;
const SURROGATE_LO: u32 = 0xD800;
const SURROGATE_HI: u32 = 0xDFFF;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharSet {
    // Sorted, disjoint, non-adjacent, never touching the surrogate block.
    ranges: Vec<(u32, u32)>,
}

impl CharSet {
    pub fn empty() -> CharSet {
        CharSet { ranges: Vec::new() }
    }

    pub fn full() -> CharSet {
        CharSet {
            ranges: vec![(0, SURROGATE_LO - 1), (SURROGATE_HI + 1, MAX_SCALAR)],
        }
    }

    pub fn single(c: char) -> CharSet {
        let c = c as u32;
        CharSet { ranges: vec![(c, c)] }
    }

    /// Inclusive range. An inverted range yields the empty set.
    pub fn range(lo: char, hi: char) -> CharSet {
        CharSet::from_ranges([(lo as u32, hi as u32)])
    }

    pub fn from_chars<I: IntoIterator<Item = char>>(chars: I) -> CharSet {
        CharSet::from_ranges(chars.into_iter().map(|c| (c as u32, c as u32)))
    }

    fn from_ranges<I: IntoIterator<Item = (u32, u32)>>(raw: I) -> CharSet {
        let mut raw: Vec<(u32, u32)> = raw.into_iter().filter(|(lo, hi)| lo <= hi).collect();
        raw.sort_unstable();
        let mut ranges: Vec<(u32, u32)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            // carve out the surrogate block
            let pieces: [(u32, u32); 2] = [
                (lo, hi.min(SURROGATE_LO - 1)),
                (lo.max(SURROGATE_HI + 1), hi.min(MAX_SCALAR)),
            ];
            for (lo, hi) in pieces {
                if lo > hi {
                    continue;
                }
                match ranges.last_mut() {
                    Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                    _ => ranges.push((lo, hi)),
                }
            }
        }
        CharSet { ranges }
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn is_full(&self) -> bool {
        *self == CharSet::full()
    }

    pub fn contains(&self, c: char) -> bool {
        let c = c as u32;
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if hi < c {
                    std::cmp::Ordering::Less
                } else if lo > c {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn union(&self, other: &CharSet) -> CharSet {
        CharSet::from_ranges(self.ranges.iter().chain(other.ranges.iter()).copied())
    }

    pub fn intersect(&self, other: &CharSet) -> CharSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a_lo, a_hi) = self.ranges[i];
            let (b_lo, b_hi) = other.ranges[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a_hi < b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        CharSet { ranges: out }
    }

    pub fn complement(&self) -> CharSet {
        let mut out = Vec::with_capacity(self.ranges.len() + 1);
        let mut next = 0u32;
        for &(lo, hi) in &self.ranges {
            if lo > next {
                out.push((next, lo - 1));
            }
            next = hi + 1;
        }
        if next <= MAX_SCALAR {
            out.push((next, MAX_SCALAR));
        }
        CharSet::from_ranges(out)
    }

    pub fn difference(&self, other: &CharSet) -> CharSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &CharSet) -> bool {
        self.intersect(other) == *self
    }

    pub fn is_disjoint(&self, other: &CharSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Number of scalar values in the set.
    pub fn len(&self) -> u64 {
        self.ranges.iter().map(|&(lo, hi)| (hi - lo) as u64 + 1).sum()
    }

    /// A set is co-finite when it contains the top of the scalar range; its
    /// complement is then the (finite) excluded set.
    pub fn is_cofinite(&self) -> bool {
        self.ranges.last().is_some_and(|&(_, hi)| hi == MAX_SCALAR)
    }

    pub fn ranges(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.ranges.iter().map(|&(lo, hi)| {
            (
                char::from_u32(lo).expect("range bounds are scalar values"),
                char::from_u32(hi).expect("range bounds are scalar values"),
            )
        })
    }

    /// A representative member, preferring visible ASCII.
    pub fn sample(&self) -> Option<char> {
        let visible = self.intersect(&CharSet::range('!', '~'));
        visible
            .ranges
            .first()
            .or_else(|| self.ranges.first())
            .and_then(|&(lo, _)| char::from_u32(lo))
    }

    /// Single member, if the set has exactly one.
    pub fn as_single(&self) -> Option<char> {
        match self.ranges.as_slice() {
            [(lo, hi)] if lo == hi => char::from_u32(*lo),
            _ => None,
        }
    }
}

impl Default for CharSet {
    fn default() -> Self {
        CharSet::empty()
    }
}

pub(crate) fn escape_char(c: char, quote: char, out: &mut String) {
    match c {
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        '\r' => out.push_str("\\r"),
        '\\' => out.push_str("\\\\"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c if (c as u32) < 0x20 || c as u32 == 0x7f => {
            out.push_str(&format!("\\x{:02X}", c as u32));
        }
        c => out.push(c),
    }
}

fn escape_class_char(c: char, out: &mut String) {
    match c {
        ']' | '-' | '^' | '[' => {
            out.push('\\');
            out.push(c);
        }
        c => escape_char(c, ']', out),
    }
}

/// Bracket-class syntax, e.g. `[0-9a-f]`. The full set prints as `[.]`.
impl fmt::Display for CharSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return f.write_str("[.]");
        }
        let mut s = String::from("[");
        for (lo, hi) in self.ranges() {
            escape_class_char(lo, &mut s);
            if hi != lo {
                if hi as u32 != lo as u32 + 1 {
                    s.push('-');
                }
                escape_class_char(hi, &mut s);
            }
        }
        s.push(']');
        f.write_str(&s)
    }
}

impl fmt::Debug for CharSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharSet({self})")
    }
}
