//! Combinatorial data of an interval exchange: a pair of orderings of an
//! alphabet.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A pair `(π0, π1)` of bijections from an alphabet onto `{1..d}`.
///
/// Letters are addressed by their index `0..d` in the alphabet. Positions
/// are 0-based internally; the public `pi` accessor and the interchange
/// format use the 1-based positions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PermutationPair {
    names: Vec<String>,
    /// `pos[e][letter]`: 0-based position of `letter` in row `e`.
    pos: [Vec<usize>; 2],
    /// `row[e][p]`: letter at 0-based position `p` of row `e`.
    row: [Vec<usize>; 2],
}

impl fmt::Debug for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top: Vec<&str> = self.row[0].iter().map(|&a| self.names[a].as_str()).collect();
        let bot: Vec<&str> = self.row[1].iter().map(|&a| self.names[a].as_str()).collect();
        write!(f, "{} / {}", top.join(" "), bot.join(" "))
    }
}

fn invert(pos: &[usize]) -> Option<Vec<usize>> {
    let d = pos.len();
    let mut row = vec![usize::MAX; d];
    for (letter, &p) in pos.iter().enumerate() {
        if p >= d || row[p] != usize::MAX {
            return None;
        }
        row[p] = letter;
    }
    Some(row)
}

impl PermutationPair {
    /// Build from 1-based positions, without the admissibility check.
    pub fn new_unchecked(names: Vec<String>, pi0: &[usize], pi1: &[usize]) -> Result<Self> {
        let d = names.len();
        if d < 2 {
            return Err(Error::InvalidPermutation(format!(
                "alphabet must have at least 2 letters, got {d}"
            )));
        }
        let distinct: HashSet<&String> = names.iter().collect();
        if distinct.len() != d {
            return Err(Error::InvalidPermutation("alphabet has repeated letters".into()));
        }
        if pi0.len() != d || pi1.len() != d {
            return Err(Error::InvalidPermutation(
                "pi0 and pi1 must assign a position to every letter".into(),
            ));
        }
        let to0 = |pi: &[usize]| -> Result<Vec<usize>> {
            pi.iter()
                .map(|&p| {
                    if p == 0 || p > d {
                        Err(Error::InvalidPermutation(format!("position {p} outside 1..{d}")))
                    } else {
                        Ok(p - 1)
                    }
                })
                .collect()
        };
        let p0 = to0(pi0)?;
        let p1 = to0(pi1)?;
        let r0 = invert(&p0)
            .ok_or_else(|| Error::InvalidPermutation("pi0 is not a bijection".into()))?;
        let r1 = invert(&p1)
            .ok_or_else(|| Error::InvalidPermutation("pi1 is not a bijection".into()))?;
        Ok(PermutationPair {
            names,
            pos: [p0, p1],
            row: [r0, r1],
        })
    }

    /// Build from 1-based positions and require admissibility.
    pub fn new(names: Vec<String>, pi0: &[usize], pi1: &[usize]) -> Result<Self> {
        let p = PermutationPair::new_unchecked(names, pi0, pi1)?;
        p.require_admissible()?;
        Ok(p)
    }

    /// Build from the two rows written as letter sequences, e.g.
    /// `from_rows("A B C", "C B A")`.
    pub fn from_rows(top: &str, bottom: &str) -> Result<Self> {
        let top: Vec<&str> = top.split_whitespace().collect();
        let bottom: Vec<&str> = bottom.split_whitespace().collect();
        let names: Vec<String> = top.iter().map(|s| s.to_string()).collect();
        let pi0: Vec<usize> = (1..=names.len()).collect();
        let mut pi1 = vec![0; names.len()];
        if bottom.len() != names.len() {
            return Err(Error::InvalidPermutation("rows have different lengths".into()));
        }
        for (p, b) in bottom.iter().enumerate() {
            let i = names.iter().position(|n| n == b).ok_or_else(|| {
                Error::InvalidPermutation(format!("letter {b} missing from the top row"))
            })?;
            pi1[i] = p + 1;
        }
        PermutationPair::new(names, &pi0, &pi1)
    }

    /// The pair `A B .. / .. B A` on `d` letters named `A`, `B`, ...
    pub fn symmetric(d: usize) -> Self {
        let names = default_names(d);
        let pi0: Vec<usize> = (1..=d).collect();
        let pi1: Vec<usize> = (1..=d).rev().collect();
        PermutationPair::new(names, &pi0, &pi1).expect("symmetric pair is admissible")
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, letter: usize) -> &str {
        &self.names[letter]
    }

    pub fn letter(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// 1-based position `π_e(letter)`.
    pub fn pi(&self, e: usize, letter: usize) -> usize {
        self.pos[e][letter] + 1
    }

    /// 0-based position of `letter` in row `e`.
    pub fn pos(&self, e: usize, letter: usize) -> usize {
        self.pos[e][letter]
    }

    /// Letters of row `e` in order.
    pub fn row(&self, e: usize) -> &[usize] {
        &self.row[e]
    }

    /// Letter at 0-based position `p` of row `e`.
    pub fn at(&self, e: usize, p: usize) -> usize {
        self.row[e][p]
    }

    /// The letter `α_e` with `π_e(α_e) = d`.
    pub fn last(&self, e: usize) -> usize {
        self.row[e][self.d() - 1]
    }

    /// The letter with `π_e(α) = 1`.
    pub fn first(&self, e: usize) -> usize {
        self.row[e][0]
    }

    /// 1-based positions of row `e` indexed by letter.
    pub fn positions(&self, e: usize) -> Vec<usize> {
        self.pos[e].iter().map(|p| p + 1).collect()
    }

    /// No proper prefix of the top row has the same letter set as the
    /// corresponding prefix of the bottom row.
    pub fn is_admissible(&self) -> bool {
        let d = self.d();
        let mut seen = vec![0u8; d];
        let mut common = 0;
        for k in 0..d - 1 {
            for e in 0..2 {
                let a = self.row[e][k];
                seen[a] += 1;
                if seen[a] == 2 {
                    common += 1;
                }
            }
            if common == k + 1 {
                return false;
            }
        }
        true
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::NotAdmissible(self.to_string()))
        }
    }

    /// The pair with rows exchanged; it describes the inverse map.
    pub fn swapped(&self) -> Self {
        PermutationPair {
            names: self.names.clone(),
            pos: [self.pos[1].clone(), self.pos[0].clone()],
            row: [self.row[1].clone(), self.row[0].clone()],
        }
    }

    /// The permutation `π1 ∘ π0⁻¹` of `{1..d}`.
    pub fn monodromy(&self) -> Vec<usize> {
        (0..self.d()).map(|p| self.pos[1][self.row[0][p]] + 1).collect()
    }

    /// The Rauzy move of type `e`: row `1 - e` is rearranged so that the
    /// last letter of that row is inserted right after the last letter of
    /// row `e`.
    pub fn rauzy_move(&self, e: usize) -> Result<Self> {
        self.require_admissible()?;
        let d = self.d();
        let o = 1 - e;
        let winner = self.last(e);
        let loser = self.last(o);
        let k = self.pos[o][winner];
        let mut new_pos = self.pos[o].clone();
        for (letter, p) in new_pos.iter_mut().enumerate() {
            if letter == loser {
                *p = k + 1;
            } else if *p > k && *p < d - 1 {
                *p += 1;
            }
        }
        let new_row = invert(&new_pos).expect("Rauzy move yields a bijection");
        let mut pos = self.pos.clone();
        let mut row = self.row.clone();
        pos[o] = new_pos;
        row[o] = new_row;
        Ok(PermutationPair {
            names: self.names.clone(),
            pos,
            row,
        })
    }
}

struct Positions<'a>(&'a PermutationPair, usize);

impl Serialize for Positions<'_> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut m = s.serialize_map(Some(self.0.d()))?;
        for (a, name) in self.0.names.iter().enumerate() {
            m.serialize_entry(name, &self.0.pi(self.1, a))?;
        }
        m.end()
    }
}

/// Interchange form: `{"alphabet": [...], "pi0": {letter: position}, "pi1": {...}}`.
impl Serialize for PermutationPair {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("alphabet", &self.names)?;
        m.serialize_entry("pi0", &Positions(self, 0))?;
        m.serialize_entry("pi1", &Positions(self, 1))?;
        m.end()
    }
}

#[derive(Deserialize)]
struct PairDoc {
    alphabet: Vec<String>,
    pi0: HashMap<String, usize>,
    pi1: HashMap<String, usize>,
}

impl PairDoc {
    fn into_pair(self) -> Result<PermutationPair> {
        let lookup = |pi: &HashMap<String, usize>, which: &str| -> Result<Vec<usize>> {
            if pi.len() != self.alphabet.len() {
                return Err(Error::InvalidPermutation(format!(
                    "{which} must list exactly the letters of the alphabet"
                )));
            }
            self.alphabet
                .iter()
                .map(|a| {
                    pi.get(a).copied().ok_or_else(|| {
                        Error::InvalidPermutation(format!("{which} has no position for {a}"))
                    })
                })
                .collect()
        };
        let pi0 = lookup(&self.pi0, "pi0")?;
        let pi1 = lookup(&self.pi1, "pi1")?;
        PermutationPair::new_unchecked(self.alphabet.clone(), &pi0, &pi1)
    }
}

/// Accepts any pair of bijections; admissibility is checked by consumers.
impl<'de> Deserialize<'de> for PermutationPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PairDoc::deserialize(d)?
            .into_pair()
            .map_err(serde::de::Error::custom)
    }
}

/// Letter names `A`, `B`, ..., `Z`, then `A1`, `B1`, ...
pub fn default_names(d: usize) -> Vec<String> {
    (0..d)
        .map(|i| {
            let c = (b'A' + (i % 26) as u8) as char;
            if i < 26 {
                c.to_string()
            } else {
                format!("{c}{}", i / 26)
            }
        })
        .collect()
}
