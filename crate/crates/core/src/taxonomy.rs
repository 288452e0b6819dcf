//! CN-code parsing, hierarchical prefix matching, annex coverage and sector
//! classification.
//!
//! Combined Nomenclature codes are hierarchical: a 2-digit chapter contains
//! 4-digit headings, which contain 6- and 8-digit lines. Coverage and sector
//! membership are therefore prefix questions, answered here with a small
//! digit trie.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized CN goods code: 2, 4, 6 or 8 decimal digits, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CnCode(String);

impl CnCode {
    /// Parse and normalize a raw code. Whitespace is stripped, so
    /// `"2523 21 00"` and `"25232100"` normalize identically.
    pub fn parse(text: &str) -> Result<Self> {
        let digits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::CnNonDigit {
                input: text.to_string(),
            });
        }
        if !matches!(digits.len(), 2 | 4 | 6 | 8) {
            return Err(Error::CnBadLength {
                input: text.to_string(),
                len: digits.len(),
            });
        }
        Ok(CnCode(digits))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when `self` is a hierarchical ancestor of `other` (or equal).
    pub fn covers(&self, other: &CnCode) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for CnCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for CnCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CnCode::parse(s)
    }
}

impl TryFrom<String> for CnCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        CnCode::parse(&s)
    }
}

impl From<CnCode> for String {
    fn from(code: CnCode) -> String {
        code.0
    }
}

/// The five covered industries plus a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    Cement,
    Electricity,
    Fertilizers,
    IronSteel,
    Aluminium,
    Other,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Sector::Cement => "Cement",
            Sector::Electricity => "Electricity",
            Sector::Fertilizers => "Fertilizers",
            Sector::IronSteel => "IronSteel",
            Sector::Aluminium => "Aluminium",
            Sector::Other => "Other",
        };
        f.write_str(name)
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Cement" => Ok(Sector::Cement),
            "Electricity" => Ok(Sector::Electricity),
            "Fertilizers" => Ok(Sector::Fertilizers),
            "IronSteel" => Ok(Sector::IronSteel),
            "Aluminium" => Ok(Sector::Aluminium),
            "Other" => Ok(Sector::Other),
            other => Err(Error::Parse(format!("unknown sector {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Digit trie
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct TrieNode<V> {
    children: [Option<Box<TrieNode<V>>>; 10],
    value: Option<V>,
}

impl<V> Default for TrieNode<V> {
    fn default() -> Self {
        TrieNode {
            children: Default::default(),
            value: None,
        }
    }
}

/// Map from digit-string prefixes to values, longest-prefix lookup.
#[derive(Debug, Clone)]
struct CodeTrie<V> {
    root: TrieNode<V>,
}

impl<V> Default for CodeTrie<V> {
    fn default() -> Self {
        CodeTrie {
            root: TrieNode::default(),
        }
    }
}

impl<V> CodeTrie<V> {
    fn insert(&mut self, prefix: &str, value: V) {
        let mut node = &mut self.root;
        for d in prefix.bytes().map(|b| (b - b'0') as usize) {
            node = node.children[d].get_or_insert_with(Default::default);
        }
        node.value = Some(value);
    }

    /// Value of the longest stored prefix of `key`, if any.
    fn longest_match(&self, key: &str) -> Option<&V> {
        let mut node = &self.root;
        let mut best = node.value.as_ref();
        for d in key.bytes().map(|b| (b - b'0') as usize) {
            match &node.children[d] {
                Some(child) => {
                    node = child;
                    if node.value.is_some() {
                        best = node.value.as_ref();
                    }
                }
                None => break,
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Annex list
// ---------------------------------------------------------------------------

/// Ordered set of CN-code prefixes defining the covered goods.
///
/// No entry may be a strict prefix of another: the shorter entry would
/// already cover everything under the longer one, so the longer is rejected
/// as redundant at load time.
#[derive(Debug, Clone)]
pub struct AnnexList {
    name: String,
    entries: Vec<CnCode>,
    trie: CodeTrie<()>,
}

impl AnnexList {
    pub fn new(name: impl Into<String>, entries: Vec<CnCode>) -> Result<Self> {
        let mut entries = entries;
        entries.sort();
        entries.dedup();
        if entries.is_empty() {
            return Err(Error::EmptyAnnex);
        }
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                if a.covers(b) {
                    return Err(Error::RedundantAnnexEntry {
                        shorter: a.to_string(),
                        longer: b.to_string(),
                    });
                }
            }
        }
        let mut trie = CodeTrie::default();
        for e in &entries {
            trie.insert(e.as_str(), ());
        }
        Ok(AnnexList {
            name: name.into(),
            entries,
            trie,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[CnCode] {
        &self.entries
    }

    /// True iff some annex entry is a prefix of `code` or equals it.
    pub fn is_covered(&self, code: &CnCode) -> bool {
        self.trie.longest_match(code.as_str()).is_some()
    }
}

// ---------------------------------------------------------------------------
// Sector map
// ---------------------------------------------------------------------------

/// CN prefix to sector mapping; the longest matching prefix wins.
#[derive(Debug, Clone)]
pub struct SectorMap {
    entries: BTreeMap<CnCode, Sector>,
    trie: CodeTrie<Sector>,
}

impl SectorMap {
    pub fn new(entries: BTreeMap<CnCode, Sector>) -> Self {
        let mut trie = CodeTrie::default();
        for (code, sector) in &entries {
            trie.insert(code.as_str(), *sector);
        }
        SectorMap { entries, trie }
    }

    pub fn entries(&self) -> &BTreeMap<CnCode, Sector> {
        &self.entries
    }

    /// Sector of the longest matching prefix; `Other` when nothing matches.
    pub fn sector_of(&self, code: &CnCode) -> Sector {
        self.trie
            .longest_match(code.as_str())
            .copied()
            .unwrap_or(Sector::Other)
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct TaxonomyDoc {
    #[serde(default)]
    name: Option<String>,
    annex: Vec<String>,
    #[serde(default)]
    sectors: BTreeMap<String, String>,
}

/// Combined annex + sector document:
/// `{"annex": ["2523", ...], "sectors": {"2523": "Cement", ...}}`.
pub fn load_taxonomy(json: &str) -> Result<(AnnexList, SectorMap)> {
    let doc: TaxonomyDoc =
        serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))?;
    let entries = doc
        .annex
        .iter()
        .map(|s| CnCode::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let annex = AnnexList::new(doc.name.unwrap_or_else(|| "annex-i".to_string()), entries)?;
    let mut sectors = BTreeMap::new();
    for (code, sector) in &doc.sectors {
        sectors.insert(CnCode::parse(code)?, sector.parse::<Sector>()?);
    }
    Ok((annex, SectorMap::new(sectors)))
}

/// Default coverage and sector map shipped with the engine. A configuration
/// starting point, not a legal artifact; operators override it with their
/// own annex document.
pub fn shipped_taxonomy() -> (AnnexList, SectorMap) {
    load_taxonomy(include_str!("../data/annex.json")).expect("shipped taxonomy is valid")
}
