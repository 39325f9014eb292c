//! External addresses: eventually periodic sequences of tract translates.
//!
//! Text form: whitespace-separated tokens `B`, `B+m` or `B-m`, where B is a
//! base tract name (`T1`, `S2`) or index (`0`), then `|` and the cycle.
//! `0 | 0` is the constant address 0 0 0 …

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The translate T + 2πi·offset of base tract `base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TractRef {
    pub base: usize,
    pub offset: i64,
}

impl TractRef {
    pub fn new(base: usize, offset: i64) -> Self {
        TractRef { base, offset }
    }

    pub fn shifted(self, k: i64) -> Self {
        TractRef { base: self.base, offset: self.offset + k }
    }
}

/// prefix · cycle^∞.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalAddress {
    pub prefix: Vec<TractRef>,
    pub cycle: Vec<TractRef>,
}

impl ExternalAddress {
    pub fn new(prefix: Vec<TractRef>, cycle: Vec<TractRef>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Domain("the periodic part of an address must be nonempty".into()));
        }
        Ok(ExternalAddress { prefix, cycle })
    }

    pub fn constant(t: TractRef) -> Self {
        ExternalAddress { prefix: vec![], cycle: vec![t] }
    }

    /// The k-th entry.
    pub fn get(&self, k: usize) -> TractRef {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.cycle[(k - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// σ(s): drop the first entry.
    pub fn shift(&self) -> Self {
        if let Some((_, rest)) = self.prefix.split_first() {
            ExternalAddress { prefix: rest.to_vec(), cycle: self.cycle.clone() }
        } else {
            let mut c = self.cycle.clone();
            c.rotate_left(1);
            ExternalAddress { prefix: vec![], cycle: c }
        }
    }

    pub fn shift_by(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |a, _| a.shift())
    }

    /// Distinct tract translates occurring in the address.
    pub fn letters(&self) -> Vec<TractRef> {
        let mut out: Vec<TractRef> = Vec::new();
        for t in self.prefix.iter().chain(&self.cycle) {
            if !out.contains(t) {
                out.push(*t);
            }
        }
        out
    }

    /// Length of the longest common initial segment with `other`, capped at
    /// `limit`.
    pub fn agreement(&self, other: &ExternalAddress, limit: usize) -> usize {
        (0..limit).take_while(|&k| self.get(k) == other.get(k)).count()
    }

    /// Parse with `names[i]` the display name of base tract i.
    pub fn parse(text: &str, names: &[String]) -> Result<Self> {
        let mut prefix = Vec::new();
        let mut cycle = Vec::new();
        let mut in_cycle = false;
        let mut pos = 0;
        for piece in text.split_inclusive(char::is_whitespace) {
            let start = pos;
            pos += piece.len();
            let tok = piece.trim_end();
            if tok.is_empty() {
                continue;
            }
            // a bar may be glued to neighbouring tokens: "0|0"
            let mut off = start;
            for (i, part) in tok.split('|').enumerate() {
                if i > 0 {
                    if in_cycle {
                        return Err(Error::Parse { position: off - 1, message: "second '|'".into() });
                    }
                    in_cycle = true;
                }
                if !part.is_empty() {
                    let t = parse_token(part, off, names)?;
                    if in_cycle {
                        cycle.push(t);
                    } else {
                        prefix.push(t);
                    }
                }
                off += part.len() + 1;
            }
        }
        if !in_cycle {
            return Err(Error::Parse { position: text.len(), message: "missing '|' before the periodic part".into() });
        }
        if cycle.is_empty() {
            return Err(Error::Parse { position: text.len(), message: "empty periodic part".into() });
        }
        Ok(ExternalAddress { prefix, cycle })
    }

    pub fn display(&self, names: &[String]) -> String {
        let fmt = |t: &TractRef| {
            let name = names.get(t.base).cloned().unwrap_or_else(|| t.base.to_string());
            match t.offset {
                0 => name,
                m if m > 0 => format!("{name}+{m}"),
                m => format!("{name}{m}"),
            }
        };
        let p: Vec<String> = self.prefix.iter().map(fmt).collect();
        let c: Vec<String> = self.cycle.iter().map(fmt).collect();
        if p.is_empty() {
            format!("| {}", c.join(" "))
        } else {
            format!("{} | {}", p.join(" "), c.join(" "))
        }
    }
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&[]))
    }
}

fn parse_token(tok: &str, position: usize, names: &[String]) -> Result<TractRef> {
    let err = |message: String| Error::Parse { position, message };
    let split = tok.char_indices().skip(1).find(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i);
    let (name, offset) = match split {
        Some(i) => {
            let m: i64 = tok[i..]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| err(format!("bad offset in '{tok}'")))?;
            (&tok[..i], m)
        }
        None => (tok, 0),
    };
    if let Some(i) = names.iter().position(|n| n == name) {
        return Ok(TractRef::new(i, offset));
    }
    match name.parse::<usize>() {
        Ok(i) if i < names.len() => Ok(TractRef::new(i, offset)),
        Ok(i) => Err(err(format!("base tract {i} does not exist"))),
        Err(_) => Err(err(format!("unknown tract '{name}'"))),
    }
}
