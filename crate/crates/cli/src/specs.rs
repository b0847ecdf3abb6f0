//! Flag encodings for partitioning schemes.
//!
//! ```text
//! schema      R/2,S/1
//! positions   1,3
//! link        S/2:1=1,2=2      (parent position = child position)
//! hash map    1=1,2=3          (dimension = position)
//! ```

use distcheck::schemes::ChainLink;
use distcheck::{Schema, Sym};

fn number(s: &str, what: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("invalid {what} `{}`", s.trim()))
}

fn relation(s: &str) -> Result<(Sym, usize), String> {
    let (name, arity) = s.split_once('/').ok_or_else(|| format!("expected NAME/ARITY, found `{s}`"))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(format!("invalid relation name `{name}`"));
    }
    Ok((Sym::new(name), number(arity, "arity")?))
}

pub fn schema(s: &str) -> Result<Schema, String> {
    let mut out = Schema::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (name, arity) = relation(item)?;
        if out.insert(name.clone(), arity).is_some_and(|a| a != arity) {
            return Err(format!("relation {name} listed with two arities"));
        }
    }
    Ok(out)
}

pub fn positions(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| number(t, "position")).collect()
}

/// `a=b` pairs separated by commas.
pub fn pairs(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (a, b) = t.split_once('=').ok_or_else(|| format!("expected A=B, found `{}`", t.trim()))?;
            Ok((number(a, "index")?, number(b, "position")?))
        })
        .collect()
}

pub fn link(s: &str) -> Result<ChainLink, String> {
    let (rel, join) = s.split_once(':').unwrap_or((s, ""));
    let (relation, arity) = relation(rel)?;
    Ok(ChainLink { relation, arity, join: pairs(join)? })
}
