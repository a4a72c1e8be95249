//! SDPA sparse (`.dat-s`) text for relaxations.
//!
//! `y_0` is substituted by 1, leaving the other moments as the free
//! variables `x_1..x_m`; the PSD constraint `sum_k x_k F_k - F_0` has
//! `F_0 = -(y_0 coefficients)`. Comment lines starting with `*` carry the
//! cover, order, objective offset, variable exponents and block kinds so
//! that parsing recovers the full instance.

use std::fmt::Write as _;

use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::scalar::Real;

use super::{BlockKind, SdpBlock, SdpInstance};

pub fn emit_sdpa<T: Real>(inst: &SdpInstance<T>) -> String {
    let mut out = String::new();
    let cliques: Vec<String> = inst
        .cover
        .to_one_based()
        .iter()
        .map(|c| {
            c.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    writeln!(out, "* sparse moment relaxation").unwrap();
    writeln!(out, "* n {}", inst.cover.n()).unwrap();
    writeln!(out, "* omega {}", inst.omega).unwrap();
    writeln!(out, "* cliques {}", cliques.join(" ")).unwrap();
    writeln!(out, "* offset {}", inst.objective[0]).unwrap();
    for (k, a) in inst.variables.iter().enumerate().skip(1) {
        let e: Vec<String> = a.exponents().iter().map(|v| v.to_string()).collect();
        writeln!(out, "* variable {k} {}", e.join(" ")).unwrap();
    }
    for (b, block) in inst.blocks.iter().enumerate() {
        match block.kind {
            BlockKind::Moment { clique } => {
                writeln!(out, "* block {} moment {}", b + 1, clique + 1)
            }
            BlockKind::Localizing { clique, constraint } => writeln!(
                out,
                "* block {} localizing {} {}",
                b + 1,
                clique + 1,
                constraint + 1
            ),
        }
        .unwrap();
    }
    writeln!(out, "{}", inst.variables.len() - 1).unwrap();
    writeln!(out, "{}", inst.blocks.len()).unwrap();
    let sizes: Vec<String> = inst.blocks.iter().map(|b| b.size.to_string()).collect();
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let costs: Vec<String> = inst.objective[1..].iter().map(|c| c.to_string()).collect();
    writeln!(out, "{}", costs.join(" ")).unwrap();

    let mut lines: Vec<(usize, usize, usize, usize, T)> = inst
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(b, block)| {
            block
                .entries
                .iter()
                .map(move |&(k, i, j, c)| (k, b, i, j, c))
        })
        .collect();
    lines.sort_by_key(|x| (x.0, x.1, x.2, x.3));
    for (k, b, i, j, c) in lines {
        let value = if k == 0 { -c } else { c };
        writeln!(out, "{k} {} {} {} {value}", b + 1, i + 1, j + 1).unwrap();
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: Real>(line: usize, s: &str) -> Result<T> {
    s.parse::<f64>()
        .map(T::of)
        .map_err(|_| perr(line, format!("bad number {s:?}")))
}

fn int(line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| perr(line, format!("bad integer {s:?}")))
}

/// Parses text produced by [`emit_sdpa`].
pub fn parse_sdpa<T: Real>(text: &str) -> Result<SdpInstance<T>> {
    let mut n = None;
    let mut omega = None;
    let mut cliques: Option<Vec<Vec<usize>>> = None;
    let mut offset = None;
    let mut variables: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut kinds: Vec<(usize, BlockKind)> = Vec::new();
    let mut body: Vec<(usize, &str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('*') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.as_slice() {
                ["n", v] => n = Some(int(line, v)?),
                ["omega", v] => omega = Some(int(line, v)? as u32),
                ["cliques", cs @ ..] => {
                    cliques = Some(
                        cs.iter()
                            .map(|c| c.split(',').map(|v| int(line, v)).collect())
                            .collect::<Result<_>>()?,
                    )
                }
                ["offset", v] => offset = Some(num::<T>(line, v)?),
                ["variable", k, es @ ..] => variables.push((
                    int(line, k)?,
                    es.iter()
                        .map(|e| int(line, e).map(|v| v as u32))
                        .collect::<Result<_>>()?,
                )),
                ["block", b, "moment", c] => kinds.push((
                    int(line, b)?,
                    BlockKind::Moment {
                        clique: int(line, c)? - 1,
                    },
                )),
                ["block", b, "localizing", c, g] => kinds.push((
                    int(line, b)?,
                    BlockKind::Localizing {
                        clique: int(line, c)? - 1,
                        constraint: int(line, g)? - 1,
                    },
                )),
                _ => {}
            }
            continue;
        }
        body.push((line, t));
    }

    let n = n.ok_or_else(|| perr(0, "missing '* n' header"))?;
    let omega = omega.ok_or_else(|| perr(0, "missing '* omega' header"))?;
    let cliques = cliques.ok_or_else(|| perr(0, "missing '* cliques' header"))?;
    let offset = offset.ok_or_else(|| perr(0, "missing '* offset' header"))?;
    let cover = CliqueCover::from_one_based(n, cliques)?;

    let mut it = body.into_iter();
    let (l, mdim) = it.next().ok_or_else(|| perr(0, "missing mDIM"))?;
    let mdim = int(l, mdim)?;
    let (l, nblock) = it.next().ok_or_else(|| perr(0, "missing nBLOCK"))?;
    let nblock = int(l, nblock)?;
    let (l, sizes) = it
        .next()
        .ok_or_else(|| perr(0, "missing block structure"))?;
    let sizes: Vec<usize> = sizes
        .split_whitespace()
        .map(|s| int(l, s.trim_start_matches('-')))
        .collect::<Result<_>>()?;
    if sizes.len() != nblock {
        return Err(perr(
            l,
            format!("expected {nblock} block sizes, got {}", sizes.len()),
        ));
    }
    let mut objective = vec![offset];
    if mdim > 0 {
        let (l, costs) = it.next().ok_or_else(|| perr(0, "missing objective"))?;
        for c in costs.split_whitespace() {
            objective.push(num(l, c)?);
        }
        if objective.len() != mdim + 1 {
            return Err(perr(
                l,
                format!("expected {mdim} costs, got {}", objective.len() - 1),
            ));
        }
    }

    if variables.len() != mdim {
        return Err(perr(
            0,
            format!("expected {mdim} variable headers, got {}", variables.len()),
        ));
    }
    let mut labels = vec![MultiIndex::zeros(n)];
    for (pos, (k, e)) in variables.into_iter().enumerate() {
        if k != pos + 1 || e.len() != n {
            return Err(perr(0, format!("malformed variable header {k}")));
        }
        labels.push(MultiIndex::new(e));
    }
    if kinds.len() != nblock || kinds.iter().enumerate().any(|(p, (b, _))| *b != p + 1) {
        return Err(perr(0, "block headers do not match nBLOCK"));
    }

    let mut blocks: Vec<SdpBlock<T>> = kinds
        .into_iter()
        .zip(&sizes)
        .map(|((_, kind), &size)| SdpBlock {
            kind,
            size,
            entries: Vec::new(),
        })
        .collect();
    for (l, entry) in it {
        let w: Vec<&str> = entry.split_whitespace().collect();
        if w.len() != 5 {
            return Err(perr(l, "expected 'matno block i j value'"));
        }
        let k = int(l, w[0])?;
        let b = int(l, w[1])?;
        let i = int(l, w[2])?;
        let j = int(l, w[3])?;
        let v: T = num(l, w[4])?;
        if k > mdim || b == 0 || b > nblock || i == 0 || j == 0 || i > j || j > sizes[b - 1] {
            return Err(perr(l, "entry out of range"));
        }
        let c = if k == 0 { -v } else { v };
        blocks[b - 1].entries.push((k, i - 1, j - 1, c));
    }
    for b in &mut blocks {
        b.entries.sort_by_key(|x| (x.0, x.1, x.2));
    }
    Ok(SdpInstance {
        cover,
        omega,
        variables: labels,
        objective,
        blocks,
    })
}
