//! Plain-text checkpoints. Layout is described in `docs/checkpoint.md`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{param_count, DgmParams};
use crate::error::{Error, Result};

const MAGIC: &str = "rkpinn-dgm";
const FORMAT_VERSION: u32 = 1;

pub fn write_checkpoint(p: &DgmParams, mut w: impl Write) -> Result<()> {
    p.validate()?;
    writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(w, "in_dim {}", p.in_dim)?;
    writeln!(w, "out_dim {}", p.out_dim)?;
    writeln!(w, "width {}", p.width)?;
    writeln!(w, "depth {}", p.depth)?;
    writeln!(w, "params {}", p.len())?;
    for b in p.blocks() {
        writeln!(w, "block {} {} {}", b.name, b.rows, b.cols)?;
        let vals = &p.theta[b.range];
        for row in vals.chunks(b.cols) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    writeln!(w, "end")?;
    Ok(())
}

pub fn save_checkpoint(p: &DgmParams, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(p, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<DgmParams> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Checkpoint {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        match (it.next(), it.next().map(str::parse::<usize>), it.next()) {
            (Some(k), Some(Ok(v)), None) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <n>`, found `{l}`"))),
        }
    }
}

pub fn read_checkpoint(r: impl Read) -> Result<DgmParams> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines(),
        line: 0,
    };
    let first = lines.next()?;
    let mut it = first.split_whitespace();
    if it.next() != Some(MAGIC) {
        return Err(lines.err("not an rkpinn-dgm checkpoint"));
    }
    match it.next().map(str::parse::<u32>) {
        Some(Ok(FORMAT_VERSION)) => {}
        other => return Err(lines.err(format!("unsupported format version {other:?}"))),
    }
    let in_dim = lines.header("in_dim")?;
    let out_dim = lines.header("out_dim")?;
    let width = lines.header("width")?;
    let depth = lines.header("depth")?;
    let n = lines.header("params")?;
    if in_dim == 0 || out_dim == 0 || width == 0 {
        return Err(lines.err("network dimensions must be positive"));
    }
    if n != param_count(in_dim, out_dim, width, depth) {
        return Err(lines.err(format!("parameter count {n} does not match the architecture")));
    }
    let mut p = DgmParams {
        in_dim,
        out_dim,
        width,
        depth,
        theta: vec![0.0; n],
    };
    for b in p.blocks() {
        let l = lines.next()?;
        let want = format!("block {} {} {}", b.name, b.rows, b.cols);
        if l.trim() != want {
            return Err(lines.err(format!("expected `{want}`, found `{l}`")));
        }
        for row in 0..b.rows {
            let l = lines.next()?;
            let vals: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| lines.err(format!("bad number: {e}")))?;
            if vals.len() != b.cols {
                return Err(lines.err(format!("expected {} values, found {}", b.cols, vals.len())));
            }
            let at = b.range.start + row * b.cols;
            p.theta[at..at + b.cols].copy_from_slice(&vals);
        }
    }
    if lines.next()?.trim() != "end" {
        return Err(lines.err("expected `end`"));
    }
    Ok(p)
}
