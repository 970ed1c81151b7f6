//! Coefficient dumps and tabular exports.
//!
//! Dumps are plain text with a fixed header carrying `(N, seed, eps,
//! convention-version)` so a realization can be reloaded bit-exactly and
//! tied to the normalization conventions that produced it.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::noise::EnhancedNoise;
use crate::spectrum::Spectrum;
use crate::CONVENTION_VERSION;

const DUMP_MAGIC: &str = "anderson-coefficient-dump";

fn write_field_block(out: &mut impl Write, name: &str, field: &Field) -> Result<()> {
    writeln!(out, "field {name}")?;
    let g = field.grid();
    for idx in 0..g.bins() {
        let c = field.coeffs()[idx];
        if c != Complex64::default() {
            let (fx, fy) = g.freq_pair(idx);
            writeln!(out, "{fx} {fy} {:.17e} {:.17e}", c.re, c.im)?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

/// Export one enhanced-noise realization.
pub fn write_enhanced_dump(path: &Path, en: &EnhancedNoise) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{DUMP_MAGIC} v{CONVENTION_VERSION}")?;
    writeln!(
        out,
        "n={} seed={} eps={:.17e} c_eps={:.17e}",
        en.grid().size(),
        en.seed,
        en.eps,
        en.c_eps
    )?;
    write_field_block(&mut out, "xi_eps", &en.xi_eps)?;
    write_field_block(&mut out, "x1", &en.x1)?;
    write_field_block(&mut out, "x2", &en.x2)?;
    write_field_block(&mut out, "wick_resonant", &en.wick_resonant)?;
    Ok(())
}

/// Reload a realization written by [`write_enhanced_dump`].
pub fn read_enhanced_dump(path: &Path) -> Result<EnhancedNoise> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::MalformedDump("empty file".into()))??;
    let expected = format!("{DUMP_MAGIC} v{CONVENTION_VERSION}");
    if header.trim() != expected {
        return Err(CoreError::MalformedDump(format!(
            "bad header {header:?}, expected {expected:?}"
        )));
    }
    let meta = lines
        .next()
        .ok_or_else(|| CoreError::MalformedDump("missing metadata line".into()))??;
    let mut n = None;
    let mut seed = None;
    let mut eps = None;
    let mut c_eps = None;
    for tok in meta.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| CoreError::MalformedDump(format!("bad metadata token {tok:?}")))?;
        match key {
            "n" => n = Some(val.parse::<usize>().map_err(|e| CoreError::MalformedDump(e.to_string()))?),
            "seed" => seed = Some(val.parse::<u64>().map_err(|e| CoreError::MalformedDump(e.to_string()))?),
            "eps" => eps = Some(val.parse::<f64>().map_err(|e| CoreError::MalformedDump(e.to_string()))?),
            "c_eps" => c_eps = Some(val.parse::<f64>().map_err(|e| CoreError::MalformedDump(e.to_string()))?),
            other => return Err(CoreError::MalformedDump(format!("unknown metadata key {other:?}"))),
        }
    }
    let grid = Grid::new(n.ok_or_else(|| CoreError::MalformedDump("missing n".into()))?)?;
    let seed = seed.ok_or_else(|| CoreError::MalformedDump("missing seed".into()))?;
    let eps = eps.ok_or_else(|| CoreError::MalformedDump("missing eps".into()))?;
    let c_eps = c_eps.ok_or_else(|| CoreError::MalformedDump("missing c_eps".into()))?;

    let mut fields: Vec<(String, Field)> = Vec::new();
    let mut current: Option<(String, Vec<Complex64>)> = None;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("field ") {
            if current.is_some() {
                return Err(CoreError::MalformedDump("nested field block".into()));
            }
            current = Some((name.to_string(), vec![Complex64::default(); grid.bins()]));
        } else if line == "end" {
            let (name, coeffs) = current
                .take()
                .ok_or_else(|| CoreError::MalformedDump("stray end".into()))?;
            let mut f = Field::from_coeffs(grid, coeffs, false)?;
            if f.realness_defect() < 1e-12 {
                f.symmetrize_real();
            }
            fields.push((name, f));
        } else {
            let (_, coeffs) = current
                .as_mut()
                .ok_or_else(|| CoreError::MalformedDump(format!("data outside a field block: {line:?}")))?;
            let mut it = line.split_whitespace();
            let fx: i64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::MalformedDump(format!("bad line {line:?}")))?;
            let fy: i64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::MalformedDump(format!("bad line {line:?}")))?;
            let re: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::MalformedDump(format!("bad line {line:?}")))?;
            let im: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::MalformedDump(format!("bad line {line:?}")))?;
            coeffs[grid.index(fx, fy)] = Complex64::new(re, im);
        }
    }
    if current.is_some() {
        return Err(CoreError::MalformedDump("unterminated field block".into()));
    }
    let take = |name: &str| -> Result<Field> {
        fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| CoreError::MalformedDump(format!("missing field {name:?}")))
    };
    Ok(EnhancedNoise {
        seed,
        eps,
        c_eps,
        xi_eps: take("xi_eps")?,
        x1: take("x1")?,
        x2: take("x2")?,
        wick_resonant: take("wick_resonant")?,
    })
}

/// Spectrum table: one row per eigenpair with `L^q` norms of the
/// eigenfunction.
pub fn spectrum_csv(spec: &Spectrum) -> Result<String> {
    let mut out = String::from("n,lambda,residual,l2norm,l4norm,l6norm\n");
    for i in 0..spec.len() {
        let e = &spec.eigenvectors[i];
        out.push_str(&format!(
            "{},{:.17e},{:.3e},{:.12e},{:.12e},{:.12e}\n",
            i + 1,
            spec.eigenvalues[i],
            spec.residuals[i],
            e.l2_norm(),
            e.lq_norm(4.0)?,
            e.lq_norm(6.0)?,
        ));
    }
    Ok(out)
}

/// Coefficient dump of one field (eigenvector export).
pub fn write_field_dump(path: &Path, name: &str, field: &Field) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{DUMP_MAGIC} v{CONVENTION_VERSION}")?;
    writeln!(out, "n={} seed=0 eps=0e0 c_eps=0e0", field.grid().size())?;
    write_field_block(&mut out, name, field)?;
    Ok(())
}
