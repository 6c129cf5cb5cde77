//! Versioned CSV writing (atomic) and reading.
//!
//! Every file starts with `# stargraph-csv/1 <schema>` followed by a column
//! header.  Floats are shortest-round-trip formatted, so outputs are
//! byte-stable for a given configuration and seed.

use anyhow::Context;
use stargraph_core::limitdist::CdfTable;
use stargraph_core::scars::ScarCertificate;
use stargraph_core::spectrum::EigenvalueRecord;
use stargraph_core::wavefunction::IndicatorElement;
use std::path::Path;

pub const FORMAT_TAG: &str = "# stargraph-csv/1";

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {dir:?}"))?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).with_context(|| format!("writing {tmp:?}"))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {path:?}"))?;
    Ok(())
}

pub fn spectrum_csv(records: &[EigenvalueRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 48 + 64);
    s.push_str(FORMAT_TAG);
    s.push_str(" spectrum\nn,k,residual,left_pole_bond,right_pole_bond\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.k, r.z_residual, r.left_pole.bond, r.right_pole.bond
        ));
    }
    s
}

pub fn matrix_elements_csv(rows: &[(u64, f64, IndicatorElement)]) -> String {
    let mut s = String::with_capacity(rows.len() * 48 + 64);
    s.push_str(FORMAT_TAG);
    s.push_str(" matrix-elements\nn,k,me_exact,me_leading\n");
    for (n, k, me) in rows {
        s.push_str(&format!("{},{},{},{}\n", n, k, me.exact, me.leading));
    }
    s
}

pub fn cdf_csv(table: &CdfTable) -> String {
    let mut s = String::with_capacity(table.rs.len() * 40 + 64);
    s.push_str(FORMAT_TAG);
    s.push_str(" limit-cdf\nR,F,err_estimate\n");
    for i in 0..table.rs.len() {
        s.push_str(&format!("{},{},{}\n", table.rs[i], table.fs[i], table.errs[i]));
    }
    s
}

pub fn read_cdf_csv(path: &Path) -> anyhow::Result<CdfTable> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    let mut rs = Vec::new();
    let mut fs = Vec::new();
    let mut errs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('R') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            anyhow::bail!("{path:?}:{}: expected R,F,err_estimate", i + 1);
        }
        rs.push(cols[0].parse::<f64>().with_context(|| format!("{path:?}:{}", i + 1))?);
        fs.push(cols[1].parse::<f64>()?);
        errs.push(cols[2].parse::<f64>()?);
    }
    if rs.is_empty() {
        anyhow::bail!("{path:?}: no data rows");
    }
    Ok(CdfTable::from_values(rs, fs, errs))
}

pub fn scars_csv(certs: &[ScarCertificate]) -> String {
    let mut s = String::new();
    s.push_str(FORMAT_TAG);
    s.push_str(" scars\nr,epsilon,n,k,sec2_i1,sec2_i2,sec2_max_other,ratio,mass,residual\n");
    for (i, c) in certs.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            i + 1,
            c.epsilon,
            c.n_spectral,
            c.k,
            c.sec2_i1,
            c.sec2_i2,
            c.sec2_max_other,
            c.sec2_ratio,
            c.mass,
            c.z_residual
        ));
    }
    s
}

pub fn fig6_deviation_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut s = String::new();
    s.push_str(FORMAT_TAG);
    s.push_str(" fig6-deviations\nv,R,deviation\n");
    for (v, r, d) in rows {
        s.push_str(&format!("{},{},{}\n", v, r, d));
    }
    s
}
