pub mod fit;
pub mod gains;
pub mod params;
pub mod simulate;
pub mod verify;

use std::io::Write;

/// Writes `name value unit` rows with aligned columns.
pub(crate) fn write_table(out: &mut dyn Write, rows: &[(&str, f64, &str)]) -> std::io::Result<()> {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, value, unit) in rows {
        writeln!(out, "{name:<width$}  {value:>14.6e}  {unit}")?;
    }
    Ok(())
}
