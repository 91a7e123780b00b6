use std::io::Write;

use cubli_core::plant::GravityModel;

use crate::config::Config;
use crate::error::CliError;

/// Derived quantities as `(name, value, unit)`.
pub fn derived_rows(config: &Config) -> Result<Vec<(&'static str, f64, &'static str)>, CliError> {
    let setup = config.setup()?;
    let dp = setup.plant.derived;
    let fp = setup.plant.friction;
    Ok(vec![
        ("d", dp.d, "m"),
        ("m_c", dp.m_c, "kg"),
        ("i_so", dp.i_so, "kg m^2"),
        ("i_wo", dp.i_wo, "kg m^2"),
        ("i_co", dp.i_co, "kg m^2"),
        ("i_co_bar", dp.i_co_bar, "kg m^2"),
        ("i_wg", dp.i_wg, "kg m^2"),
        ("gravity_moment", dp.gravity_moment, "N m"),
        ("gamma", dp.gamma, ""),
        ("delta", dp.delta, "s^-2"),
        (
            "omega0_paper_literal",
            dp.omega0(GravityModel::PaperLiteral),
            "rad/s",
        ),
        (
            "omega0_consistent",
            dp.omega0(GravityModel::Consistent),
            "rad/s",
        ),
        ("omega1", dp.omega1(&fp), "rad/s"),
        ("omega_n", setup.spec.omega_n, "rad/s"),
    ])
}

pub fn run(config: &Config, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = derived_rows(config)?;
    if json {
        let map: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(k, v, _)| (k.to_string(), serde_json::json!(v)))
            .collect();
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&map).map_err(|e| CliError::Io(e.to_string()))?
        )?;
    } else {
        super::write_table(out, &rows)?;
    }
    Ok(())
}
