//! The bundled reference channel.

use super::{io, Channel, Dmmac};

/// Row layout of the reference channel: eight Γ_Y rows then eight Γ_Z rows,
/// inputs `(x1, x2, x3)` in lexicographic order.
pub const REFERENCE_ROWS: &str = include_str!("../../assets/reference_mac.rows");

const REFERENCE_JSON: &str = include_str!("../../assets/reference_mac.json");

/// The reference three-user MAC with binary X3 and six-letter outputs.
pub fn reference_mac() -> Dmmac {
    match io::from_json_str(REFERENCE_JSON).expect("bundled asset parses") {
        Channel::Dmmac(c) => c,
        _ => unreachable!("bundled asset is a dmmac"),
    }
}

/// The bundled asset text, as written by the row importer.
pub fn reference_mac_json() -> &'static str {
    REFERENCE_JSON
}
