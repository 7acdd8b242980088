//! Imports the bundled row list, checks the regularity conditions and prints
//! the canonical JSON form.

use covertmac::channel::{from_rows_text, reference::REFERENCE_ROWS, to_json_string, Channel};

fn main() -> covertmac::Result<()> {
    let ch = from_rows_text(REFERENCE_ROWS, false)?;
    let report = ch.validate();
    if report.is_admissible() {
        println!("admissible");
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
    }
    let json = to_json_string(&Channel::Dmmac(ch));
    println!("{} bytes of canonical JSON", json.len());
    Ok(())
}
