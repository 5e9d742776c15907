//! Experiment harness behind the `icdr` binary: corpus generation, threat
//! injection, batch runs with CSV reporting, and the tuning sweeps.

pub mod batch;
pub mod config;
pub mod corpus;
pub mod inject;
pub mod sweep;

/// RFC 4180 field quoting: quote when the field contains a comma, a quote
/// or a line break; double embedded quotes.
pub fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') || value.contains('\r') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_rules() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
