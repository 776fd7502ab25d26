use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::error::{Error, Result};
use crate::models::krr::KRR_LABEL;

/// A forecasting method of the benchmark suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Kernel ridge regression in the RBF-SVR slot.
    Krr,
    Gpr,
    Arima,
    Mlp,
    LstmDirect,
    /// Generative boosting with LSTMs at depth `depth`; `mi` selects the
    /// generator's training patients by mutual-information grouping.
    Glstm { depth: usize, mi: bool },
}

impl Method {
    /// Machine name used in configs and CSV (`glstm-g2-mi`, …).
    pub fn name(&self) -> String {
        match self {
            Method::Krr => "krr".into(),
            Method::Gpr => "gpr".into(),
            Method::Arima => "arima".into(),
            Method::Mlp => "mlp".into(),
            Method::LstmDirect => "lstm-direct".into(),
            Method::Glstm { depth, mi: false } => format!("glstm-g{depth}"),
            Method::Glstm { depth, mi: true } => format!("glstm-g{depth}-mi"),
        }
    }

    /// Row label used in the markdown table.
    pub fn label(&self) -> String {
        match self {
            Method::Krr => KRR_LABEL.into(),
            Method::Gpr => "GPR".into(),
            Method::Arima => "ARIMA".into(),
            Method::Mlp => "MLP".into(),
            Method::LstmDirect => "LSTM".into(),
            Method::Glstm { depth, mi: false } => format!("GLSTM-G{depth}"),
            Method::Glstm { depth, mi: true } => format!("GLSTM-G{depth}-MI"),
        }
    }

    pub fn parse(name: &str) -> Result<Method> {
        let unknown = || Error::invalid(format!("unknown method '{name}'"));
        Ok(match name {
            "krr" => Method::Krr,
            "gpr" => Method::Gpr,
            "arima" => Method::Arima,
            "mlp" => Method::Mlp,
            "lstm-direct" => Method::LstmDirect,
            _ => {
                let rest = name.strip_prefix("glstm-g").ok_or_else(unknown)?;
                let (digits, mi) = match rest.strip_suffix("-mi") {
                    Some(d) => (d, true),
                    None => (rest, false),
                };
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(unknown());
                }
                let depth: usize = digits.parse().map_err(|_| unknown())?;
                if depth == 0 {
                    return Err(Error::invalid(format!("'{name}': generative depth must be at least 1")));
                }
                Method::Glstm { depth, mi }
            }
        })
    }

    /// Number of leading horizons covered by generation (not scored).
    pub fn generated_depth(&self) -> usize {
        match self {
            Method::Glstm { depth, .. } => *depth,
            _ => 0,
        }
    }

    /// The default suite in table order.
    pub fn default_suite() -> alloc::vec::Vec<Method> {
        let mut v = alloc::vec![Method::Krr, Method::Gpr, Method::Arima, Method::LstmDirect];
        for mi in [false, true] {
            for depth in 1..=3 {
                v.push(Method::Glstm { depth, mi });
            }
        }
        v
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
