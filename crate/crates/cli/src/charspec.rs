//! Character specifications: `{"modulus":N,"conrey":j}` or
//! `{"modulus":N,"components":[{"prime":p,"exponent":a,"gen_values":[..]}]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hecke_core::arith::chars::Component;
use hecke_core::arith::{DirChar, PChar};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharSpec {
    Conrey { modulus: u64, conrey: u64 },
    Components { modulus: u64, components: Vec<Component> },
}

impl CharSpec {
    /// Parse inline JSON, or read it from a file when the argument is not JSON.
    pub fn parse_arg(arg: &str) -> Result<Self> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Input(format!("cannot read character spec {arg}: {e}")))?
        };
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed character spec: {e}")))
    }

    pub fn modulus(&self) -> u64 {
        match self {
            CharSpec::Conrey { modulus, .. } | CharSpec::Components { modulus, .. } => *modulus,
        }
    }

    pub fn to_dirichlet(&self) -> Result<DirChar> {
        let chi = match self {
            CharSpec::Conrey { modulus, conrey } => DirChar::from_conrey(*modulus, *conrey),
            CharSpec::Components { modulus, components } => DirChar::from_components(*modulus, components.clone()),
        };
        chi.map_err(|e| CliError::Input(format!("invalid character: {e}")))
    }

    /// The character as a character of (Z/p^n)^x; the modulus must be p^n.
    pub fn to_local(&self, p: u64, n: u32) -> Result<(u64, PChar)> {
        let q = p
            .checked_pow(n)
            .ok_or_else(|| CliError::Input(format!("{p}^{n} overflows")))?;
        if self.modulus() != q {
            return Err(CliError::Input(format!(
                "character modulus {} differs from p^n = {q}",
                self.modulus()
            )));
        }
        let chi = self.to_dirichlet()?;
        let local = PChar::from_dirichlet(&chi).map_err(|e| CliError::Input(format!("invalid character: {e}")))?;
        Ok((chi.conrey_label(), local))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_forms_agree() {
        let a = CharSpec::parse_arg(r#"{"modulus":9,"conrey":4}"#).unwrap();
        let chi = a.to_dirichlet().unwrap();
        let b = CharSpec::Components {
            modulus: 9,
            components: chi.components().to_vec(),
        };
        assert_eq!(b.to_dirichlet().unwrap(), chi);
        assert_eq!(a.to_local(3, 2).unwrap().0, 4);
    }

    #[test]
    fn wrong_modulus_rejected() {
        let a = CharSpec::parse_arg(r#"{"modulus":9,"conrey":4}"#).unwrap();
        assert!(a.to_local(3, 3).is_err());
        assert!(CharSpec::parse_arg("{\"modulus\":9}").is_err());
    }
}
