//! Human-readable and structured renderings of certificates.

use std::collections::HashMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Certificate, Property, Rule};
use crate::space::Tristate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplainFormat {
    Text,
    Json,
}

impl FromStr for ExplainFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ExplainFormat::Text),
            "json" => Ok(ExplainFormat::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingLeaf {
    pub subject: String,
    pub property: Property,
}

/// Top-level certificate file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub schema_version: u32,
    pub verdict: Tristate,
    #[serde(default)]
    pub blocked_by: Vec<BlockingLeaf>,
    pub certificate: Certificate,
}

impl CertificateDocument {
    pub fn new(cert: &Certificate) -> Self {
        CertificateDocument {
            schema_version: 1,
            verdict: cert.verdict(),
            blocked_by: cert
                .blocking_leaves()
                .into_iter()
                .map(|(subject, property)| BlockingLeaf { subject, property })
                .collect(),
            certificate: cert.clone(),
        }
    }
}

pub fn explain(cert: &Certificate, format: ExplainFormat) -> String {
    match format {
        ExplainFormat::Json => {
            let mut s = serde_json::to_string_pretty(&CertificateDocument::new(cert)).expect("certificates serialize");
            s.push('\n');
            s
        }
        ExplainFormat::Text => render_text(cert),
    }
}

fn describe(c: &Certificate) -> String {
    let mut line = format!(
        "[{}] {}({}) by {}",
        c.claim.verdict, c.claim.property, c.claim.subject, c.rule
    );
    if let Some(case) = c.case {
        let _ = write!(line, " ({case})");
    }
    if c.divisorial {
        line.push_str(" [divisorial: identity]");
    }
    match c.rule {
        Rule::AtomFact => {
            if let Some(a) = &c.atom {
                let _ = write!(
                    line,
                    ": atom {} asserts ordinary={}{}, hodge_witt={}{}",
                    a.name,
                    a.facts.ordinary,
                    if a.facts.ordinary_derived { " (from hodge_witt)" } else { "" },
                    a.facts.hodge_witt,
                    if a.facts.hodge_witt_derived { " (from ordinary)" } else { "" },
                );
            }
        }
        Rule::EmptyOrdinary => line.push_str(": convention, the empty scheme is ordinary"),
        Rule::PointOrdinary => line.push_str(": convention, a point is ordinary"),
        _ => {}
    }
    line
}

fn render_text(root: &Certificate) -> String {
    let mut out = String::new();
    let mut labels: HashMap<*const Certificate, usize> = HashMap::new();
    let mut stack: Vec<(&Certificate, usize)> = vec![(root, 0)];
    while let Some((c, depth)) = stack.pop() {
        let indent = "  ".repeat(depth);
        let ptr = c as *const Certificate;
        if let Some(n) = labels.get(&ptr) {
            let _ = writeln!(out, "{indent}[{}] {}({}): see #{n}", c.claim.verdict, c.claim.property, c.claim.subject);
            continue;
        }
        let n = labels.len() + 1;
        labels.insert(ptr, n);
        let _ = writeln!(out, "{indent}#{n} {}", describe(c));
        for p in c.premises.iter().rev() {
            stack.push((p.as_ref(), depth + 1));
        }
    }
    let blocked = root.blocking_leaves();
    if !blocked.is_empty() {
        out.push_str("blocked by:\n");
        for (subject, property) in blocked {
            let _ = writeln!(out, "  {property}({subject})");
        }
    }
    out
}
