//! JSON result records.
//!
//! A record is an object with keys `command`, `inputs_digest` (hex SHA-256
//! over the canonical mesh, chain and parameters), `outputs` and
//! `timing_ms`. Rationals are `{"exact": "p/q", "decimal": x}`; chains are
//! lists of `{"simplex": [vertex ids], "coeff": c}` in simplex index order.
//! Failures produce `{"command", "error": {"kind", "message"}, "exit_code"}`.

use flatnorm::complex::{Chain, SimplicialComplex};
use flatnorm::deform::RetractionTrace;
use flatnorm::exact::{format_rational, to_f64};
use flatnorm::msfn::{Breakpoint, MsfnResult, Sweep};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub inputs_digest: String,
    pub outputs: Value,
    pub timing_ms: f64,
}

impl ResultRecord {
    /// The record without its timing, for reproducibility checks.
    pub fn stable(&self) -> Value {
        json!({ "command": self.command, "inputs_digest": self.inputs_digest, "outputs": self.outputs })
    }
}

/// Length-prefixed sections hashed in order.
#[derive(Debug, Clone, Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        for part in [label.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn add_complex(&mut self, k: &SimplicialComplex) -> &mut Self {
        let mut bytes = Vec::new();
        for s in k.maximal_simplices() {
            bytes.extend((s.len() as u64).to_le_bytes());
            s.iter().for_each(|v| bytes.extend((*v as u64).to_le_bytes()));
        }
        for c in k.coords().unwrap_or(&[]) {
            c.iter().for_each(|x| bytes.extend(x.to_bits().to_le_bytes()));
        }
        self.add("complex", &bytes)
    }

    pub fn add_chain(&mut self, chain: &Chain) -> &mut Self {
        let mut bytes = (chain.dim() as u64).to_le_bytes().to_vec();
        for (i, c) in chain.iter() {
            bytes.extend((i as u64).to_le_bytes());
            bytes.extend(c.to_le_bytes());
        }
        self.add("chain", &bytes)
    }

    pub fn hex(&self) -> String {
        self.0.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn rational(r: &BigRational) -> Value {
    json!({ "exact": format_rational(r), "decimal": to_f64(r) })
}

pub fn chain(k: &SimplicialComplex, c: &Chain) -> Value {
    Value::Array(c.iter().map(|(i, v)| json!({ "simplex": k.simplex(c.dim(), i), "coeff": v })).collect())
}

pub fn msfn_result(k: &SimplicialComplex, lambda: &BigRational, r: &MsfnResult) -> Value {
    json!({
        "lambda": rational(lambda),
        "flat_norm": rational(&r.flat_norm),
        "x_mass": rational(&r.x_mass),
        "s_mass": rational(&r.s_mass),
        "lp_objective": rational(&r.lp_objective),
        "lp_was_integral": r.lp_was_integral,
        "solver_path": r.solver_path,
        "lp_method": r.lp_method,
        "proven_optimal": r.proven_optimal,
        "node_count": r.node_count,
        "x": chain(k, &r.x),
        "s": chain(k, &r.s),
    })
}

fn breakpoint(b: &Breakpoint) -> Value {
    json!({
        "lower": rational(&b.lower),
        "upper": rational(&b.upper),
        "crossing": b.crossing.as_ref().map(rational),
        "verified": b.verified,
    })
}

pub fn sweep(k: &SimplicialComplex, s: &Sweep) -> Value {
    json!({
        "points": s.points.iter().map(|(l, r)| msfn_result(k, l, r)).collect::<Vec<_>>(),
        "breakpoints": s.breakpoints.iter().map(breakpoint).collect::<Vec<_>>(),
    })
}

pub fn retraction(k: &SimplicialComplex, t: &RetractionTrace) -> Value {
    json!({
        "snapped": chain(k, &t.snapped),
        "mass_before": t.mass_before,
        "mass_pushed": t.mass_pushed,
        "mass_after": t.mass_after,
        "per_level": t.per_level,
        "resamples": t.resamples,
        "bound_factor": t.bound_factor,
        "within_bound": t.within_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use flatnorm::exact::rat;
    use flatnorm::fixtures::square;

    #[test]
    fn rationals_and_chains() {
        assert_eq!(rational(&rat(3, 2)), json!({ "exact": "3/2", "decimal": 1.5 }));
        let k = square();
        let c = Chain::from_pairs(1, [(k.index_of(&[0, 1]).unwrap(), -2)]);
        assert_eq!(chain(&k, &c), json!([{ "simplex": [0, 1], "coeff": -2 }]));
    }

    #[test]
    fn digest_separates_sections() {
        let a = InputDigest::new().add("a", b"bc").hex();
        let b = InputDigest::new().add("ab", b"c").hex();
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
        let k = square();
        assert_eq!(InputDigest::new().add_complex(&k).hex(), InputDigest::new().add_complex(&square()).hex());
    }
}
