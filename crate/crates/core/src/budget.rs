//! Size guards enforced before any exponential allocation.

use crate::error::{Error, Result};

/// Environment variable holding budget overrides, e.g.
/// `TREECUT_BUDGET="oracle_vertices=24,lp_set_size=20"`. A bare integer sets
/// every vertex-count budget at once.
pub const BUDGET_ENV: &str = "TREECUT_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets {
    /// Largest instance handed to the exact treewidth DP.
    pub decomposition_vertices: usize,
    /// Largest instance handed to cut enumeration.
    pub oracle_vertices: usize,
    /// Largest vertex set allowed in the pared Sherali-Adams family.
    pub lp_set_size: usize,
    /// Cap on `3^r * C(n, r)` for the full Sherali-Adams polytope.
    pub full_sa_terms: u64,
    /// Cap on the number of LP variables of any generated program.
    pub lp_variables: usize,
    /// Cap on vertices of generated (powered / gadget) instances.
    pub generated_vertices: usize,
    /// Largest hypercube dimension for the label-cover gadget.
    pub gadget_dimension: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            decomposition_vertices: 18,
            oracle_vertices: 26,
            lp_set_size: 22,
            full_sa_terms: 1_000_000,
            lp_variables: 200_000,
            generated_vertices: 2_000_000,
            gadget_dimension: 6,
        }
    }
}

impl Budgets {
    /// Defaults overridden by `TREECUT_BUDGET` when present.
    pub fn from_env() -> Result<Self> {
        let mut b = Budgets::default();
        if let Ok(spec) = std::env::var(BUDGET_ENV) {
            b.apply(&spec)?;
        }
        Ok(b)
    }

    pub fn apply(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                None => {
                    let v = parse_usize(item)?;
                    self.decomposition_vertices = v;
                    self.oracle_vertices = v;
                    self.generated_vertices = self.generated_vertices.max(v);
                }
                Some((key, value)) => {
                    let v = parse_usize(value)?;
                    match key.trim() {
                        "decomposition_vertices" => self.decomposition_vertices = v,
                        "oracle_vertices" => self.oracle_vertices = v,
                        "lp_set_size" => self.lp_set_size = v,
                        "full_sa_terms" => self.full_sa_terms = v as u64,
                        "lp_variables" => self.lp_variables = v,
                        "generated_vertices" => self.generated_vertices = v,
                        "gadget_dimension" => self.gadget_dimension = v,
                        other => {
                            return Err(Error::invalid(format!("unknown budget key `{other}`")))
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad budget value `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut b = Budgets::default();
        b.apply("oracle_vertices=12, lp_set_size=9").unwrap();
        assert_eq!(b.oracle_vertices, 12);
        assert_eq!(b.lp_set_size, 9);
        b.apply("20").unwrap();
        assert_eq!(b.decomposition_vertices, 20);
        assert!(b.apply("nonsense=1").is_err());
    }
}
