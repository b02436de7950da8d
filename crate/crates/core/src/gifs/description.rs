//! JSON system descriptions shared by the CLI and the examples.
//!
//! ```json
//! {"kind": "gifs_inf",
//!  "maps": [{"kind": "address_transformer", "prefix": [1], "declared_bound": 0.5}],
//!  "domain": {"tree_path": "tree.json", "dim": 1}}
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::balanced::CellTree;
use crate::error::{GifsError, Result};
use crate::metric::CompactNet;

use super::ifs::{AffineParams, AffineTupleParams, GifsMap, GifsSystem, IfsMap, IfsSystem};
use super::inf::{GifsInfMap, GifsInfSystem, InfMapKind, TreeDomain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfMapDescription {
    #[serde(flatten)]
    pub kind: InfMapKind,
    pub declared_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<CellTree>,
    /// Resolved against the description file's directory when relative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_path: Option<PathBuf>,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<CompactNet>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemDescription {
    Ifs {
        maps: Vec<AffineParams>,
    },
    Gifs {
        order: usize,
        maps: Vec<AffineTupleParams>,
    },
    GifsInf {
        maps: Vec<InfMapDescription>,
        domain: DomainDescription,
        /// Facts that hold by argument rather than by computation.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        notes: Vec<String>,
    },
}

#[derive(Clone, Debug)]
pub enum LoadedSystem {
    Ifs(IfsSystem),
    Gifs(GifsSystem),
    GifsInf(GifsInfSystem),
}

impl LoadedSystem {
    pub fn contraction(&self) -> f64 {
        match self {
            LoadedSystem::Ifs(s) => s.contraction(),
            LoadedSystem::Gifs(s) => s.contraction(),
            LoadedSystem::GifsInf(s) => s.contraction(),
        }
    }
}

impl SystemDescription {
    /// Description of an infinite-order system with its tree inlined.
    pub fn of_inf(sys: &GifsInfSystem, notes: Vec<String>) -> Self {
        let dom = sys.domain();
        SystemDescription::GifsInf {
            maps: sys
                .maps()
                .iter()
                .map(|f| InfMapDescription {
                    kind: f.kind().clone(),
                    declared_bound: f.declared_bound(),
                })
                .collect(),
            domain: DomainDescription {
                tree: Some(dom.tree().clone()),
                tree_path: None,
                dim: dom.dim(),
                extra: dom.extra().cloned(),
            },
            notes,
        }
    }

    pub fn of_ifs(sys: &IfsSystem) -> Result<Self> {
        let maps = sys
            .maps()
            .iter()
            .map(|m| m.params().cloned().ok_or_else(|| unserializable(m.name())))
            .collect::<Result<_>>()?;
        Ok(SystemDescription::Ifs { maps })
    }

    pub fn of_gifs(sys: &GifsSystem) -> Result<Self> {
        let maps = sys
            .maps()
            .iter()
            .map(|m| m.params().cloned().ok_or_else(|| unserializable(m.name())))
            .collect::<Result<_>>()?;
        Ok(SystemDescription::Gifs {
            order: sys.order(),
            maps,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Builds the system; relative tree paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<LoadedSystem> {
        match self {
            SystemDescription::Ifs { maps } => Ok(LoadedSystem::Ifs(IfsSystem::new(
                maps.iter().cloned().map(IfsMap::affine).collect(),
            )?)),
            SystemDescription::Gifs { order, maps } => Ok(LoadedSystem::Gifs(GifsSystem::new(
                *order,
                maps.iter().cloned().map(GifsMap::affine).collect(),
            )?)),
            SystemDescription::GifsInf { maps, domain, .. } => {
                let tree = match (&domain.tree, &domain.tree_path) {
                    (Some(t), _) => t.clone(),
                    (None, Some(p)) => {
                        let path = match base {
                            Some(b) if p.is_relative() => b.join(p),
                            _ => p.clone(),
                        };
                        CellTree::load(&path)?
                    }
                    (None, None) => return Err(GifsError::Parse("domain needs a tree or a tree_path".into())),
                };
                let dom = TreeDomain::new(tree, domain.dim, domain.extra.clone())?;
                let maps = maps
                    .iter()
                    .map(|m| GifsInfMap::from_kind(&dom, m.kind.clone(), m.declared_bound))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedSystem::GifsInf(GifsInfSystem::new(dom, maps)?))
            }
        }
    }
}

fn unserializable(name: &str) -> GifsError {
    GifsError::Unsupported(format!("map {name} is a closure without a serializable form"))
}

/// Reads and builds a system description file.
pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    let desc = SystemDescription::from_json(&std::fs::read_to_string(path)?)?;
    desc.build(path.parent())
}

/// Stable snake-case name of a map kind.
pub fn kind_label(kind: &InfMapKind) -> &'static str {
    match kind {
        InfMapKind::AddressTransformer { .. } => "address_transformer",
        InfMapKind::Piecewise { .. } => "piecewise",
        InfMapKind::Constant { .. } => "constant",
        InfMapKind::Extended { .. } => "extended",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::ArityProfile;
    use crate::balanced::build_balanced_set;
    use crate::gifs::witness::{build_union_system, build_witness_system};
    use crate::metric::{Interval, Point};

    fn tree() -> CellTree {
        build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(0.0, 1.0)).unwrap()
    }

    #[test]
    fn inf_round_trip() {
        let p = CompactNet::exact(vec![Point::scalar(5.0)]).unwrap();
        let sys = build_union_system(&tree(), &p, 0.3).unwrap();
        let desc = SystemDescription::of_inf(&sys, vec![]);
        let back = SystemDescription::from_json(&desc.to_json().unwrap()).unwrap();
        assert_eq!(back, desc);
        let LoadedSystem::GifsInf(rebuilt) = back.build(None).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(rebuilt.maps().len(), 5);
        assert_eq!(rebuilt.contraction(), sys.contraction());
    }

    #[test]
    fn tree_path_resolves_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("tree.json"), tree().to_json().unwrap()).unwrap();
        let json = r#"{"kind":"gifs_inf","maps":[{"kind":"address_transformer","prefix":[1],"declared_bound":0.5}],
                       "domain":{"tree_path":"tree.json"}}"#;
        std::fs::write(dir.path().join("sys.json"), json).unwrap();
        let LoadedSystem::GifsInf(s) = load_system(&dir.path().join("sys.json")).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(s.maps()[0].declared_bound(), 0.5);
    }

    #[test]
    fn ifs_and_gifs_round_trip() {
        let d = SystemDescription::of_ifs(&IfsSystem::cantor()).unwrap();
        assert!(d.to_json().unwrap().contains("\"kind\": \"ifs\""));
        assert!(matches!(d.build(None).unwrap(), LoadedSystem::Ifs(_)));
        let g = SystemDescription::of_gifs(&GifsSystem::averaging()).unwrap();
        let LoadedSystem::Gifs(s) = SystemDescription::from_json(&g.to_json().unwrap()).unwrap().build(None).unwrap()
        else {
            panic!("wrong kind")
        };
        assert_eq!(s.order(), 2);
    }

    #[test]
    fn witness_description_lists_prefixes() {
        let d = SystemDescription::of_inf(&build_witness_system(&tree()).unwrap(), vec![]);
        let v: serde_json::Value = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert_eq!(v["maps"][1]["prefix"], serde_json::json!([2]));
        assert_eq!(v["maps"][1]["kind"], "address_transformer");
    }

    #[test]
    fn missing_tree_is_an_error() {
        let json = r#"{"kind":"gifs_inf","maps":[],"domain":{}}"#;
        assert!(SystemDescription::from_json(json).unwrap().build(None).is_err());
    }
}
