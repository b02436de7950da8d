//! Hutchinson operators for IFS, finite-order GIFS and infinite-order GIFS
//! on balanced sets, plus the builders, certificates and checks around them.

pub mod certify;
pub mod description;
pub mod ifs;
pub mod image;
pub mod inf;
pub mod iterate;
pub mod witness;

pub use certify::{certify_lipschitz, CertMethod, CertificateReport, MapCertificate};
pub use description::{load_system, DomainDescription, InfMapDescription, LoadedSystem, SystemDescription};
pub use ifs::{
    hutchinson_step_gifs, hutchinson_step_ifs, AffineParams, AffineTupleParams, GifsMap, GifsSystem, IfsMap, IfsSystem,
    DEFAULT_TUPLE_CAP,
};
pub use image::{check_c1_boundedness, check_image_characterization, C1Check, ImageCheck};
pub use inf::{
    apply_inf_map, hutchinson_step_inf, map_image, Consumption, GifsInfMap, GifsInfSystem, InfMapKind, Located,
    TreeDomain, TuplePolicy,
};
pub use iterate::{iterate_to_fixed_point, trace_dominated, FixedPointRun, HutchinsonOperator, InfOperator};
pub use witness::{
    build_refined_system, build_union_system, build_witness_system, refinement_order, union_geometry, UnionGeometry,
};
