//! QL bits: two weakly connected subgraphs `a1` (blue) and `a2` (red).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{bipartite_d_regular, d_regular_random, BiasedGraph, GraphBuilder, GraphGenSpec};
use crate::product::ProductBasis;
use crate::rng::{derive_seed, rng_from_seed, Rng as StreamRng};
use crate::spectral::{eigendecompose, emergent_cluster, EmergentPolicy};

/// Edge bias: a unit-modulus complex factor, or zero for "no edges".
///
/// Serialized as one of `"+1"`, `"-1"`, `"i"`, `"-i"`, `"0"` when it is one of
/// those values, otherwise as `[re, im]`. A bare number is also accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias(pub Complex64);

impl Bias {
    pub const PLUS: Bias = Bias(Complex64::new(1.0, 0.0));
    pub const MINUS: Bias = Bias(Complex64::new(-1.0, 0.0));
    pub const I: Bias = Bias(Complex64::new(0.0, 1.0));
    pub const MINUS_I: Bias = Bias(Complex64::new(0.0, -1.0));
    pub const ZERO: Bias = Bias(Complex64::new(0.0, 0.0));

    /// `e^{i phi}`.
    pub fn phase(phi: f64) -> Self {
        Bias(Complex64::from_polar(1.0, phi))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == Complex64::default()
    }

    pub fn is_unit(self) -> bool {
        (self.0.norm() - 1.0).abs() <= 1e-12
    }

    fn name(self) -> Option<&'static str> {
        [(Self::PLUS, "+1"), (Self::MINUS, "-1"), (Self::I, "i"), (Self::MINUS_I, "-i"), (Self::ZERO, "0")]
            .into_iter()
            .find(|(b, _)| *b == self)
            .map(|(_, s)| s)
    }
}

impl Default for Bias {
    fn default() -> Self {
        Self::PLUS
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(s) => f.write_str(s),
            None => write!(f, "{}", self.0),
        }
    }
}

impl Serialize for Bias {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.name() {
            Some(name) => s.serialize_str(name),
            None => [self.0.re, self.0.im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Bias {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Real(f64),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Name(s) => match s.trim() {
                "+1" | "1" => Ok(Self::PLUS),
                "-1" => Ok(Self::MINUS),
                "i" | "+i" => Ok(Self::I),
                "-i" => Ok(Self::MINUS_I),
                "0" => Ok(Self::ZERO),
                other => Err(serde::de::Error::custom(format!(
                    "unknown bias {other:?}, expected one of \"+1\", \"-1\", \"i\", \"-i\", \"0\""
                ))),
            },
            Repr::Real(x) => Ok(Bias(Complex64::new(x, 0.0))),
            Repr::Pair([re, im]) => Ok(Bias(Complex64::new(re, im))),
        }
    }
}

/// How cross edges between the two subgraphs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectPolicy {
    /// Each of the `n * k` cross pairs independently with probability `p`.
    PairProbability(f64),
    /// Exactly `round(f * (m1 + m2))` cross edges, where `m1 + m2` is the
    /// number of intra-subgraph edges (`(n + k) d / 2` for `d`-regular parts).
    EdgeBudgetFraction(f64),
    /// Cross edges form a random `c`-regular bipartite graph, so every vertex
    /// has exactly `c` neighbors on the other side. Needs equal side sizes.
    RegularDegree(usize),
}

impl Default for ConnectPolicy {
    fn default() -> Self {
        Self::EdgeBudgetFraction(0.2)
    }
}

impl ConnectPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PairProbability(p) if !(0.0..=1.0).contains(&p) => {
                Err(Error::InvalidArgument(format!("pair probability {p} outside [0, 1]")))
            }
            Self::EdgeBudgetFraction(f) if !(f >= 0.0 && f.is_finite()) => {
                Err(Error::InvalidArgument(format!("edge budget fraction {f} must be >= 0")))
            }
            _ => Ok(()),
        }
    }

    /// Draws cross pairs `(u, x)` with `u < n`, `x < k`.
    ///
    /// `intra_edges` is the edge count the budget fraction refers to.
    pub(crate) fn sample_pairs(
        &self,
        n: usize,
        k: usize,
        intra_edges: usize,
        rng: &mut StreamRng,
    ) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        match *self {
            Self::PairProbability(p) => {
                let mut out = Vec::new();
                for u in 0..n {
                    for x in 0..k {
                        if rng.random_bool(p) {
                            out.push((u, x));
                        }
                    }
                }
                Ok(out)
            }
            Self::EdgeBudgetFraction(f) => {
                let count = (f * intra_edges as f64).round() as usize;
                if count > n * k {
                    return Err(Error::PolicyInfeasible(format!(
                        "budget of {count} cross edges exceeds the {} available pairs",
                        n * k
                    )));
                }
                let mut idx: Vec<usize> = sample(rng, n * k, count).into_vec();
                idx.sort_unstable();
                Ok(idx.into_iter().map(|i| (i / k, i % k)).collect())
            }
            Self::RegularDegree(c) => {
                if n != k || c > n {
                    return Err(Error::PolicyInfeasible(format!(
                        "{c}-regular cross edges need equal sides of at least {c} vertices, got {n} and {k}"
                    )));
                }
                if c == 0 {
                    return Ok(Vec::new());
                }
                let cross = bipartite_d_regular(n, c, rng.random())?;
                Ok(cross.edges().map(|e| (e.u, e.v - n)).collect())
            }
        }
    }
}

fn default_bias() -> Bias {
    Bias::PLUS
}

/// Recipe for one QL bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlBitSpec {
    /// Blue subgraph `a1`.
    pub sub1: GraphGenSpec,
    /// Red subgraph `a2`.
    pub sub2: GraphGenSpec,
    #[serde(default)]
    pub connect: ConnectPolicy,
    #[serde(default = "default_bias")]
    pub connect_bias: Bias,
    #[serde(default = "default_bias")]
    pub red_bias: Bias,
    #[serde(default = "default_bias")]
    pub blue_bias: Bias,
    #[serde(default)]
    pub seed: u64,
}

impl QlBitSpec {
    /// Two `d`-regular random subgraphs on `n` vertices each, default coupling.
    pub fn regular(n: usize, d: usize, seed: u64) -> Self {
        Self {
            sub1: GraphGenSpec::DRegularRandom { n, d, seed: 0 },
            sub2: GraphGenSpec::DRegularRandom { n, d, seed: 0 },
            connect: ConnectPolicy::default(),
            connect_bias: Bias::PLUS,
            red_bias: Bias::PLUS,
            blue_bias: Bias::PLUS,
            seed: 0,
        }
        .reseeded(seed)
    }

    pub fn with_connect(mut self, connect: ConnectPolicy, bias: Bias) -> Self {
        self.connect = connect;
        self.connect_bias = bias;
        self
    }

    pub fn with_intra_biases(mut self, blue: Bias, red: Bias) -> Self {
        self.blue_bias = blue;
        self.red_bias = red;
        self
    }

    /// Same recipe with all randomness derived from `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            sub1: self.sub1.reseeded(derive_seed(seed, 1)),
            sub2: self.sub2.reseeded(derive_seed(seed, 2)),
            seed: derive_seed(seed, 3),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.connect.validate()?;
        if !(self.connect_bias.is_unit() || self.connect_bias.is_zero()) {
            return Err(Error::InvalidArgument(format!(
                "connecting bias {} must have unit modulus or be zero",
                self.connect_bias
            )));
        }
        for (name, b) in [("red", self.red_bias), ("blue", self.blue_bias)] {
            if !b.is_unit() {
                return Err(Error::InvalidArgument(format!("{name} bias {b} must have unit modulus")));
            }
        }
        if self.sub1.vertex_count() == 0 || self.sub2.vertex_count() == 0 {
            return Err(Error::EmptySubgraph);
        }
        Ok(())
    }
}

/// Assembles the QL bit graph: `a1` on vertices `0..n`, `a2` on `n..n+k`.
pub fn build_qlbit(spec: &QlBitSpec) -> Result<BiasedGraph> {
    spec.validate()?;
    let g1 = spec.sub1.generate()?;
    let g2 = spec.sub2.generate()?;
    let (n, k) = (g1.n(), g2.n());
    let mut b = GraphBuilder::new(n + k);
    for e in g1.edges() {
        b.add_edge(e.u, e.v, e.value * spec.blue_bias.value())?;
    }
    for e in g2.edges() {
        b.add_edge(e.u + n, e.v + n, e.value * spec.red_bias.value())?;
    }
    for (v, &x) in g1.diagonal().iter().chain(g2.diagonal()).enumerate() {
        b.set_diagonal(v, x);
    }
    if !spec.connect_bias.is_zero() {
        let mut rng = rng_from_seed(spec.seed);
        for (u, x) in spec.connect.sample_pairs(n, k, g1.edge_count() + g2.edge_count(), &mut rng)? {
            b.add_edge(u, n + x, spec.connect_bias.value())?;
        }
    }
    b.add_label("a1", (0..n).collect()).add_label("a2", (n..n + k).collect());
    b.build()
}

/// QL bit whose whole graph is exactly `d`-regular.
///
/// Each side is a `(d - cross_degree)`-regular random graph on `n_per_side`
/// vertices and the cross edges form a `cross_degree`-regular bipartite graph,
/// so every vertex has the same number of intra and cross neighbors. All
/// biases are `+1`; use [`apply_bias_topology`] to set a row.
pub fn build_regular_qlbit(n_per_side: usize, d: usize, cross_degree: usize, seed: u64) -> Result<BiasedGraph> {
    if cross_degree == 0 || cross_degree >= d {
        return Err(Error::InfeasibleDegree(format!(
            "need 0 < cross_degree < d, got cross_degree = {cross_degree}, d = {d}"
        )));
    }
    let spec = QlBitSpec::regular(n_per_side, d - cross_degree, seed)
        .with_connect(ConnectPolicy::RegularDegree(cross_degree), Bias::PLUS);
    build_qlbit(&spec)
}

/// `d`-regular random graph on `2 * n_per_side` vertices with a random balanced
/// bipartition labeled `a1` / `a2`.
///
/// Intra and cross degrees vary from vertex to vertex, so rows with a zero
/// connecting bias land near `d / 2` rather than `d`.
pub fn build_bipartitioned_qlbit(n_per_side: usize, d: usize, seed: u64) -> Result<BiasedGraph> {
    let g = d_regular_random(2 * n_per_side, d, derive_seed(seed, 1))?;
    let mut rng = rng_from_seed(derive_seed(seed, 2));
    let mut a1: Vec<usize> = sample(&mut rng, 2 * n_per_side, n_per_side).into_vec();
    a1.sort_unstable();
    let mut in_a1 = vec![false; 2 * n_per_side];
    a1.iter().for_each(|&v| in_a1[v] = true);
    let a2 = (0..2 * n_per_side).filter(|&v| !in_a1[v]).collect();
    let mut labels = crate::graph::Labels::new();
    labels.insert("a1".into(), a1);
    labels.insert("a2".into(), a2);
    g.with_labels(Some(labels))
}

/// Bipartite `d`-regular QL bit; the sides are `a1` and `a2`.
pub fn build_type2_qlbit(n_per_side: usize, d: usize, seed: u64) -> Result<BiasedGraph> {
    let mut b = GraphBuilder::from_graph(&bipartite_d_regular(n_per_side, d, seed)?);
    b.add_label("a1", (0..n_per_side).collect())
        .add_label("a2", (n_per_side..2 * n_per_side).collect());
    b.build()
}

/// Normalized indicator vectors of `a1` and `a2`.
pub fn j_vectors(g: &BiasedGraph) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
    let basis = single_bit_basis(g)?;
    let mut js = basis.j_vectors(g.n()).into_iter();
    Ok((js.next().expect("two blocks"), js.next().expect("two blocks")))
}

fn single_bit_basis(g: &BiasedGraph) -> Result<ProductBasis> {
    let basis = ProductBasis::from_graph(g)?;
    if basis.q() != 1 {
        return Err(Error::MissingLabels(format!("expected a single QL bit, found {} bits", basis.q())));
    }
    Ok(basis)
}

/// Projection `alpha |a1> + beta |a2>` of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveTwoState {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Norm of the part of the vector outside `span{J_a1, J_a2}`.
    pub residual: f64,
}

impl EffectiveTwoState {
    /// `(alpha, beta)` rescaled to unit norm.
    pub fn normalized(&self) -> Result<[Complex64; 2]> {
        let norm = (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument("projection vanishes; cannot renormalize".into()));
        }
        Ok([self.alpha / norm, self.beta / norm])
    }

    /// `|<target, s>|^2` with `s` the normalized state; `target` must be unit norm.
    pub fn fidelity(&self, target: [Complex64; 2]) -> Result<f64> {
        let s = self.normalized()?;
        Ok((target[0].conj() * s[0] + target[1].conj() * s[1]).norm_sqr())
    }

    /// `arg(alpha / beta)`, the relative phase of the `a1` component.
    pub fn relative_phase(&self) -> f64 {
        (self.alpha / self.beta).arg()
    }
}

/// `alpha = <J_a1, W>`, `beta = <J_a2, W>`; `W` must be unit norm.
pub fn project_two_state(g: &BiasedGraph, w: &DVector<Complex64>) -> Result<EffectiveTwoState> {
    let p = single_bit_basis(g)?.project(w)?;
    Ok(EffectiveTwoState { alpha: p.coefficients[0], beta: p.coefficients[1], residual: p.residual })
}

/// Red, blue and connecting biases for one bias topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableOneRow {
    pub red: Bias,
    pub blue: Bias,
    pub conn: Bias,
}

/// One reference row: topology, sign of the emergent eigenvalue and the
/// state in `(a1, a2)` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRow {
    pub name: &'static str,
    pub row: TableOneRow,
    pub eigenvalue_sign: f64,
    pub state: [Complex64; 2],
}

impl TableOneRow {
    pub const fn new(red: Bias, blue: Bias, conn: Bias) -> Self {
        Self { red, blue, conn }
    }

    /// The three orthogonal projections with their `+d` and `-d` variants.
    pub fn reference_rows() -> [ReferenceRow; 6] {
        let h = FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (p, m, i, z) = (Bias::PLUS, Bias::MINUS, Bias::I, Bias::ZERO);
        [
            ReferenceRow { name: "x+", row: Self::new(p, p, p), eigenvalue_sign: 1.0, state: [c(h, 0.0), c(h, 0.0)] },
            ReferenceRow { name: "x-", row: Self::new(m, m, p), eigenvalue_sign: -1.0, state: [c(-h, 0.0), c(h, 0.0)] },
            ReferenceRow { name: "y+", row: Self::new(p, p, i), eigenvalue_sign: 1.0, state: [c(0.0, h), c(h, 0.0)] },
            ReferenceRow { name: "y-", row: Self::new(m, m, i), eigenvalue_sign: -1.0, state: [c(0.0, -h), c(h, 0.0)] },
            ReferenceRow { name: "z+", row: Self::new(p, p, z), eigenvalue_sign: 1.0, state: [c(0.0, 0.0), c(1.0, 0.0)] },
            ReferenceRow { name: "z-", row: Self::new(m, m, z), eigenvalue_sign: -1.0, state: [c(1.0, 0.0), c(0.0, 0.0)] },
        ]
    }
}

/// Overwrites biases per `row`, keeping edge magnitudes.
///
/// A connecting bias `b` means `a_uv = b` for `u` in `a1` (blue) and `v` in
/// `a2` (red); the reverse entry is `conj(b)`. A zero connecting bias removes
/// the cross edges.
pub fn apply_bias_topology(g: &BiasedGraph, row: TableOneRow) -> Result<BiasedGraph> {
    let (a1, a2) = (g.block("a1"), g.block("a2"));
    let (Some(a1), Some(_)) = (a1, a2) else {
        return Err(Error::MissingLabels("bias topology needs blocks a1 and a2".into()));
    };
    let mut blue = vec![false; g.n()];
    a1.iter().for_each(|&v| blue[v] = true);
    Ok(g.map_edges(|e| {
        let w = e.weight();
        match (blue[e.u], blue[e.v]) {
            (true, true) => row.blue.value() * w,
            (false, false) => row.red.value() * w,
            (true, false) => row.conn.value() * w,
            (false, true) => row.conn.value().conj() * w,
        }
    }))
}

/// Emergent eigenvalue and fidelity of a bias row with a reference state.
///
/// The fidelity is the squared norm of the reference state (lifted to vertex
/// space through the J-vectors) projected onto the emergent eigenspace, which
/// stays meaningful when that eigenspace is degenerate.
pub fn row_fidelity(g: &BiasedGraph, state: [Complex64; 2], policy: EmergentPolicy) -> Result<(f64, f64)> {
    let (j1, j2) = j_vectors(g)?;
    let target = j1 * state[0] + j2 * state[1];
    let spec = eigendecompose(g)?;
    let cluster = emergent_cluster(&spec, policy);
    let fid = cluster.clone().map(|i| spec.eigenvectors().column(i).dotc(&target).norm_sqr()).sum();
    Ok((spec.eigenvalue(cluster.start), fid))
}
