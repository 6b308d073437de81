//! Binary code constructions and the uniqueness machinery for 1/16-codes:
//! the triangular-graph code, the exceptional triply even code of length 48,
//! the space Q_D of admissible relabeling maps, the coordinatewise-product
//! code D·D, and the module-isomorphism / relabeling criteria for code VOAs.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gf2core::{BitMatrix, BitVector, Gf2Error, Subspace};

/// Full-enumeration bound for weight enumerators and the triply-even test.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("code dimension {dim} exceeds enumeration limit {limit}; refusing rather than using an unproven criterion")]
    TooLargeToEnumerate { dim: usize, limit: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("beta is not in the dual code")]
    BetaNotInDual,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A binary linear code of length n, stored as a canonical rref generator basis.
#[derive(Clone)]
pub struct BinaryCode {
    length: usize,
    generators: Subspace,
    name: Option<String>,
}

impl PartialEq for BinaryCode {
    fn eq(&self, other: &Self) -> bool {
        // Names are labels only; equality is equality of subspaces.
        self.length == other.length && self.generators == other.generators
    }
}

impl Eq for BinaryCode {}

impl fmt::Debug for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryCode[{},{}]{}",
            self.length,
            self.dim(),
            self.name.as_deref().map(|n| format!(" {n}")).unwrap_or_default()
        )
    }
}

impl BinaryCode {
    pub fn from_generators(length: usize, generators: Vec<BitVector>) -> Self {
        BinaryCode {
            length,
            generators: Subspace::from_generators(length, generators),
            name: None,
        }
    }

    pub fn from_subspace(generators: Subspace) -> Self {
        BinaryCode {
            length: generators.ambient_dim(),
            generators,
            name: None,
        }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.generators.dim()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn generators(&self) -> &Subspace {
        &self.generators
    }

    pub fn generator_vectors(&self) -> Vec<BitVector> {
        self.generators.basis_vectors()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.generators.contains(v)
    }

    pub fn contains_allone(&self) -> bool {
        self.contains(&BitVector::ones(self.length))
    }

    /// The dual code C^⊥.
    pub fn dual(&self) -> BinaryCode {
        BinaryCode::from_subspace(self.generators.perp())
    }

    pub fn iter_codewords(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.generators.iter_elements()
    }

    pub fn weight_enumerator(&self) -> Result<WeightEnumerator, CodeError> {
        if self.dim() > ENUMERATION_LIMIT {
            return Err(CodeError::TooLargeToEnumerate {
                dim: self.dim(),
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut counts = BTreeMap::new();
        for w in self.iter_codewords() {
            *counts.entry(w.weight()).or_insert(0u64) += 1;
        }
        Ok(WeightEnumerator { counts })
    }

    /// Structural flags of the code.
    ///
    /// Evenness, double evenness and self-orthogonality are decided by the
    /// standard basis criteria (sound at any dimension): a code is even iff
    /// all basis weights are even; doubly even iff all basis weights are
    /// divisible by 4 and all pairwise basis intersections are even;
    /// self-orthogonal iff the basis is pairwise and self orthogonal.
    /// Triple evenness is decided by full enumeration and refuses above
    /// [`ENUMERATION_LIMIT`].
    pub fn predicates(&self) -> Result<CodePredicates, CodeError> {
        let basis = self.generator_vectors();
        let is_even = basis.iter().all(|b| b.weight() % 2 == 0);
        let is_doubly_even = basis.iter().all(|b| b.weight() % 4 == 0)
            && pairs(&basis).all(|(x, y)| x.intersection_size(y).unwrap() % 2 == 0);
        let is_self_orthogonal = basis
            .iter()
            .all(|b| b.weight() % 2 == 0)
            && pairs(&basis).all(|(x, y)| !x.dot(y).unwrap());
        let is_triply_even = if self.dim() > ENUMERATION_LIMIT {
            return Err(CodeError::TooLargeToEnumerate {
                dim: self.dim(),
                limit: ENUMERATION_LIMIT,
            });
        } else {
            self.iter_codewords().all(|w| w.weight() % 8 == 0)
        };
        Ok(CodePredicates {
            is_even,
            is_doubly_even,
            is_triply_even,
            contains_allone: self.contains_allone(),
            is_self_orthogonal,
        })
    }

    /// Serialize as a "code n=<n> dim=<k> name=<label>" header followed by the
    /// generator matrix in the plain-text interchange format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "code n={} dim={} name={}\n",
            self.length,
            self.dim(),
            self.name.as_deref().unwrap_or("-")
        );
        out.push_str(&self.generators.basis().to_text());
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CodeError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CodeError::Parse("empty code text".into()))?;
        let mut n = None;
        let mut name = None;
        for token in header.trim().strip_prefix("code ").ok_or_else(|| {
            CodeError::Parse("missing 'code' header".into())
        })?.split_whitespace()
        {
            if let Some(v) = token.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|e| CodeError::Parse(e.to_string()))?);
            } else if let Some(v) = token.strip_prefix("name=") {
                if v != "-" {
                    name = Some(v.to_string());
                }
            }
        }
        let n = n.ok_or_else(|| CodeError::Parse("missing n=".into()))?;
        let rest: String = lines.collect::<Vec<_>>().join("\n");
        let m = BitMatrix::from_text(&rest)?;
        if m.cols() != n {
            return Err(CodeError::Parse(format!("matrix has {} columns, header says {n}", m.cols())));
        }
        let mut code = BinaryCode::from_generators(n, m.row_iter().cloned().collect());
        if let Some(name) = name {
            code = code.with_name(&name);
        }
        Ok(code)
    }
}

fn pairs<T>(items: &[T]) -> impl Iterator<Item = (&T, &T)> {
    items
        .iter()
        .enumerate()
        .flat_map(move |(i, x)| items[i + 1..].iter().map(move |y| (x, y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodePredicates {
    pub is_even: bool,
    pub is_doubly_even: bool,
    pub is_triply_even: bool,
    pub contains_allone: bool,
    pub is_self_orthogonal: bool,
}

/// Weight distribution of a code, computed by full enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightEnumerator {
    pub counts: BTreeMap<usize, u64>,
}

impl WeightEnumerator {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn weights(&self) -> Vec<usize> {
        self.counts.keys().copied().collect()
    }
}

// ---------------------------------------------------------------------------
// Catalog constructions
// ---------------------------------------------------------------------------

/// Repetition code ⟨1⟩ of length n.
pub fn repetition(n: usize) -> BinaryCode {
    BinaryCode::from_generators(n, vec![BitVector::ones(n)]).with_name(&format!("One{n}"))
}

/// First-order Reed-Muller code RM(1,m) of length 2^m: spanned by the all-one
/// vector and the m coordinate hyperplane indicators.
pub fn reed_muller_1(m: u32) -> BinaryCode {
    let n = 1usize << m;
    let mut gens = vec![BitVector::ones(n)];
    for bit in 0..m {
        gens.push(BitVector::from_bits((0..n).map(|p| p >> bit & 1 == 1)));
    }
    BinaryCode::from_generators(n, gens).with_name(&format!("RM(1,{m})"))
}

/// RM(1,4): the [16,5] triply even code with weights {0, 8, 16}.
pub fn rm_1_4() -> BinaryCode {
    reed_muller_1(4).with_name("RM14")
}

/// The unique indecomposable doubly even self-dual code of length 16:
/// seven overlapping weight-4 windows plus the alternating glue vector.
pub fn d16_plus() -> BinaryCode {
    let mut gens = Vec::new();
    for i in 0..7 {
        gens.push(BitVector::from_support(16, &[2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3]));
    }
    gens.push(BitVector::from_bits((0..16).map(|i| i % 2 == 0)));
    BinaryCode::from_generators(16, gens).with_name("d16plus")
}

/// Extended doubling of a doubly even code: spanned by (α, α) for α in E
/// together with (1, 0).
pub fn extended_doubling(e: &BinaryCode) -> Result<BinaryCode, CodeError> {
    if !e.predicates()?.is_doubly_even {
        return Err(CodeError::Precondition("extended doubling requires a doubly even input".into()));
    }
    let n = e.length();
    let mut gens: Vec<BitVector> = e.generator_vectors().iter().map(|a| a.concat(a)).collect();
    gens.push(BitVector::ones(n).concat(&BitVector::zeros(n)));
    Ok(BinaryCode::from_generators(2 * n, gens)
        .with_name(&format!("ExtDbl({})", e.name().unwrap_or("?"))))
}

/// Direct sum A ⊕ B on disjoint coordinates.
pub fn direct_sum(a: &BinaryCode, b: &BinaryCode) -> BinaryCode {
    let (na, nb) = (a.length(), b.length());
    let mut gens: Vec<BitVector> = a
        .generator_vectors()
        .iter()
        .map(|v| v.concat(&BitVector::zeros(nb)))
        .collect();
    gens.extend(b.generator_vectors().iter().map(|v| BitVector::zeros(na).concat(v)));
    BinaryCode::from_generators(na + nb, gens).with_name(&format!(
        "DirectSum({},{})",
        a.name().unwrap_or("?"),
        b.name().unwrap_or("?")
    ))
}

/// The 45 coordinates of the triangular code: 2-subsets of {1,...,10} in
/// lexicographic order.
pub fn triangular_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(45);
    for i in 1..=10usize {
        for j in i + 1..=10 {
            pairs.push((i, j));
        }
    }
    pairs
}

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // Position of {i,j} in the lexicographic list of 2-subsets of {1..10}.
    (i - 1) * 10 - (i - 1) * i / 2 + (j - i - 1)
}

/// The incidence-matrix row of the triangular graph at the vertex {i,j}:
/// supported on all 2-subsets meeting {i,j} in exactly one point.
pub fn gamma(i: usize, j: usize) -> BitVector {
    assert!(i != j && (1..=10).contains(&i) && (1..=10).contains(&j));
    let mut support = Vec::with_capacity(16);
    for k in 1..=10 {
        if k != i && k != j {
            support.push(pair_index(i, k));
            support.push(pair_index(j, k));
        }
    }
    BitVector::from_support(45, &support)
}

/// The length-45 code T_10 generated by the incidence rows of the triangular
/// graph on 10 points.
pub fn triangular_code() -> BinaryCode {
    let gens = triangular_pairs().iter().map(|&(i, j)| gamma(i, j)).collect();
    BinaryCode::from_generators(45, gens).with_name("T10")
}

/// Embedding of F2^45 into F2^48 appending three zero coordinates.
pub fn iota(v: &BitVector) -> BitVector {
    assert_eq!(v.len(), 45);
    v.concat(&BitVector::zeros(3))
}

/// The exceptional triply even code of length 48 and dimension 9, generated
/// by the embedded triangular code and the all-one vector.
pub fn dex() -> BinaryCode {
    let mut gens: Vec<BitVector> = triangular_code().generator_vectors().iter().map(iota).collect();
    gens.push(BitVector::ones(48));
    BinaryCode::from_generators(48, gens).with_name("Dex")
}

/// The explicit 39-vector basis of the dual of the exceptional code:
/// the embedded products γ_{1,i}·γ_{1,j} for 2 ≤ i < j ≤ 10, the all-one
/// vector, and the two tail vectors supported on the appended coordinates.
pub fn dex_dual_basis() -> Vec<BitVector> {
    let mut out = Vec::with_capacity(39);
    for i in 2..=10usize {
        for j in i + 1..=10 {
            let beta = gamma(1, i).coordinatewise_product(&gamma(1, j)).unwrap();
            out.push(iota(&beta));
        }
    }
    out.push(BitVector::ones(48));
    out.push(BitVector::from_support(48, &[45, 46]));
    out.push(BitVector::from_support(48, &[45, 47]));
    out
}

/// Subcode D_[λ] of the exceptional code for a partition λ of 10: generated
/// by the all-one vector and the γ_{i,j} with {i,j} inside a single part.
/// Parts are taken as consecutive blocks of {1,...,10}.
pub fn d_partition(lambda: &[usize]) -> Result<BinaryCode, CodeError> {
    if lambda.iter().sum::<usize>() != 10 || lambda.iter().any(|&p| p == 0) {
        return Err(CodeError::InvalidPartition(format!("{lambda:?} is not a partition of 10")));
    }
    let mut gens = vec![BitVector::ones(48)];
    let mut start = 1usize;
    for &part in lambda {
        for i in start..start + part {
            for j in i + 1..start + part {
                gens.push(iota(&gamma(i, j)));
            }
        }
        start += part;
    }
    let label: Vec<String> = lambda.iter().filter(|&&p| p > 1).map(|p| p.to_string()).collect();
    let label = if label.is_empty() { "1".to_string() } else { label.join(",") };
    Ok(BinaryCode::from_generators(48, gens).with_name(&format!("D[{label}]")))
}

/// The code D·D spanned by all coordinatewise products of codewords.
/// Products are bilinear over F2, so basis pairs (including squares, which
/// give back D itself) already span it.
pub fn star_product(d: &BinaryCode) -> BinaryCode {
    let basis = d.generator_vectors();
    let mut gens = Vec::new();
    for (i, x) in basis.iter().enumerate() {
        for y in &basis[i..] {
            gens.push(x.coordinatewise_product(y).unwrap());
        }
    }
    BinaryCode::from_generators(d.length(), gens)
}

// ---------------------------------------------------------------------------
// The space Q_D
// ---------------------------------------------------------------------------

/// An element of Q_D: a linear map δ : D → F2^n/D^⊥ with ⟨δ(β), 1+β⟩ = 0,
/// stored on a fixed basis {1 = b_0, b_1, ...} of D. Cosets of D^⊥ are
/// represented through the nondegenerate pairing with D itself, so entry
/// (i, j) of the matrix is ⟨δ(b_i), b_j⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMap {
    matrix: BitMatrix,
}

impl QMap {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// ⟨δ(b_i), b_j⟩ for basis indices i, j.
    pub fn pairing(&self, i: usize, j: usize) -> bool {
        self.matrix.get(i, j)
    }

    pub fn add(&self, other: &QMap) -> QMap {
        assert_eq!(self.dim(), other.dim());
        let rows = self
            .matrix
            .row_iter()
            .zip(other.matrix.row_iter())
            .map(|(a, b)| a.xor(b))
            .collect();
        QMap {
            matrix: BitMatrix::from_rows(self.dim(), rows),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.row_iter().all(|r| r.is_zero())
    }
}

/// The solution space Q_D for a triply even code D of length divisible by 16
/// containing the all-one vector, together with the fixed basis data used to
/// coordinatize it.
pub struct QdSpace {
    code: BinaryCode,
    /// Basis of D with the all-one vector forced first.
    basis: Vec<BitVector>,
    /// Basis of the solution space.
    maps: Vec<QMap>,
}

impl QdSpace {
    pub fn new(code: &BinaryCode) -> Result<QdSpace, CodeError> {
        if code.length() % 16 != 0 {
            return Err(CodeError::Precondition(format!(
                "length {} is not divisible by 16",
                code.length()
            )));
        }
        if !code.contains_allone() {
            return Err(CodeError::Precondition("code does not contain the all-one vector".into()));
        }
        if !code.predicates()?.is_triply_even {
            return Err(CodeError::Precondition("code is not triply even".into()));
        }
        let basis = basis_with_allone_first(code);
        let d = basis.len();
        // Unknowns: the d*d pairing entries M[i][j] = ⟨δ(b_i), b_j⟩.
        // Constraints: M[i][j] = M[j][i] (δ(β+β') condition) and
        // M[i][0] = M[i][i] (the ⟨δ(β), 1+β⟩ = 0 condition on basis vectors).
        let mut constraints = BitMatrix::new(d * d);
        for i in 0..d {
            for j in i + 1..d {
                let mut row = BitVector::zeros(d * d);
                row.set(i * d + j, true);
                row.set(j * d + i, true);
                constraints.push_row(row);
            }
            let mut row = BitVector::zeros(d * d);
            row.set(i * d, true);
            let mut diag = BitVector::zeros(d * d);
            diag.set(i * d + i, true);
            row.xor_assign(&diag);
            if !row.is_zero() {
                constraints.push_row(row);
            }
        }
        let kernel = constraints.kernel();
        let maps = kernel
            .basis_vectors()
            .iter()
            .map(|flat| QMap {
                matrix: BitMatrix::from_rows(
                    d,
                    (0..d).map(|i| flat.slice(i * d, d)).collect(),
                ),
            })
            .collect();
        Ok(QdSpace {
            code: code.clone(),
            basis,
            maps,
        })
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    /// Basis of D with 1 first; Q_D matrices are written on this basis.
    pub fn code_basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn basis_maps(&self) -> &[QMap] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    pub fn contains(&self, map: &QMap) -> bool {
        let d = self.basis.len();
        if map.dim() != d {
            return false;
        }
        for i in 0..d {
            if map.pairing(i, 0) != map.pairing(i, i) {
                return false;
            }
            for j in 0..d {
                if map.pairing(i, j) != map.pairing(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// The map η(γ): β ↦ γ·β + D^⊥ written on the fixed bases.
    pub fn eta(&self, gamma: &BitVector) -> QMap {
        let d = self.basis.len();
        let rows = (0..d)
            .map(|i| {
                let gi = gamma.coordinatewise_product(&self.basis[i]).unwrap();
                BitVector::from_bits((0..d).map(|j| gi.dot(&self.basis[j]).unwrap()))
            })
            .collect();
        QMap {
            matrix: BitMatrix::from_rows(d, rows),
        }
    }

    /// Matrix whose rows are the products b_i·b_j for i ≤ j; γ lies in
    /// Ker(η) exactly when it is orthogonal to every row.
    fn product_rows(&self) -> BitMatrix {
        let d = self.basis.len();
        let mut m = BitMatrix::new(self.code.length());
        for i in 0..d {
            for j in i..d {
                m.push_row(self.basis[i].coordinatewise_product(&self.basis[j]).unwrap());
            }
        }
        m
    }

    /// Ker(η) = {γ : γ·β ∈ D^⊥ for all β ∈ D} = (D·D)^⊥.
    pub fn eta_kernel(&self) -> Subspace {
        self.product_rows().kernel()
    }

    /// A γ with η(γ) = δ, when one exists.
    pub fn solve_eta_preimage(&self, delta: &QMap) -> Option<BitVector> {
        let d = self.basis.len();
        assert_eq!(delta.dim(), d);
        let m = self.product_rows();
        let mut rhs = Vec::new();
        for i in 0..d {
            for j in i..d {
                rhs.push(delta.pairing(i, j));
            }
        }
        let rhs = BitVector::from_bits(rhs);
        m.solve(&rhs).unwrap().map(|s| s.particular)
    }
}

/// Canonical basis of a code containing 1, with the all-one vector first.
fn basis_with_allone_first(code: &BinaryCode) -> Vec<BitVector> {
    let one = BitVector::ones(code.length());
    assert!(code.contains(&one));
    let rref_basis = code.generator_vectors();
    // Express 1 as a combination of rref rows and drop the first row used.
    let mut rem = one.clone();
    let mut used = Vec::new();
    for (idx, row) in rref_basis.iter().enumerate() {
        let pivot = (0..code.length()).find(|&c| row.get(c)).unwrap();
        if rem.get(pivot) {
            rem.xor_assign(row);
            used.push(idx);
        }
    }
    assert!(rem.is_zero());
    let drop = used[0];
    let mut basis = vec![one];
    basis.extend(
        rref_basis
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, r)| r.clone()),
    );
    basis
}

/// Report of the Theorem-level uniqueness hypothesis dim(D·D) = C(d,2) + 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniquenessReport {
    pub dim_d: usize,
    pub dim_star: usize,
    pub formula_value: usize,
    pub satisfied: bool,
}

pub fn uniqueness_criterion(d: &BinaryCode) -> Result<UniquenessReport, CodeError> {
    if d.length() % 16 != 0 {
        return Err(CodeError::Precondition(format!(
            "length {} is not divisible by 16",
            d.length()
        )));
    }
    if !d.contains_allone() {
        return Err(CodeError::Precondition("code does not contain the all-one vector".into()));
    }
    if !d.predicates()?.is_triply_even {
        return Err(CodeError::Precondition("code is not triply even".into()));
    }
    let dim_d = d.dim();
    let dim_star = star_product(d).dim();
    let formula_value = dim_d * (dim_d - 1) / 2 + 1;
    Ok(UniquenessReport {
        dim_d,
        dim_star,
        formula_value,
        satisfied: dim_star == formula_value,
    })
}

// ---------------------------------------------------------------------------
// Module-isomorphism bookkeeping for code VOAs
// ---------------------------------------------------------------------------

/// C_β = {α ∈ C : supp(α) ⊆ supp(β)}.
pub fn c_beta(c: &BinaryCode, beta: &BitVector) -> Subspace {
    let n = c.length();
    let coords = Subspace::from_generators(
        n,
        beta.support().iter().map(|&i| BitVector::unit(n, i)).collect(),
    );
    c.generators().intersect(&coords)
}

/// Greedy maximal self-orthogonal subcode of a code, scanning the codewords
/// in the canonical enumeration order and adjoining every word that is
/// orthogonal to itself and to the span so far.
pub fn max_self_orthogonal_subcode(code: &Subspace) -> Result<Subspace, CodeError> {
    max_self_orthogonal_with_order(code.ambient_dim(), &code.basis_vectors())
}

/// Same greedy scan, but enumerating span combinations of the given basis in
/// Gray-code order. The subcode found may depend on the order; the uses in
/// the module-isomorphism criterion are tested for order independence.
pub fn max_self_orthogonal_with_order(
    ambient: usize,
    basis: &[BitVector],
) -> Result<Subspace, CodeError> {
    if basis.len() > 20 {
        return Err(CodeError::TooLargeToEnumerate {
            dim: basis.len(),
            limit: 20,
        });
    }
    // Echelonized basis of the growing subcode: rows sorted by pivot.
    let mut echelon: Vec<(usize, BitVector)> = Vec::new();
    let mut current = BitVector::zeros(ambient);
    for index in 0u64..(1 << basis.len()) {
        if index > 0 {
            current.xor_assign(&basis[index.trailing_zeros() as usize]);
        }
        let w = &current;
        if w.weight() % 2 != 0 {
            continue;
        }
        if echelon.iter().any(|(_, h)| h.dot(w).unwrap()) {
            continue;
        }
        let mut rem = w.clone();
        for (pivot, h) in &echelon {
            if rem.get(*pivot) {
                rem.xor_assign(h);
            }
        }
        if rem.is_zero() {
            continue;
        }
        let pivot = (0..ambient).find(|&c| rem.get(c)).unwrap();
        let pos = echelon.partition_point(|(p, _)| *p < pivot);
        echelon.insert(pos, (pivot, rem));
    }
    Ok(Subspace::from_generators(
        ambient,
        echelon.into_iter().map(|(_, v)| v).collect(),
    ))
}

/// H^{⊥_β} = {α : supp(α) ⊆ supp(β), ⟨α, δ⟩ = 0 for all δ ∈ H}.
pub fn h_perp_beta(h: &Subspace, beta: &BitVector) -> Subspace {
    let n = beta.len();
    let support = beta.support();
    // Solve on the coordinates of supp(β) only, then re-embed.
    let rows: Vec<BitVector> = h
        .basis_vectors()
        .iter()
        .map(|v| BitVector::from_bits(support.iter().map(|&i| v.get(i))))
        .collect();
    let restricted = BitMatrix::from_rows(support.len(), rows).kernel();
    let embedded = restricted
        .basis_vectors()
        .iter()
        .map(|v| {
            let mut w = BitVector::zeros(n);
            for (k, &i) in support.iter().enumerate() {
                if v.get(k) {
                    w.set(i, true);
                }
            }
            w
        })
        .collect();
    Subspace::from_generators(n, embedded)
}

/// Whether M_C(β, γ1) and M_C(β, γ2) are isomorphic: γ1 + γ2 ∈ C + H^{⊥_β}
/// for a maximal self-orthogonal subcode H of C_β.
pub fn module_iso_criterion(
    c: &BinaryCode,
    beta: &BitVector,
    gamma1: &BitVector,
    gamma2: &BitVector,
) -> Result<bool, CodeError> {
    if !c.dual().contains(beta) {
        return Err(CodeError::BetaNotInDual);
    }
    let h = max_self_orthogonal_subcode(&c_beta(c, beta))?;
    let target = c.generators().sum(&h_perp_beta(&h, beta));
    Ok(target.contains(&gamma1.xor(gamma2)))
}

/// Elements of (1/2)Z mod Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfMod1 {
    Zero,
    Half,
}

/// The top-weight shift ⟨α, α+β⟩/2 mod Z, with the inner product taken as an
/// integer intersection count.
pub fn top_weight_shift(alpha: &BitVector, beta: &BitVector) -> Result<HalfMod1, Gf2Error> {
    let size = alpha.intersection_size(&alpha.xor(beta))?;
    Ok(if size % 2 == 0 { HalfMod1::Zero } else { HalfMod1::Half })
}

/// Module label of σ_α ∘ M_C(β, γ): the fusion relabeling (β, γ + α·β).
pub fn sigma_relabel(
    alpha: &BitVector,
    beta: &BitVector,
    gamma: &BitVector,
) -> Result<(BitVector, BitVector), Gf2Error> {
    let shift = alpha.coordinatewise_product(beta)?;
    Ok((beta.clone(), gamma.xor(&shift)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rm14_shape_and_weights() {
        let c = rm_1_4();
        assert_eq!(c.length(), 16);
        assert_eq!(c.dim(), 5);
        let we = c.weight_enumerator().unwrap();
        let expected: BTreeMap<usize, u64> = [(0, 1), (8, 30), (16, 1)].into_iter().collect();
        assert_eq!(we.counts, expected);
        let p = c.predicates().unwrap();
        assert!(p.is_triply_even && p.contains_allone);
    }

    #[test]
    fn d16_plus_is_doubly_even_self_dual_not_triply_even() {
        let c = d16_plus();
        assert_eq!(c.dim(), 8);
        assert_eq!(c.dual(), c);
        let p = c.predicates().unwrap();
        assert!(p.is_doubly_even);
        assert!(!p.is_triply_even);
        // The unique indecomposable doubly even self-dual [16,8] code has
        // 28 words of weight 4 (the decomposable e8+e8 has 14).
        let we = c.weight_enumerator().unwrap();
        assert_eq!(we.counts.get(&4), Some(&28));
        assert_eq!(we.total(), 256);
    }

    #[test]
    fn extended_doubling_shapes() {
        let zero8 = BinaryCode::from_generators(8, vec![]).with_name("Zero8");
        let d = extended_doubling(&zero8).unwrap();
        assert_eq!(d.dim(), 1);
        assert!(d.contains(&BitVector::ones(8).concat(&BitVector::zeros(8))));

        let h8 = reed_muller_1(3);
        assert!(h8.predicates().unwrap().is_doubly_even);
        let dh8 = extended_doubling(&h8).unwrap();
        assert_eq!(dh8.dim(), h8.dim() + 1);
        assert!(dh8.predicates().unwrap().is_triply_even);
        assert_eq!(dh8.length(), 16);

        let odd = repetition(3);
        assert!(extended_doubling(&odd).is_err());
    }

    #[test]
    fn triangular_code_dimension_and_gamma_weights() {
        let t = triangular_code();
        assert_eq!(t.length(), 45);
        assert_eq!(t.dim(), 8);
        for (i, j) in triangular_pairs() {
            assert_eq!(gamma(i, j).weight(), 16);
        }
    }

    #[test]
    fn gamma_triple_sum_support() {
        // γ_{i,j} + γ_{i,k} + γ_{j,k} is supported on the pairs meeting
        // {i,j,k} in exactly one point: each vertex {x,y} appears in one,
        // two, or three of the supports according to |{x,y} ∩ {i,j,k}|.
        let (i, j, k) = (2usize, 5usize, 9usize);
        let sum = gamma(i, j).xor(&gamma(i, k)).xor(&gamma(j, k));
        let expected: Vec<usize> = triangular_pairs()
            .iter()
            .enumerate()
            .filter(|(_, &(x, y))| {
                let hits = [x, y].iter().filter(|&&v| v == i || v == j || v == k).count();
                hits == 1
            })
            .map(|(idx, _)| idx)
            .collect();
        assert_eq!(sum.support(), expected);
    }

    #[test]
    fn gamma_product_has_weight_8() {
        let prod = gamma(1, 2).coordinatewise_product(&gamma(1, 3)).unwrap();
        assert_eq!(prod.weight(), 8);
    }

    #[test]
    fn dex_shape_and_triple_evenness() {
        let d = dex();
        assert_eq!(d.length(), 48);
        assert_eq!(d.dim(), 9);
        let p = d.predicates().unwrap();
        assert!(p.is_triply_even && p.contains_allone);
        assert_eq!(d.dual().dim(), 39);
    }

    #[test]
    fn dex_dual_basis_is_a_basis_of_the_dual() {
        let vectors = dex_dual_basis();
        assert_eq!(vectors.len(), 39);
        let span = Subspace::from_generators(48, vectors.clone());
        assert_eq!(span.dim(), 39, "the 39 vectors are linearly independent");
        let d = dex();
        for v in &vectors {
            for g in d.generator_vectors() {
                assert!(!v.dot(&g).unwrap(), "dual basis vector pairs with a generator");
            }
        }
        assert_eq!(span, d.generators().perp());
    }

    #[test]
    fn d_partition_cases() {
        assert_eq!(d_partition(&[10]).unwrap(), dex());
        let ones = d_partition(&[1; 10]).unwrap();
        assert_eq!(ones.dim(), 1);
        assert!(ones.contains_allone());
        // Oracle-recorded dimensions for the two proper subcodes.
        assert_eq!(d_partition(&[8, 1, 1]).unwrap().dim(), 8);
        assert_eq!(d_partition(&[7, 1, 1, 1]).unwrap().dim(), 7);
        assert!(d_partition(&[4, 4]).is_err());
    }

    #[test]
    fn star_product_small_cases() {
        let one16 = repetition(16);
        assert_eq!(star_product(&one16), one16);
        assert_eq!(star_product(&dex()).dim(), 37);
    }

    #[test]
    fn star_product_from_basis_equals_all_pairs() {
        for code in [d_partition(&[4, 3, 2, 1]).unwrap(), d_partition(&[5, 5]).unwrap(), rm_1_4()] {
            let words: Vec<BitVector> = code.iter_codewords().collect();
            let mut gens = Vec::new();
            for x in &words {
                for y in &words {
                    gens.push(x.coordinatewise_product(y).unwrap());
                }
            }
            let all_pairs = BinaryCode::from_generators(code.length(), gens);
            assert_eq!(star_product(&code), all_pairs);
        }
    }

    #[test]
    fn direct_sum_of_rm14_is_triply_even() {
        let c = direct_sum(&rm_1_4(), &direct_sum(&rm_1_4(), &rm_1_4()));
        assert_eq!(c.length(), 48);
        assert_eq!(c.dim(), 15);
        assert!(c.predicates().unwrap().is_triply_even);
    }

    #[test]
    fn qd_space_dimensions_follow_the_binomial_formula() {
        for code in [
            repetition(16),
            d_partition(&[7, 1, 1, 1]).unwrap(),
            d_partition(&[8, 1, 1]).unwrap(),
            dex(),
        ] {
            let q = QdSpace::new(&code).unwrap();
            let d = code.dim();
            assert_eq!(q.dim(), 1 + d * (d - 1) / 2, "Q_D dimension for {code:?}");
        }
    }

    #[test]
    fn qd_membership_condition_holds_on_full_enumeration() {
        // Every basis map of Q_D satisfies ⟨δ(β), 1+β⟩ = 0 for every β in D,
        // re-proving the defining condition beyond the basis constraints.
        let code = d_partition(&[5, 3, 1, 1]).unwrap();
        let q = QdSpace::new(&code).unwrap();
        let basis = q.code_basis().to_vec();
        let d = basis.len();
        let one = BitVector::ones(code.length());
        for map in q.basis_maps() {
            for mask in 0u32..(1 << d) {
                // β = Σ coeffs·b_i; δ(β) pairs with any codeword via the matrix.
                let mut beta = BitVector::zeros(code.length());
                for (i, b) in basis.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        beta.xor_assign(b);
                    }
                }
                let target = one.xor(&beta);
                // ⟨δ(β), target⟩ = Σ_i coeff_i ⟨δ(b_i), target⟩ and target is
                // itself a combination of basis vectors.
                let coords: Vec<bool> = express_in_basis(&target, &basis);
                let mut pairing = false;
                for i in 0..d {
                    if mask >> i & 1 == 0 {
                        continue;
                    }
                    for (j, &cj) in coords.iter().enumerate() {
                        if cj {
                            pairing ^= map.pairing(i, j);
                        }
                    }
                }
                assert!(!pairing, "Q_D condition fails for mask {mask:#b}");
            }
        }
    }

    fn express_in_basis(v: &BitVector, basis: &[BitVector]) -> Vec<bool> {
        // Solve Σ x_i b_i = v by elimination over the basis matrix transpose.
        let n = v.len();
        let m = BitMatrix::from_rows(
            basis.len(),
            (0..n)
                .map(|c| BitVector::from_bits(basis.iter().map(|b| b.get(c))))
                .collect(),
        );
        let rhs = BitVector::from_bits((0..n).map(|c| v.get(c)));
        m.solve(&rhs).unwrap().expect("vector not in span").particular
            .support()
            .iter()
            .fold(vec![false; basis.len()], |mut acc, &i| {
                acc[i] = true;
                acc
            })
    }

    #[test]
    fn eta_is_linear_and_lands_in_qd() {
        let code = dex();
        let q = QdSpace::new(&code).unwrap();
        let g1 = BitVector::from_support(48, &[0, 3, 7, 11, 40]);
        let g2 = BitVector::from_support(48, &[1, 3, 20, 45]);
        assert!(q.contains(&q.eta(&g1)));
        assert!(q.contains(&q.eta(&g2)));
        assert_eq!(q.eta(&g1.xor(&g2)), q.eta(&g1).add(&q.eta(&g2)));
        assert!(q.eta(&BitVector::zeros(48)).is_zero());
        // η(1) is the identity-like map β ↦ β + D^⊥.
        let eta_one = q.eta(&BitVector::ones(48));
        let basis = q.code_basis().to_vec();
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                assert_eq!(eta_one.pairing(i, j), bi.dot(bj).unwrap());
            }
        }
    }

    #[test]
    fn eta_kernel_perp_is_star_product() {
        for code in [repetition(16), d_partition(&[6, 2, 1, 1]).unwrap(), dex()] {
            let q = QdSpace::new(&code).unwrap();
            let k = q.eta_kernel();
            assert_eq!(k.perp(), *star_product(&code).generators());
            assert_eq!(k.dim(), code.length() - star_product(&code).dim());
        }
        // For D = ⟨1⟩, Ker(η) is the even-weight code.
        let q = QdSpace::new(&repetition(16)).unwrap();
        let even = repetition(16).dual();
        assert_eq!(q.eta_kernel(), *even.generators());
    }

    #[test]
    fn eta_preimage_round_trip_and_total_solvability_on_dex() {
        let code = dex();
        let q = QdSpace::new(&code).unwrap();
        let gamma0 = BitVector::from_support(48, &[2, 9, 17, 33]);
        let delta = q.eta(&gamma0);
        let gamma = q.solve_eta_preimage(&delta).unwrap();
        assert_eq!(q.eta(&gamma), delta);
        for map in q.basis_maps() {
            let g = q.solve_eta_preimage(map).expect("preimage must exist on Dex");
            assert_eq!(&q.eta(&g), map);
        }
    }

    #[test]
    fn uniqueness_criterion_catalog() {
        assert!(uniqueness_criterion(&dex()).unwrap().satisfied);
        assert!(uniqueness_criterion(&d_partition(&[8, 1, 1]).unwrap()).unwrap().satisfied);
        assert!(uniqueness_criterion(&d_partition(&[7, 1, 1, 1]).unwrap()).unwrap().satisfied);
        let r = uniqueness_criterion(&repetition(16)).unwrap();
        assert!(r.satisfied && r.dim_star == 1);
        // A triply even code whose product code is too small to meet the bound.
        let rm3 = direct_sum(&rm_1_4(), &direct_sum(&rm_1_4(), &rm_1_4()));
        let r = uniqueness_criterion(&rm3).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.formula_value, 106);
    }

    #[test]
    fn preimage_solvability_matches_uniqueness_criterion_negative_case() {
        let rm3 = direct_sum(&rm_1_4(), &direct_sum(&rm_1_4(), &rm_1_4()));
        let q = QdSpace::new(&rm3).unwrap();
        let solvable = q.basis_maps().iter().all(|m| q.solve_eta_preimage(m).is_some());
        assert!(!solvable, "some Q_D element must have no η-preimage when the criterion fails");
    }

    #[test]
    fn module_iso_criterion_basics() {
        let c = rm_1_4().dual();
        let beta = rm_1_4()
            .iter_codewords()
            .find(|w| w.weight() == 8)
            .unwrap();
        assert!(c.dual().contains(&beta));
        let g1 = BitVector::from_support(16, &[0, 2, 5]);
        assert!(module_iso_criterion(&c, &beta, &g1, &g1).unwrap());
        let cw = c.generator_vectors()[2].clone();
        assert!(module_iso_criterion(&c, &beta, &g1, &g1.xor(&cw)).unwrap());
        let not_in_dual = BitVector::unit(16, 0);
        assert!(matches!(
            module_iso_criterion(&c, &not_in_dual, &g1, &g1),
            Err(CodeError::BetaNotInDual)
        ));
    }

    #[test]
    fn h_perp_beta_lands_in_c_for_triply_even_duals() {
        // With C = D^⊥ for triply even D of length divisible by 16, the
        // criterion collapses to γ1 + γ2 ∈ C.
        let d = dex();
        let c = d.dual();
        for beta in [iota(&gamma(1, 2)), iota(&gamma(3, 7)), BitVector::ones(48)] {
            let h = max_self_orthogonal_subcode(&c_beta(&c, &beta)).unwrap();
            let hpb = h_perp_beta(&h, &beta);
            assert!(
                hpb.is_subspace_of(c.generators()),
                "H^perp_beta must be inside C for beta of weight {}",
                beta.weight()
            );
        }
    }

    #[test]
    fn greedy_h_order_independence_on_small_instances() {
        // The criterion's truth value should not depend on which maximal
        // self-orthogonal H the greedy scan finds; vary the enumeration
        // order through permuted bases of C_β.
        let c = rm_1_4().dual();
        let beta = BitVector::ones(16);
        assert!(c.dual().contains(&beta));
        let cb = c_beta(&c, &beta);
        let canonical = cb.basis_vectors();
        let mut orders = vec![canonical.clone()];
        let mut reversed = canonical.clone();
        reversed.reverse();
        orders.push(reversed);
        let mut mixed = canonical.clone();
        mixed.swap(0, canonical.len() / 2);
        mixed[1] = mixed[1].xor(&mixed[2]);
        orders.push(mixed);

        let g1 = BitVector::from_support(16, &[1, 4, 9]);
        let g2 = BitVector::from_support(16, &[0, 4, 9, 12]);
        let reference = module_iso_criterion(&c, &beta, &g1, &g2).unwrap();
        for order in orders {
            let h = max_self_orthogonal_with_order(16, &order).unwrap();
            let target = c.generators().sum(&h_perp_beta(&h, &beta));
            assert_eq!(target.contains(&g1.xor(&g2)), reference);
        }
    }

    #[test]
    fn top_weight_shift_cases() {
        let zero = BitVector::zeros(8);
        let beta = BitVector::from_support(8, &[0, 1, 2, 3]);
        assert_eq!(top_weight_shift(&zero, &beta).unwrap(), HalfMod1::Zero);
        let alpha = BitVector::from_support(8, &[0, 4]);
        // supp(α) ∩ supp(α+β) = {4} together with {0}'s fate under β.
        let size = alpha.intersection_size(&alpha.xor(&beta)).unwrap();
        let expect = if size % 2 == 0 { HalfMod1::Zero } else { HalfMod1::Half };
        assert_eq!(top_weight_shift(&alpha, &beta).unwrap(), expect);
    }

    #[test]
    fn qd_maps_have_integral_top_weight_shift() {
        // For δ ∈ Q_D with preimage γ the shift ⟨γ·β, 1+β⟩/2 vanishes mod Z.
        let code = dex();
        let q = QdSpace::new(&code).unwrap();
        let one = BitVector::ones(48);
        for map in q.basis_maps().iter().take(8) {
            let gamma = q.solve_eta_preimage(map).unwrap();
            for beta in q.code_basis() {
                let image = gamma.coordinatewise_product(beta).unwrap();
                // Choose the second argument so that image + rest = 1 + β.
                let rest = image.xor(&one).xor(beta);
                assert_eq!(
                    top_weight_shift(&image, &rest).unwrap(),
                    HalfMod1::Zero,
                    "⟨δ(β), 1+β⟩ must be even"
                );
            }
        }
    }

    #[test]
    fn sigma_relabel_cases() {
        let n = 12;
        let alpha = BitVector::from_support(n, &[0, 5]);
        let beta = BitVector::from_support(n, &[5, 6, 7, 8]);
        let gamma = BitVector::from_support(n, &[1, 2]);
        let (b1, g1) = sigma_relabel(&BitVector::zeros(n), &beta, &gamma).unwrap();
        assert_eq!((b1, g1.clone()), (beta.clone(), gamma.clone()));
        // Disjoint support leaves the label unchanged.
        let disjoint = BitVector::from_support(n, &[0, 1]);
        let (_, g2) = sigma_relabel(&disjoint, &beta, &gamma).unwrap();
        assert_eq!(g2, gamma);
        // Applying σ_α twice returns the original label.
        let (b3, g3) = sigma_relabel(&alpha, &beta, &gamma).unwrap();
        let (b4, g4) = sigma_relabel(&alpha, &b3, &g3).unwrap();
        assert_eq!((b4, g4), (beta, gamma));
    }

    #[test]
    fn code_text_round_trip() {
        let d = dex();
        let text = d.to_text();
        assert!(text.starts_with("code n=48 dim=9 name=Dex\n"));
        let parsed = BinaryCode::from_text(&text).unwrap();
        assert_eq!(parsed, d);
        assert_eq!(parsed.name(), Some("Dex"));
    }
}
