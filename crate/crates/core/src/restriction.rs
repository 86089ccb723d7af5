//! Unital embeddings between block algebras, restriction of functionals,
//! pullbacks along unital completely positive maps, and restriction chains.
//!
//! An embedding `ι: ⊕_l M_{m_l} → ⊕_k M_{N_k}` is stored in standard
//! position: target block `k` is the ordered direct sum over source blocks
//! `l` of `a_l ⊗ 1_{c[k][l]}`, optionally conjugated by a unitary `U_k`, so
//! `ι(a)_k = U_k (⊕_l a_l ⊗ 1_{c[k][l]}) U_k*`. Unitality is
//! `Σ_l c[k][l] m_l = N_k`.

use num_complex::Complex64;

use crate::algebra::{BlockAlgebra, BlockOperator, Functional};
use crate::amplitudes::transition_amplitude;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default bound on the number of sites of a product chain.
pub const PRODUCT_CHAIN_CAP: usize = 10;

#[derive(Clone, Debug)]
pub struct UnitalEmbedding {
    source: BlockAlgebra,
    target: BlockAlgebra,
    multiplicity: Vec<Vec<usize>>,
    unitaries: Option<Vec<CMat>>,
}

impl UnitalEmbedding {
    /// `multiplicity[k][l]` copies of source block `l` inside target block `k`.
    pub fn new(
        source: &BlockAlgebra,
        target: &BlockAlgebra,
        multiplicity: Vec<Vec<usize>>,
        unitaries: Option<Vec<CMat>>,
    ) -> Result<Self> {
        if multiplicity.len() != target.num_blocks() {
            return Err(Error::InvalidEmbedding(format!(
                "{} multiplicity rows for {} target blocks",
                multiplicity.len(),
                target.num_blocks()
            )));
        }
        for (k, row) in multiplicity.iter().enumerate() {
            if row.len() != source.num_blocks() {
                return Err(Error::InvalidEmbedding(format!(
                    "row {k} has {} entries for {} source blocks",
                    row.len(),
                    source.num_blocks()
                )));
            }
            let size: usize = row.iter().zip(source.dims()).map(|(c, m)| c * m).sum();
            if size != target.dims()[k] {
                return Err(Error::InvalidEmbedding(format!(
                    "target block {k}: Σ c·m = {size} but the block has size {}",
                    target.dims()[k]
                )));
            }
        }
        for l in 0..source.num_blocks() {
            if multiplicity.iter().all(|row| row[l] == 0) {
                return Err(Error::InvalidEmbedding(format!(
                    "source block {l} is not embedded"
                )));
            }
        }
        if let Some(us) = &unitaries {
            if us.len() != target.num_blocks() {
                return Err(Error::InvalidEmbedding(
                    "one unitary per target block expected".into(),
                ));
            }
            let eps = target.tolerances().num;
            for (k, (u, &n)) in us.iter().zip(target.dims()).enumerate() {
                if u.shape() != (n, n) {
                    return Err(Error::InvalidEmbedding(format!(
                        "unitary {k} must be {n}x{n}"
                    )));
                }
                let dev = linalg::max_abs(&(u.adjoint() * u - CMat::identity(n, n)));
                if dev > eps {
                    return Err(Error::InvalidEmbedding(format!(
                        "unitary {k} deviates by {dev:e}"
                    )));
                }
            }
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            multiplicity,
            unitaries,
        })
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        let m = alg.num_blocks();
        Self {
            source: alg.clone(),
            target: alg.clone(),
            multiplicity: (0..m)
                .map(|k| (0..m).map(|l| usize::from(k == l)).collect())
                .collect(),
            unitaries: None,
        }
    }

    /// `a ↦ a ⊗ 1_c` from `M_n` into `M_{nc}`.
    pub fn ampliation(n: usize, copies: usize) -> Result<Self> {
        let src = BlockAlgebra::new(&[n])?;
        let tgt = BlockAlgebra::new(&[n * copies])?;
        Self::new(&src, &tgt, vec![vec![copies]], None)
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    pub fn multiplicity(&self) -> &[Vec<usize>] {
        &self.multiplicity
    }

    pub fn unitaries(&self) -> Option<&[CMat]> {
        self.unitaries.as_deref()
    }

    /// Offsets of every source block inside target block `k`.
    fn offsets(&self, k: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.source.num_blocks());
        let mut at = 0;
        for (c, m) in self.multiplicity[k].iter().zip(self.source.dims()) {
            out.push(at);
            at += c * m;
        }
        out
    }

    pub fn apply(&self, a: &BlockOperator) -> Result<BlockOperator> {
        self.source.ensure_same(a.algebra())?;
        let mut blocks = Vec::with_capacity(self.target.num_blocks());
        for (k, &nk) in self.target.dims().iter().enumerate() {
            let mut b = CMat::zeros(nk, nk);
            let offsets = self.offsets(k);
            for (l, &ml) in self.source.dims().iter().enumerate() {
                let c = self.multiplicity[k][l];
                let off = offsets[l];
                let al = a.block(l);
                for i in 0..ml {
                    for j in 0..ml {
                        for r in 0..c {
                            b[(off + i * c + r, off + j * c + r)] = al[(i, j)];
                        }
                    }
                }
            }
            if let Some(us) = &self.unitaries {
                b = &us[k] * b * us[k].adjoint();
            }
            blocks.push(b);
        }
        BlockOperator::new(&self.target, blocks)
    }

    /// `self ∘ inner`, with multiplicity matrix `C_self · C_inner` and the
    /// composite unitary `U_self (⊕_l U_inner,l ⊗ 1) P` where `P` reorders
    /// the nested copies into standard position.
    pub fn compose(&self, inner: &UnitalEmbedding) -> Result<UnitalEmbedding> {
        if inner.target != self.source {
            return Err(Error::InvalidEmbedding(format!(
                "cannot compose: {:?} does not feed {:?}",
                inner.target, self.source
            )));
        }
        let src = &inner.source;
        let mid = &self.source;
        let tgt = &self.target;
        let mult: Vec<Vec<usize>> = (0..tgt.num_blocks())
            .map(|k| {
                (0..src.num_blocks())
                    .map(|j| {
                        (0..mid.num_blocks())
                            .map(|l| self.multiplicity[k][l] * inner.multiplicity[l][j])
                            .sum()
                    })
                    .collect()
            })
            .collect();

        let mut unitaries = Vec::with_capacity(tgt.num_blocks());
        let mut trivial = self.unitaries.is_none() && inner.unitaries.is_none();
        for (k, &nk) in tgt.dims().iter().enumerate() {
            let mut perm = CMat::zeros(nk, nk);
            let mut std_offset = Vec::with_capacity(src.num_blocks());
            let mut at = 0;
            for (c, m) in mult[k].iter().zip(src.dims()) {
                std_offset.push(at);
                at += c * m;
            }
            let outer_offsets = self.offsets(k);
            // copies of source block j already placed, counted over (l, r1, r2)
            let mut copies_before = vec![0usize; src.num_blocks()];
            for (l, &off_l) in outer_offsets.iter().enumerate() {
                let c_out = self.multiplicity[k][l];
                if c_out == 0 {
                    continue;
                }
                let inner_offsets = inner.offsets(l);
                for j in 0..src.num_blocks() {
                    let c_in = inner.multiplicity[l][j];
                    if c_in == 0 {
                        continue;
                    }
                    let off_lj = inner_offsets[j];
                    for i in 0..src.dims()[j] {
                        for r1 in 0..c_in {
                            for r2 in 0..c_out {
                                let nested = off_l + (off_lj + i * c_in + r1) * c_out + r2;
                                let m = copies_before[j] + r1 * c_out + r2;
                                let standard = std_offset[j] + i * mult[k][j] + m;
                                perm[(nested, standard)] = linalg::real(1.0);
                            }
                        }
                    }
                    copies_before[j] += c_in * c_out;
                }
            }
            let mut lifted = CMat::zeros(nk, nk);
            for l in 0..mid.num_blocks() {
                let c_out = self.multiplicity[k][l];
                if c_out == 0 {
                    continue;
                }
                let nl = mid.dims()[l];
                let ul = match &inner.unitaries {
                    Some(us) => us[l].clone(),
                    None => CMat::identity(nl, nl),
                };
                let piece = linalg::kron(&ul, &CMat::identity(c_out, c_out));
                let off = outer_offsets[l];
                lifted
                    .view_mut((off, off), (nl * c_out, nl * c_out))
                    .copy_from(&piece);
            }
            let outer = match &self.unitaries {
                Some(us) => us[k].clone(),
                None => CMat::identity(nk, nk),
            };
            let w = outer * lifted * &perm;
            if perm != CMat::identity(nk, nk) {
                trivial = false;
            }
            unitaries.push(w);
        }
        UnitalEmbedding::new(src, tgt, mult, if trivial { None } else { Some(unitaries) })
    }
}

/// `φ ∘ ι`: per target block, rotate by `U_k`, cut out the section of
/// each source block and trace out its multiplicity index.
pub fn restrict(phi: &Functional, iota: &UnitalEmbedding) -> Result<Functional> {
    iota.target.ensure_same(phi.algebra()).map_err(|_| {
        Error::InvalidEmbedding(format!(
            "functional lives on {:?}, embedding targets {:?}",
            phi.algebra(),
            iota.target
        ))
    })?;
    let mut dens: Vec<CMat> = iota
        .source
        .dims()
        .iter()
        .map(|&m| CMat::zeros(m, m))
        .collect();
    for k in 0..iota.target.num_blocks() {
        let rotated = match &iota.unitaries {
            Some(us) => us[k].adjoint() * phi.density(k) * &us[k],
            None => phi.density(k).clone(),
        };
        let offsets = iota.offsets(k);
        for (l, &ml) in iota.source.dims().iter().enumerate() {
            let c = iota.multiplicity[k][l];
            if c == 0 {
                continue;
            }
            let off = offsets[l];
            for i in 0..ml {
                for j in 0..ml {
                    let s: Complex64 = (0..c)
                        .map(|r| rotated[(off + i * c + r, off + j * c + r)])
                        .sum();
                    dens[l][(i, j)] += s;
                }
            }
        }
    }
    Functional::new(&iota.source, dens)
}

/// One Kraus operator `K: ℂ^{N_k} → ℂ^{m_l}` linking source block `l` to
/// target block `k`.
#[derive(Clone, Debug)]
pub struct KrausOp {
    pub source_block: usize,
    pub target_block: usize,
    pub matrix: CMat,
}

/// Unital completely positive map `Φ(a)_k = Σ_{i→k} K_i* a_{l(i)} K_i` from
/// the source algebra to the target algebra.
#[derive(Clone, Debug)]
pub struct UcpMap {
    source: BlockAlgebra,
    target: BlockAlgebra,
    kraus: Vec<KrausOp>,
}

impl UcpMap {
    pub fn new(source: &BlockAlgebra, target: &BlockAlgebra, kraus: Vec<KrausOp>) -> Result<Self> {
        let mut unit: Vec<CMat> = target.dims().iter().map(|&n| CMat::zeros(n, n)).collect();
        for (i, k) in kraus.iter().enumerate() {
            if k.source_block >= source.num_blocks() || k.target_block >= target.num_blocks() {
                return Err(Error::Shape(format!(
                    "Kraus operator {i} names a missing block"
                )));
            }
            let shape = (source.dims()[k.source_block], target.dims()[k.target_block]);
            if k.matrix.shape() != shape {
                return Err(Error::Shape(format!(
                    "Kraus operator {i} is {:?}, expected {shape:?}",
                    k.matrix.shape()
                )));
            }
            unit[k.target_block] += k.matrix.adjoint() * &k.matrix;
        }
        let dev = unit
            .iter()
            .map(|u| linalg::max_abs(&(u - CMat::identity(u.nrows(), u.ncols()))))
            .fold(0.0, f64::max);
        if dev > target.tolerances().num {
            return Err(Error::NotUnital(dev));
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            kraus,
        })
    }

    /// The embedding itself as a UCP map.
    pub fn from_embedding(iota: &UnitalEmbedding) -> Result<Self> {
        let mut kraus = Vec::new();
        for (k, &nk) in iota.target.dims().iter().enumerate() {
            let offsets = iota.offsets(k);
            for (l, &ml) in iota.source.dims().iter().enumerate() {
                let c = iota.multiplicity[k][l];
                let off = offsets[l];
                for r in 0..c {
                    // V e_i = U_k e_{off + i c + r}; the Kraus operator is V*
                    let mut v = CMat::zeros(nk, ml);
                    for i in 0..ml {
                        v[(off + i * c + r, i)] = linalg::real(1.0);
                    }
                    if let Some(us) = &iota.unitaries {
                        v = &us[k] * v;
                    }
                    kraus.push(KrausOp {
                        source_block: l,
                        target_block: k,
                        matrix: v.adjoint(),
                    });
                }
            }
        }
        Self::new(&iota.source, &iota.target, kraus)
    }

    /// `a ↦ U* a U` blockwise.
    pub fn unitary_conjugation(alg: &BlockAlgebra, unitaries: Vec<CMat>) -> Result<Self> {
        if unitaries.len() != alg.num_blocks() {
            return Err(Error::Shape("one unitary per block expected".into()));
        }
        let kraus = unitaries
            .into_iter()
            .enumerate()
            .map(|(k, u)| KrausOp {
                source_block: k,
                target_block: k,
                matrix: u,
            })
            .collect();
        Self::new(alg, alg, kraus)
    }

    /// Complete dephasing in the standard basis of `M_n`.
    pub fn dephasing(n: usize) -> Result<Self> {
        let alg = BlockAlgebra::new(&[n])?;
        let kraus = (0..n)
            .map(|i| {
                let mut p = CMat::zeros(n, n);
                p[(i, i)] = linalg::real(1.0);
                KrausOp {
                    source_block: 0,
                    target_block: 0,
                    matrix: p,
                }
            })
            .collect();
        Self::new(&alg, &alg, kraus)
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    pub fn kraus(&self) -> &[KrausOp] {
        &self.kraus
    }

    pub fn apply(&self, a: &BlockOperator) -> Result<BlockOperator> {
        self.source.ensure_same(a.algebra())?;
        let mut blocks: Vec<CMat> = self
            .target
            .dims()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        for k in &self.kraus {
            blocks[k.target_block] += k.matrix.adjoint() * a.block(k.source_block) * &k.matrix;
        }
        BlockOperator::new(&self.target, blocks)
    }
}

/// `ψ ∘ Φ`, with density `Σ_i K_i D_ψ K_i*` on each source block.
pub fn ucp_pullback(map: &UcpMap, psi: &Functional) -> Result<Functional> {
    map.target.ensure_same(psi.algebra())?;
    let mut dens: Vec<CMat> = map
        .source
        .dims()
        .iter()
        .map(|&n| CMat::zeros(n, n))
        .collect();
    for k in &map.kraus {
        dens[k.source_block] += &k.matrix * psi.density(k.target_block) * k.matrix.adjoint();
    }
    Functional::new(&map.source, dens)
}

/// Increasing family `A_1 ⊂ … ⊂ A_T ⊂ A` of unital subalgebras.
#[derive(Clone, Debug)]
pub struct SubalgebraChain {
    algebras: Vec<BlockAlgebra>,
    connecting: Vec<UnitalEmbedding>,
    last: UnitalEmbedding,
}

impl SubalgebraChain {
    /// `connecting[n]` maps `algebras[n]` into `algebras[n + 1]` (0-based);
    /// `last` maps the final algebra into the ambient one.
    pub fn new(connecting: Vec<UnitalEmbedding>, last: UnitalEmbedding) -> Result<Self> {
        let mut algebras: Vec<BlockAlgebra> = connecting.iter().map(|e| e.source.clone()).collect();
        algebras.push(last.source.clone());
        for (n, e) in connecting.iter().enumerate() {
            if e.target != algebras[n + 1] {
                return Err(Error::InvalidEmbedding(format!(
                    "link {n} targets {:?} but the next algebra is {:?}",
                    e.target,
                    algebras[n + 1]
                )));
            }
        }
        Ok(Self {
            algebras,
            connecting,
            last,
        })
    }

    pub fn len(&self) -> usize {
        self.algebras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.algebras.is_empty()
    }

    pub fn algebras(&self) -> &[BlockAlgebra] {
        &self.algebras
    }

    pub fn connecting(&self) -> &[UnitalEmbedding] {
        &self.connecting
    }

    pub fn last(&self) -> &UnitalEmbedding {
        &self.last
    }

    pub fn ambient(&self) -> &BlockAlgebra {
        &self.last.target
    }

    /// `ι_n: A_n → A` (0-based index), composed from the links.
    pub fn composite(&self, n: usize) -> Result<UnitalEmbedding> {
        if n >= self.len() {
            return Err(Error::Domain(format!(
                "chain has {} members, asked for {n}",
                self.len()
            )));
        }
        self.connecting[n..]
            .iter()
            .rev()
            .try_fold(self.last.clone(), |acc, e| acc.compose(e))
    }

    /// Whether the last algebra already is the ambient algebra.
    pub fn exhausts(&self) -> bool {
        self.last.source == self.last.target
            && self.last.unitaries.is_none()
            && self
                .last
                .multiplicity
                .iter()
                .enumerate()
                .all(|(k, row)| row[k] == 1)
    }

    /// `φ|_{A_n}` for every member, obtained by restricting one link at a
    /// time from the top.
    pub fn restrictions(&self, phi: &Functional) -> Result<Vec<Functional>> {
        let mut out = vec![restrict(phi, &self.last)?];
        for e in self.connecting.iter().rev() {
            let next = restrict(out.last().expect("nonempty"), e)?;
            out.push(next);
        }
        out.reverse();
        Ok(out)
    }
}

/// `a_n = (φ_n^{1/2}|ψ_n^{1/2})` for every member of the chain, in order.
pub fn chain_amplitudes(
    phi: &Functional,
    psi: &Functional,
    chain: &SubalgebraChain,
) -> Result<Vec<f64>> {
    let rp = chain.restrictions(phi)?;
    let rq = chain.restrictions(psi)?;
    rp.iter()
        .zip(&rq)
        .map(|(a, b)| transition_amplitude(a, b))
        .collect()
}

/// Chain `M_d ⊂ M_{d²} ⊂ … ⊂ M_{d^N}` with `a ↦ a ⊗ 1_d` at every step.
pub fn product_chain(
    site_dim: usize,
    sites: usize,
    cap: usize,
) -> Result<(BlockAlgebra, SubalgebraChain)> {
    if sites > cap {
        return Err(Error::TooLarge {
            requested: sites,
            cap,
        });
    }
    if sites == 0 || site_dim == 0 {
        return Err(Error::Domain(
            "a product chain needs at least one site of positive dimension".into(),
        ));
    }
    let connecting = (1..sites)
        .map(|n| UnitalEmbedding::ampliation(site_dim.pow(n as u32), site_dim))
        .collect::<Result<Vec<_>>>()?;
    let ambient = BlockAlgebra::new(&[site_dim.pow(sites as u32)])?;
    let chain = SubalgebraChain::new(connecting, UnitalEmbedding::identity(&ambient))?;
    Ok((ambient, chain))
}

/// `ρ_1 ⊗ … ⊗ ρ_N` on `M_{d^N}`, first site most significant.
pub fn product_state(sites: &[CMat]) -> Result<Functional> {
    let first = sites
        .first()
        .ok_or_else(|| Error::Domain("no sites".into()))?;
    let rho = sites[1..]
        .iter()
        .fold(first.clone(), |acc, s| linalg::kron(&acc, s));
    let alg = BlockAlgebra::new(&[rho.nrows()])?;
    Functional::new(&alg, vec![rho])
}

/// A product chain together with the two product states built from one
/// pair of site densities.
#[derive(Clone, Debug)]
pub struct ProductChain {
    pub ambient: BlockAlgebra,
    pub chain: SubalgebraChain,
    pub phi: Functional,
    pub psi: Functional,
}

pub fn build_product_chain(
    site_a: &CMat,
    site_b: &CMat,
    sites: usize,
    cap: usize,
) -> Result<ProductChain> {
    if site_a.shape() != site_b.shape() || !site_a.is_square() {
        return Err(Error::Shape(
            "site densities must be square and of equal size".into(),
        ));
    }
    let (ambient, chain) = product_chain(site_a.nrows(), sites, cap)?;
    let phi = product_state(&vec![site_a.clone(); sites])?;
    let psi = product_state(&vec![site_b.clone(); sites])?;
    phi.spectra_checked()?;
    psi.spectra_checked()?;
    Ok(ProductChain {
        ambient,
        chain,
        phi,
        psi,
    })
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain(format!("{name} is empty")));
    }
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain(format!(
            "{name} has a negative or non-finite entry"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// A chain on `ℂ^N` together with the two diagonal states.
#[derive(Clone, Debug)]
pub struct LumpedChain {
    pub ambient: BlockAlgebra,
    pub chain: SubalgebraChain,
    pub phi: Functional,
    pub psi: Functional,
}

/// Chain on `ℂ^N` whose `n`-th member (1-based) is spanned by the first
/// `n − 1` coordinate projections and the indicator of the remaining tail,
/// so `A_1 = ℂ1` and `A_N = ℂ^N`.
pub fn build_lumped_diagonal_chain(p: &[f64], q: &[f64]) -> Result<LumpedChain> {
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    if p.len() != q.len() {
        return Err(Error::Domain("p and q have different lengths".into()));
    }
    let n = p.len();
    let ambient = BlockAlgebra::commutative(n)?;
    let members: Vec<BlockAlgebra> = (1..=n)
        .map(BlockAlgebra::commutative)
        .collect::<Result<_>>()?;
    let connecting = (0..n - 1)
        .map(|s| {
            // member s has s singletons + tail; member s+1 splits the tail
            let mult = (0..=s + 1)
                .map(|k| (0..=s).map(|l| usize::from(l == k.min(s))).collect())
                .collect();
            UnitalEmbedding::new(&members[s], &members[s + 1], mult, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let chain = SubalgebraChain::new(connecting, UnitalEmbedding::identity(&ambient))?;
    let phi = Functional::diagonal(&ambient, &p.iter().map(|&x| vec![x]).collect::<Vec<_>>())?;
    let psi = Functional::diagonal(&ambient, &q.iter().map(|&x| vec![x]).collect::<Vec<_>>())?;
    Ok(LumpedChain {
        ambient,
        chain,
        phi,
        psi,
    })
}

/// `p_k = (1 − λ) λ^k` for `k < N − 1` with the tail mass `λ^{N−1}` on the
/// last entry; sums to one exactly.
pub fn geometric_weights(lambda: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("ratio {lambda} outside [0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("need at least one weight".into()));
    }
    let mut w: Vec<f64> = (0..n - 1)
        .map(|k| (1.0 - lambda) * lambda.powi(k as i32))
        .collect();
    w.push(lambda.powi(n as i32 - 1));
    Ok(w)
}
