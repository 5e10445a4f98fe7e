use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::measures::dual::{all_chi_classes, unit_count_mod, ChiClass};
use crate::measures::{checked_add, checked_mul, coset_sums, SignedMeasure};
use crate::modules::{ConcreteModule, ModuleType, SubmoduleLattice};
use crate::ring::Ring;

/// The piece of a measure living in `V(M, N)`.
#[derive(Clone, Debug)]
pub struct DecompositionComponent {
    /// Index of `N` in the submodule lattice.
    pub kernel: usize,
    pub kernel_generators: Vec<u32>,
    /// Type of `M / N`.
    pub quotient: ModuleType,
    /// Present exactly when `M / N` embeds in `omega`, i.e. is cyclic.
    pub chi_class: Option<ChiClass>,
    pub component: SignedMeasure,
}

/// Precomputed lattice data for decomposing many measures on one module.
///
/// `proj_N nu = sum_{N' >= N} nu_N'` inverts by Moebius inversion on the submodule
/// lattice to `nu_N = sum_{N' >= N} mu(N, N') proj_N' nu`.
pub struct Decomposer {
    lattice: SubmoduleLattice,
    labels: Vec<Vec<u32>>,
    quotients: Vec<ModuleType>,
    chi: HashMap<usize, ChiClass>,
    generators: Vec<Vec<u32>>,
}

impl std::fmt::Debug for Decomposer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Decomposer({:?})", self.lattice)
    }
}

impl Decomposer {
    pub fn new(module: Arc<ConcreteModule>) -> Result<Self> {
        let lattice = SubmoduleLattice::new(module.clone())?;
        let labels = (0..lattice.len()).map(|i| lattice.coset_labels(i)).collect();
        let quotients = (0..lattice.len()).map(|i| lattice.quotient_type(i)).collect();
        let generators = (0..lattice.len()).map(|i| lattice.generators(i)).collect();
        let mut chi = HashMap::new();
        for class in all_chi_classes(&module)? {
            let idx = lattice.find(&class.kernel).expect("kernels are submodules");
            chi.insert(idx, class);
        }
        Ok(Self { lattice, labels, quotients, chi, generators })
    }

    pub fn lattice(&self) -> &SubmoduleLattice {
        &self.lattice
    }
    pub fn module(&self) -> &Arc<ConcreteModule> {
        self.lattice.module()
    }
    pub fn quotient_type(&self, i: usize) -> &ModuleType {
        &self.quotients[i]
    }
    pub fn chi_class(&self, i: usize) -> Option<&ChiClass> {
        self.chi.get(&i)
    }
    pub fn coset_labels(&self, i: usize) -> &[u32] {
        &self.labels[i]
    }

    fn check(&self, nu: &SignedMeasure) -> Result<()> {
        if nu.module().module_type() != self.module().module_type() {
            return Err(Error::usage("measure lives on a different module"));
        }
        Ok(())
    }

    /// Numerators of `proj_N nu` for every lattice member, over the common denominator
    /// `den(nu) * |M|`.
    fn projections(&self, nu: &SignedMeasure) -> Result<Vec<Vec<i128>>> {
        let size = self.module().size() as i128;
        (0..self.lattice.len())
            .map(|i| {
                let factor = size / self.lattice.member(i).size() as i128;
                let sums = coset_sums(nu.numerators(), &self.labels[i])?;
                self.labels[i].iter().map(|&l| checked_mul(sums[l as usize], factor)).collect()
            })
            .collect()
    }

    pub fn proj(&self, nu: &SignedMeasure, i: usize) -> Result<SignedMeasure> {
        self.check(nu)?;
        nu.proj_by_labels(&self.labels[i], self.lattice.member(i).size())
    }

    /// One component per submodule, in lattice order.
    pub fn decompose(&self, nu: &SignedMeasure) -> Result<Vec<DecompositionComponent>> {
        self.check(nu)?;
        let proj = self.projections(nu)?;
        let den = checked_mul(nu.denominator(), self.module().size() as i128)?;
        (0..self.lattice.len())
            .map(|i| {
                let mut acc = vec![0i128; self.module().size() as usize];
                for &(j, mu) in self.lattice.mobius_from(i) {
                    for (a, &p) in acc.iter_mut().zip(&proj[j]) {
                        *a = checked_add(*a, checked_mul(mu as i128, p)?)?;
                    }
                }
                Ok(DecompositionComponent {
                    kernel: i,
                    kernel_generators: self.generators[i].clone(),
                    quotient: self.quotients[i].clone(),
                    chi_class: self.chi.get(&i).cloned(),
                    component: SignedMeasure::from_integers(self.module().clone(), acc, den)?,
                })
            })
            .collect()
    }

    /// `dim V(M, N_i)` from the closed form.
    pub fn dimension_formula(&self, i: usize) -> u64 {
        space_dimension_formula(&self.quotients[i])
    }

    /// `dim V(M, N_i)` by construction; see [`constructed_dimension`].
    pub fn constructed_dimension(&self, i: usize) -> Result<u64> {
        constructed_dimension(&self.lattice, i)
    }
}

/// Decomposes a measure, building the lattice on the fly.
pub fn decompose(nu: &SignedMeasure) -> Result<Vec<DecompositionComponent>> {
    Decomposer::new(nu.module().clone())?.decompose(nu)
}

/// `dim V(M, N) = |(R/I)^*|` when `M/N = R/I` is cyclic, and `0` otherwise.
pub fn space_dimension_formula(quotient: &ModuleType) -> u64 {
    match quotient.lambda() {
        [] => 1,
        [a] => unit_count_mod(quotient.spec(), *a),
        _ => 0,
    }
}

/// Fourier modules over a chain ring are the submodules of `omega = R`: the cyclic ones.
pub fn fourier_module_test(a: &ModuleType) -> bool {
    a.is_cyclic()
}

/// Fourier test by construction: builds `V(A, 0)` and checks it is nonzero.
pub fn fourier_by_construction(a: &ModuleType) -> Result<bool> {
    let ring = Ring::new(a.spec());
    let lattice = SubmoduleLattice::new(Arc::new(ConcreteModule::new(&ring, a.clone())?))?;
    Ok(constructed_dimension(&lattice, lattice.bottom())? > 0)
}

/// `dim V(M, N)` as `|M/N|` minus the rank of the indicator vectors of cosets of the
/// submodules covering `N`.
///
/// `V(M, N)` is the orthogonal complement, inside measures constant on `N`-cosets,
/// of the span of all `P(M, N')` with `N'` strictly above `N`; the covers already span
/// that sum. Indicators are constant on `N`-cosets, so columns are indexed by those.
pub fn constructed_dimension(lattice: &SubmoduleLattice, i: usize) -> Result<u64> {
    let module = lattice.module();
    let base_labels = lattice.coset_labels(i);
    let mut col_of = HashMap::new();
    for &l in &base_labels {
        let next = col_of.len();
        col_of.entry(l).or_insert(next);
    }
    let ncols = col_of.len();
    let mut basis = RowEchelon::new(ncols);
    for j in lattice.covers(i) {
        let labels = lattice.coset_labels(j);
        let mut rows: HashMap<u32, Vec<i128>> = HashMap::new();
        for x in 0..module.size() as usize {
            let row = rows.entry(labels[x]).or_insert_with(|| vec![0; ncols]);
            row[col_of[&base_labels[x]]] = 1;
        }
        let mut keys: Vec<u32> = rows.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            basis.insert(rows.remove(&k).expect("key present"))?;
            if basis.rank() == ncols {
                return Ok(0);
            }
        }
    }
    Ok((ncols - basis.rank()) as u64)
}

/// Incremental fraction-free row echelon form over the rationals.
struct RowEchelon {
    pivots: Vec<Option<Vec<i128>>>,
    rank: usize,
}

impl RowEchelon {
    fn new(ncols: usize) -> Self {
        Self { pivots: vec![None; ncols], rank: 0 }
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn insert(&mut self, mut row: Vec<i128>) -> Result<()> {
        for c in 0..row.len() {
            if row[c] == 0 {
                continue;
            }
            match &self.pivots[c] {
                Some(p) => {
                    let (a, b) = (p[c], row[c]);
                    let g = a.gcd(&b);
                    let (fa, fb) = (a / g, b / g);
                    for k in c..row.len() {
                        row[k] = checked_add(checked_mul(row[k], fa)?, -checked_mul(p[k], fb)?)?;
                    }
                    let g = row.iter().fold(0i128, |acc, x| acc.gcd(x));
                    if g > 1 {
                        row.iter_mut().for_each(|x| *x /= g);
                    }
                }
                None => {
                    self.pivots[c] = Some(row);
                    self.rank += 1;
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}
