//! Markov kernels between finite spaces, with exact rational entries.
//!
//! A [`Kernel`] from `A` to `B` stores the probability `k(b ∥ a)` for every
//! pair of elements, as a dense table of rationals; each row (one per source
//! element) sums to exactly 1. Composition is matrix multiplication, the
//! tensor product runs kernels in parallel, and the structural kernels
//! (identity, copy, delete, swap) give the category its copy/delete
//! structure. Conditionals and Bayesian inverses always exist here; on rows
//! with zero mass they are not uniquely determined and are filled by
//! [`unconstrained_row`].

use num_traits::{One, Signed, Zero};

use super::space::FinSpace;
use super::FinStochError;
use crate::rational::{format_rat, Rat};

/// Fill policy for conditional/inverse rows that the defining equations do
/// not constrain (zero marginal or zero evidence): the uniform distribution.
///
/// Kept as the single place to change if a different canonical fill is ever
/// needed.
pub(crate) fn unconstrained_row(len: usize) -> Vec<Rat> {
    let p = Rat::new(1.into(), (len as i64).into());
    vec![p; len]
}

/// An exact-rational Markov kernel between finite spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    src: FinSpace,
    dst: FinSpace,
    /// `rows[a][b] = k(b ∥ a)`; every row sums to exactly 1.
    rows: Vec<Vec<Rat>>,
}

impl Kernel {
    /// Builds a kernel from explicit rows, validating stochasticity.
    pub fn from_rows(
        src: FinSpace,
        dst: FinSpace,
        rows: Vec<Vec<Rat>>,
    ) -> Result<Self, FinStochError> {
        if rows.len() != src.len() || rows.iter().any(|r| r.len() != dst.len()) {
            return Err(FinStochError::ShapeMismatch {
                src: src.name(),
                dst: dst.name(),
            });
        }
        for (a, row) in rows.iter().enumerate() {
            for (b, p) in row.iter().enumerate() {
                if p.is_negative() {
                    return Err(FinStochError::NegativeEntry {
                        row: src.label(a),
                        col: dst.label(b),
                        value: format_rat(p),
                    });
                }
            }
            let sum: Rat = row.iter().sum();
            if !sum.is_one() {
                return Err(FinStochError::NonStochasticRow {
                    row: src.label(a),
                    sum: format_rat(&sum),
                });
            }
        }
        Ok(Kernel { src, dst, rows })
    }

    /// Builds a kernel entrywise from a function of (source, destination)
    /// element indices.
    pub fn from_fn(
        src: FinSpace,
        dst: FinSpace,
        f: impl Fn(usize, usize) -> Rat,
    ) -> Result<Self, FinStochError> {
        let rows = src
            .elements()
            .map(|a| dst.elements().map(|b| f(a, b)).collect())
            .collect();
        Kernel::from_rows(src, dst, rows)
    }

    /// The deterministic kernel induced by a function on element indices.
    pub fn deterministic(
        src: FinSpace,
        dst: FinSpace,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self, FinStochError> {
        let images: Vec<usize> = src.elements().map(&f).collect();
        if let Some(bad) = images.iter().find(|&&b| b >= dst.len()) {
            return Err(FinStochError::FactorOutOfRange {
                index: *bad,
                space: dst.name(),
            });
        }
        Kernel::from_fn(src, dst, |a, b| {
            if images[a] == b {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
    }

    /// Identity kernel on a space.
    pub fn identity(space: &FinSpace) -> Kernel {
        Kernel::deterministic(space.clone(), space.clone(), |a| a)
            .expect("identity is always well-formed")
    }

    /// Copy kernel `A → A⊗A`: sends each value to the pair of identical
    /// copies (copies values, not distributions).
    pub fn copy(space: &FinSpace) -> Kernel {
        let n = space.len();
        let dst = space.tensor(space);
        Kernel::deterministic(space.clone(), dst, |a| a * n + a)
            .expect("copy is always well-formed")
    }

    /// Delete kernel `A → 𝟙`: the unique kernel into the unit space.
    pub fn delete(space: &FinSpace) -> Kernel {
        Kernel::deterministic(space.clone(), FinSpace::unit(), |_| 0)
            .expect("delete is always well-formed")
    }

    /// Swap kernel `A⊗B → B⊗A`.
    pub fn swap(a: &FinSpace, b: &FinSpace) -> Kernel {
        let src = a.tensor(b);
        let dst = b.tensor(a);
        let (na, nb) = (a.len(), b.len());
        Kernel::deterministic(src, dst, move |i| {
            let (ia, ib) = (i / nb, i % nb);
            ib * na + ia
        })
        .expect("swap is always well-formed")
    }

    /// Kernel with every row uniform over the destination.
    pub fn uniform(src: FinSpace, dst: FinSpace) -> Kernel {
        let row = unconstrained_row(dst.len());
        let rows = vec![row; src.len()];
        Kernel { src, dst, rows }
    }

    pub fn src(&self) -> &FinSpace {
        &self.src
    }

    pub fn dst(&self) -> &FinSpace {
        &self.dst
    }

    /// `k(b ∥ a)`.
    pub fn prob(&self, a: usize, b: usize) -> &Rat {
        &self.rows[a][b]
    }

    pub fn row(&self, a: usize) -> &[Rat] {
        &self.rows[a]
    }

    /// Sequential composition `self ⨟ g` (matrix multiplication).
    pub fn compose(&self, g: &Kernel) -> Result<Kernel, FinStochError> {
        if self.dst != g.src {
            return Err(FinStochError::ComposeMismatch {
                left_dst: self.dst.name(),
                right_src: g.src.name(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                g.dst
                    .elements()
                    .map(|c| {
                        row.iter()
                            .zip(&g.rows)
                            .filter(|(p, _)| !p.is_zero())
                            .map(|(p, grow)| p * &grow[c])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Kernel {
            src: self.src.clone(),
            dst: g.dst.clone(),
            rows,
        })
    }

    /// Parallel composition `self ⊗ g`.
    pub fn tensor(&self, g: &Kernel) -> Kernel {
        let src = self.src.tensor(&g.src);
        let dst = self.dst.tensor(&g.dst);
        let (gs, gd) = (g.src.len(), g.dst.len());
        let rows = src
            .elements()
            .map(|i| {
                let (a, c) = (i / gs, i % gs);
                dst.elements()
                    .map(|j| {
                        let (b, d) = (j / gd, j % gd);
                        &self.rows[a][b] * &g.rows[c][d]
                    })
                    .collect()
            })
            .collect();
        Kernel { src, dst, rows }
    }

    /// Marginalizes/reorders the destination: keeps the listed factor
    /// positions in the listed order, summing over the dropped ones.
    pub fn project_dst(&self, keep: &[usize]) -> Result<Kernel, FinStochError> {
        for (i, &p) in keep.iter().enumerate() {
            if p >= self.dst.factor_count() {
                return Err(FinStochError::FactorOutOfRange {
                    index: p,
                    space: self.dst.name(),
                });
            }
            if keep[..i].contains(&p) {
                return Err(FinStochError::RepeatedFactor { index: p });
            }
        }
        let new_dst = self.dst.factor_subspace(keep)?;
        let mut rows = vec![vec![Rat::zero(); new_dst.len()]; self.src.len()];
        for a in self.src.elements() {
            for b in self.dst.elements() {
                let p = &self.rows[a][b];
                if p.is_zero() {
                    continue;
                }
                let parts = self.dst.decode(b);
                let kept: Vec<usize> = keep.iter().map(|&k| parts[k]).collect();
                let target = new_dst.encode(&kept);
                rows[a][target] += p;
            }
        }
        Ok(Kernel {
            src: self.src.clone(),
            dst: new_dst,
            rows,
        })
    }

    /// Marginal of a kernel into a product, keeping one factor.
    pub fn marginalize(&self, keep: usize) -> Result<Kernel, FinStochError> {
        if !self.dst.is_product() {
            return Err(FinStochError::NotAProduct {
                space: self.dst.name(),
            });
        }
        self.project_dst(&[keep])
    }

    /// Reorders the source factors by `perm`: the new source has factor
    /// `perm[i]` of the old source at position `i`.
    pub fn reorder_src(&self, perm: &[usize]) -> Result<Kernel, FinStochError> {
        let new_src = self.src.factor_subspace(perm)?;
        if perm.len() != self.src.factor_count() {
            return Err(FinStochError::ShapeMismatch {
                src: self.src.name(),
                dst: new_src.name(),
            });
        }
        let rows = new_src
            .elements()
            .map(|i| {
                let parts = new_src.decode(i);
                let mut orig = vec![0; parts.len()];
                for (pos, &factor) in perm.iter().enumerate() {
                    orig[factor] = parts[pos];
                }
                self.rows[self.src.encode(&orig)].clone()
            })
            .collect();
        Ok(Kernel {
            src: new_src,
            dst: self.dst.clone(),
            rows,
        })
    }

    /// Splits a kernel `Z → A⊗B` into a marginal `Z → A` and a conditional
    /// `Z⊗A → B` with `q((a,b) ∥ z) = marginal(a ∥ z)·conditional(b ∥ (z,a))`.
    ///
    /// `split_at` gives the number of destination factors forming `A`. Rows
    /// of the conditional with zero marginal mass are unconstrained and are
    /// filled uniformly.
    pub fn disintegrate(&self, split_at: usize) -> Result<(Kernel, Kernel), FinStochError> {
        if !self.dst.is_product() {
            return Err(FinStochError::NotAProduct {
                space: self.dst.name(),
            });
        }
        if split_at == 0 || split_at >= self.dst.factor_count() {
            return Err(FinStochError::FactorOutOfRange {
                index: split_at,
                space: self.dst.name(),
            });
        }
        let a_positions: Vec<usize> = (0..split_at).collect();
        let b_positions: Vec<usize> = (split_at..self.dst.factor_count()).collect();
        let a_space = self.dst.factor_subspace(&a_positions)?;
        let b_space = self.dst.factor_subspace(&b_positions)?;
        let marginal = self.project_dst(&a_positions)?;

        let cond_src = self.src.tensor(&a_space);
        let mut cond_rows = Vec::with_capacity(cond_src.len());
        for z in self.src.elements() {
            for a in a_space.elements() {
                let mass = marginal.prob(z, a);
                if mass.is_zero() {
                    cond_rows.push(unconstrained_row(b_space.len()));
                } else {
                    let row = b_space
                        .elements()
                        .map(|b| {
                            let mut parts = a_space.decode(a);
                            parts.extend(b_space.decode(b));
                            self.prob(z, self.dst.encode(&parts)) / mass
                        })
                        .collect();
                    cond_rows.push(row);
                }
            }
        }
        let conditional = Kernel {
            src: cond_src,
            dst: b_space,
            rows: cond_rows,
        };
        Ok((marginal, conditional))
    }

    /// Parametrized Bayesian inverse of `f : A → B` with respect to a prior
    /// `Z → A`: the kernel `f† : Z⊗B → A` with
    /// `prior(a ∥ z)·f(b ∥ a) = predictive(b ∥ z)·f†(a ∥ (z,b))`,
    /// where `predictive = prior ⨟ f`. Rows with zero evidence are filled
    /// uniformly.
    pub fn bayes_invert(prior: &Kernel, f: &Kernel) -> Result<Kernel, FinStochError> {
        if prior.dst != f.src {
            return Err(FinStochError::ComposeMismatch {
                left_dst: prior.dst.name(),
                right_src: f.src.name(),
            });
        }
        let predictive = prior.compose(f)?;
        let src = prior.src.tensor(&f.dst);
        let mut rows = Vec::with_capacity(src.len());
        for z in prior.src.elements() {
            for b in f.dst.elements() {
                let evidence = predictive.prob(z, b);
                if evidence.is_zero() {
                    rows.push(unconstrained_row(f.src.len()));
                } else {
                    rows.push(
                        f.src
                            .elements()
                            .map(|a| prior.prob(z, a) * f.prob(a, b) / evidence)
                            .collect(),
                    );
                }
            }
        }
        Ok(Kernel {
            src,
            dst: f.src.clone(),
            rows,
        })
    }

    /// True iff every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().all(|row| row.iter().any(|p| p.is_one()))
    }

    /// Evaluates the copy-equation characterization of determinism:
    /// `self ⨟ copy(dst) = copy(src) ⨟ (self ⊗ self)`. Equivalent to
    /// [`Kernel::is_deterministic`] in the finite case.
    pub fn satisfies_determinism_equation(&self) -> bool {
        let lhs = self
            .compose(&Kernel::copy(&self.dst))
            .expect("dst matches copy src");
        let rhs = Kernel::copy(&self.src)
            .compose(&self.tensor(self))
            .expect("copy dst matches tensor src");
        lhs == rhs
    }

    /// For a deterministic kernel, the image element of a source element.
    pub fn image_of(&self, a: usize) -> Option<usize> {
        self.rows[a].iter().position(|p| p.is_one())
    }

    /// Exact equality after checking both kernels share the same spaces.
    pub fn eq_checked(&self, other: &Kernel) -> Result<bool, FinStochError> {
        if self.src != other.src || self.dst != other.dst {
            return Err(FinStochError::SpaceMismatch {
                a: format!("{} → {}", self.src.name(), self.dst.name()),
                b: format!("{} → {}", other.src.name(), other.dst.name()),
            });
        }
        Ok(self.rows == other.rows)
    }
}

/// A probability distribution: a kernel out of the unit space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dist(Kernel);

impl Dist {
    /// Distribution from explicit weights (must sum to exactly 1).
    pub fn from_weights(space: FinSpace, weights: Vec<Rat>) -> Result<Self, FinStochError> {
        Kernel::from_rows(FinSpace::unit(), space, vec![weights]).map(Dist)
    }

    pub fn uniform(space: FinSpace) -> Dist {
        let row = unconstrained_row(space.len());
        Dist::from_weights(space, row).expect("uniform weights sum to 1")
    }

    pub fn point(space: FinSpace, index: usize) -> Result<Dist, FinStochError> {
        if index >= space.len() {
            return Err(FinStochError::FactorOutOfRange {
                index,
                space: space.name(),
            });
        }
        let weights = space
            .elements()
            .map(|i| if i == index { Rat::one() } else { Rat::zero() })
            .collect();
        Dist::from_weights(space, weights)
    }

    pub fn space(&self) -> &FinSpace {
        self.0.dst()
    }

    pub fn p(&self, index: usize) -> &Rat {
        self.0.prob(0, index)
    }

    pub fn weights(&self) -> &[Rat] {
        self.0.row(0)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.0
    }

    /// Pushes the distribution through a kernel.
    pub fn push_through(&self, k: &Kernel) -> Result<Dist, FinStochError> {
        self.0.compose(k).map(Dist)
    }

    /// Elements with positive probability.
    pub fn support(&self) -> Vec<usize> {
        self.space()
            .elements()
            .filter(|&i| !self.p(i).is_zero())
            .collect()
    }
}

impl From<Dist> for Kernel {
    fn from(d: Dist) -> Kernel {
        d.0
    }
}

impl TryFrom<Kernel> for Dist {
    type Error = FinStochError;

    fn try_from(k: Kernel) -> Result<Dist, FinStochError> {
        if !k.src().is_unit() {
            return Err(FinStochError::NotADistribution { src: k.src().name() });
        }
        Ok(Dist(k))
    }
}
