//! Seeded property suites behind the `selftest` command. The report is a
//! pure function of the seed.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divisor_trees::fixtures::sd_palette;
use crate::divisor_trees::{enumerate_sd, random_dd, random_sd, SdBounds, Side};
use crate::floer::fixtures::{obstructed, random_unobstructed};
use crate::floer::{d_squared_audit, floer_homology};
use crate::linalg::Matrix;
use crate::novikov::{map_decomposition, Novikov};
use crate::spectral::{converge_check, random_complex, Fringe};
use crate::strata::{
    close_under_moves, closure_axioms, flatten, forget_boundary_mark, glue, split,
    stratum_dimension, Poset, StrataError,
};
use crate::trees::{level_functions, QuasiOrder};
use crate::{q, qr, SCHEMA};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    /// One line per failing case, empty when the suite passes.
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub schema: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

struct Suite {
    name: &'static str,
    cases: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            cases: self.cases,
            failures: self.failures,
        }
    }
}

fn dimensions() -> SuiteResult {
    let mut s = Suite::new("dimension identity and even codimension");
    let p = sd_palette();
    let bounds = SdBounds {
        max_interior: 3,
        max_levels: 2,
        max_divisor: 1,
        max_marks: 1,
        ..SdBounds::default()
    };
    let trees = enumerate_sd(&p, "p", "q", &bounds).unwrap_or_default();
    for (i, t) in trees.iter().enumerate() {
        for n in [2, 3] {
            let here = stratum_dimension(t, &p, n);
            let top = stratum_dimension(&flatten(t), &p, n);
            let ok = match (&here, &top) {
                (Ok(a), Ok(b)) => {
                    a.closed_form.is_none_or(|c| c == a.sum_dimension)
                        && a.quotient_dimension == b.quotient_dimension - 2 * t.num_levels() as i64
                        && a.corner_codim + 1 == t.interior().len()
                }
                _ => false,
            };
            s.check(ok, || format!("tree {i} ({}), n = {n}", t.canonical_form()));
        }
    }
    s.finish()
}

fn gluing(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("split inverts glue");
    let p = sd_palette();
    let mut attempts = 0;
    while s.cases < 30 && attempts < 1000 {
        attempts += 1;
        let (Some(l), Some(r)) = (
            random_sd(&p, "p", "r", 2, rng),
            random_sd(&p, "r", "q", 2, rng),
        ) else {
            continue;
        };
        let ok = match glue(&l, &r) {
            Ok(glued) => {
                !glued.is_empty()
                    && glued.iter().all(|g| {
                        split(&g.tree, l.strip_path().len()).is_ok_and(|(a, b)| {
                            a.canonical_form() == l.canonical_form()
                                && b.canonical_form() == r.canonical_form()
                        })
                    })
            }
            Err(_) => false,
        };
        s.check(ok, || {
            format!("{} glued to {}", l.canonical_form(), r.canonical_form())
        });
    }
    s.finish()
}

fn closure(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("closure axioms");
    let bounds = SdBounds {
        max_interior: 2,
        max_levels: 2,
        max_divisor: 1,
        max_marks: 1,
        ..SdBounds::default()
    };
    let seeds = enumerate_sd(&sd_palette(), "p", "q", &bounds).unwrap_or_default();
    let poset = Poset::from_universe(&close_under_moves(&seeds));
    let report = closure_axioms(&poset, 50, rng);
    s.check(report.holds(), || format!("{report:?}"));
    s.check(poset.is_antisymmetric(), || {
        "shrinking order is not antisymmetric".into()
    });
    s.finish()
}

fn quasi_orders(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("quasi orders and level functions");
    for n in 1..=4 {
        let strict: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        let base = QuasiOrder::generated_by(n, &strict);
        for levels in level_functions(n, &strict, &[], n) {
            let back = QuasiOrder::from_levels(&levels).to_levels(&base);
            s.check(back.as_deref() == Ok(&levels[..]), || {
                format!("{levels:?} over {strict:?}")
            });
        }
    }
    s.finish()
}

fn floer(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("floer square and rank bound");
    let (data, p) = obstructed();
    let audit = d_squared_audit(&data, &p);
    s.check(
        audit.is_ok_and(|a| a.passed() && a.scalar == Some(q(3))),
        || "engineered obstruction".into(),
    );
    for i in 0..30 {
        let (data, p, free) = random_unobstructed(rng);
        let ok = d_squared_audit(&data, &p).is_ok_and(|a| a.observed.is_zero() && a.passed())
            && floer_homology(&data, &p).is_ok_and(|h| h.rank_bound_ok && h.rank == free);
        s.check(ok, || format!("random counts {i}"));
    }
    s.finish()
}

fn novikov(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("novikov decomposition symmetry");
    for i in 0..30 {
        let (m, n) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = Matrix::from_fn(m, n, |_, _| {
            if rng.gen_bool(0.5) {
                Novikov::zero()
            } else {
                Novikov::monomial(q(rng.gen_range(-2..=2)), qr(rng.gen_range(0..=4), 4))
            }
        });
        s.check(
            map_decomposition(&a) == map_decomposition(&a.transpose()),
            || format!("matrix {i}"),
        );
    }
    s.finish()
}

fn spectral(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("spectral sequence convergence");
    for i in 0..20 {
        let fc = random_complex(12, 3, rng);
        for fringe in [Fringe::Image, Fringe::Kernel] {
            s.check(
                converge_check(&fc, fringe).is_ok_and(|r| r.passed()),
                || format!("complex {i}, {fringe:?}"),
            );
        }
    }
    s.finish()
}

fn forgetting(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = Suite::new("forgetful maps");
    let p = sd_palette();
    for i in 0..30 {
        let t = random_dd(
            &p,
            Side::L0,
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
            rng,
        );
        let k = t.ribbon_type().k();
        let j = rng.gen_range(1..=k);
        let beta = t.ribbon_type().beta;
        let ok = match forget_boundary_mark(&t, j) {
            Ok(f) => {
                let ty = f.tree.ribbon_type();
                ty.k() + 1 == k && ty.beta == beta && f.tree.is_valid(&p)
            }
            // A constant disc left with fewer than three boundary points.
            Err(StrataError::Degenerate) => beta.is_zero() && k <= 3,
            Err(_) => false,
        };
        s.check(ok, || format!("tree {i}, mark {j}: {}", t.canonical_form()));
    }
    s.finish()
}

/// Runs every suite. Each suite draws from its own stream derived from `seed`.
pub fn run(seed: u64) -> SelftestReport {
    let stream = |i: u64| {
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i))
    };
    let suites = vec![
        dimensions(),
        gluing(&mut stream(1)),
        closure(&mut stream(2)),
        quasi_orders(&mut stream(3)),
        floer(&mut stream(4)),
        novikov(&mut stream(5)),
        spectral(&mut stream(6)),
        forgetting(&mut stream(7)),
    ];
    SelftestReport {
        schema: SCHEMA.into(),
        seed,
        suites,
    }
}
