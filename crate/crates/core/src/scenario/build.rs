use std::sync::{Arc, OnceLock};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    power_of, AdversarySpec, ClassSpec, LearnerSpec, Placement, Planted, ReductionExperts, Scenario,
};
use crate::adversaries::{
    BudgetLabelAdversary, EvenSplitEliminator, GeometricAdaptive, HdkAdversary,
    HdkFullInfoAdversary, ObliviousSequence, RandomTargetOblivious, ValueOptimalAdversary,
};
use crate::classes::{BudgetedVersionSpace, ClassKind, ConceptClass, Instance};
use crate::dist::Label;
use crate::engine::{derive_seed, Adversary, Learner, Mode};
use crate::error::{Error, Result};
use crate::learners::{
    Alpha, BanditRandSoa, ConstantClassLearner, DoublingTrick, FixedLabelLearner, HdkLearner,
    InnerFactory, ReductionLearner, Soa, SoaLearner, UniformLearner, WeightedPlurality,
};
use crate::values::{DetSolver, GameSolver, SolverConfig};

/// Seed streams for strategy randomness, kept apart from the game's draws.
const PLANTED_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;
const GEOMETRIC_STREAM: u64 = 3;

/// The experts learner inside a reduction, ready to be instantiated.
enum ExpertsPlan {
    Soa {
        solver: Arc<GameSolver>,
        vs: BudgetedVersionSpace,
        horizon: u32,
    },
    Plurality,
}

enum LearnerPlan {
    BanditRandSoa {
        solver: Arc<GameSolver>,
        horizon: u32,
    },
    WeightedPlurality {
        n: usize,
        alpha: Alpha,
    },
    Soa,
    Reduction {
        r_inner: u32,
        experts: Arc<ExpertsPlan>,
    },
    ConstantTwoPhase,
    Hdk {
        d: usize,
    },
    Dt {
        n: usize,
        d1: f64,
        d2: f64,
    },
    Uniform,
    Fixed(Label),
}

/// A scenario with its class built and every shared solver precomputed,
/// so that strategies for many trials can be created cheaply.
pub struct Prepared {
    pub scenario: Scenario,
    pub class: Arc<ConceptClass>,
    pub declared: BudgetedVersionSpace,
    game: OnceLock<Arc<GameSolver>>,
    det: OnceLock<Arc<DetSolver>>,
    learner: LearnerPlan,
    value_horizon: Option<u32>,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let class = scenario.class.build()?;
        let declared = BudgetedVersionSpace::uniform(class.clone(), scenario.class.budget());
        let mut p = Prepared {
            scenario: scenario.clone(),
            class,
            declared,
            game: OnceLock::new(),
            det: OnceLock::new(),
            learner: LearnerPlan::Uniform,
            value_horizon: None,
        };
        p.learner = p.plan_learner()?;
        if let AdversarySpec::ValueOptimal { horizon } = &scenario.adversary {
            p.value_horizon = Some(match horizon {
                Some(h) => *h,
                None => p.game_solver().stabilized_value(&p.declared)?.horizon,
            });
        }
        if let AdversarySpec::Oblivious {
            sequence: Some(seq),
            ..
        } = &scenario.adversary
        {
            ObliviousSequence::new(&p.declared, seq.clone())?;
        }
        Ok(p)
    }

    /// Randomized game solver for the declared class, built on first use.
    pub fn game_solver(&self) -> Arc<GameSolver> {
        self.game
            .get_or_init(|| Arc::new(GameSolver::new(self.class.clone(), SolverConfig::default())))
            .clone()
    }

    /// Deterministic game solver for the declared class, built on first use.
    pub fn det_solver(&self) -> Arc<DetSolver> {
        self.det
            .get_or_init(|| {
                Arc::new(DetSolver::new(
                    self.class.clone(),
                    SolverConfig::default().state_cap,
                ))
            })
            .clone()
    }

    pub fn k(&self) -> usize {
        self.class.label_count()
    }

    pub fn n(&self) -> usize {
        self.class.hypothesis_count()
    }

    pub fn r(&self) -> u32 {
        self.scenario.class.budget()
    }

    /// Mistake bound `opt_full^det` of the declared state, which is the
    /// depth of the reduction's guess tree.
    pub fn reduction_depth(&self) -> Result<u32> {
        Ok(self.det_solver().opt_full_det(&self.declared)?.value as u32)
    }

    /// Default `d1 = e/(e-1) k` of the doubling wrapper.
    pub fn default_d1(&self) -> f64 {
        let e = std::f64::consts::E;
        e / (e - 1.0) * self.k() as f64
    }

    /// Default `d2 = max(1, ln(n/k) + (k-1)/d1)`.
    pub fn default_d2(&self, d1: f64) -> f64 {
        let (n, k) = (self.n() as f64, self.k() as f64);
        ((n / k).ln() + (k - 1.0) / d1).max(1.0)
    }

    /// `(d1, d2)` of a doubling learner.
    pub fn dt_constants(&self) -> Option<(f64, f64)> {
        match self.learner {
            LearnerPlan::Dt { d1, d2, .. } => Some((d1, d2)),
            _ => None,
        }
    }

    fn need(&self, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{}: learner {} needs {what}",
                self.scenario.id,
                self.scenario.learner.name()
            )))
        }
    }

    fn plan_learner(&self) -> Result<LearnerPlan> {
        let experts = matches!(self.scenario.class, ClassSpec::Experts { .. });
        Ok(match &self.scenario.learner {
            LearnerSpec::BanditRandSoa { horizon } => {
                let solver = self.game_solver();
                let horizon = match horizon {
                    Some(h) => *h,
                    None => solver.stabilized_value(&self.declared)?.horizon,
                };
                LearnerPlan::BanditRandSoa { solver, horizon }
            }
            LearnerSpec::WeightedPlurality { alpha } => {
                self.need(experts, "an experts class")?;
                LearnerPlan::WeightedPlurality {
                    n: self.n(),
                    alpha: alpha.resolve()?,
                }
            }
            LearnerSpec::Soa => LearnerPlan::Soa,
            LearnerSpec::Reduction { experts } => {
                let k = self.k();
                let r_inner = self.reduction_depth()?;
                let n = k
                    .checked_pow(r_inner)
                    .ok_or_else(|| Error::SizeCap(format!("k^r for k = {k}, r = {r_inner}")))?;
                let plan = match experts {
                    ReductionExperts::BanditRandSoa => {
                        let class = Arc::new(ConceptClass::experts_unchecked(n, k));
                        let solver =
                            Arc::new(GameSolver::new(class.clone(), SolverConfig::default()));
                        let vs = BudgetedVersionSpace::uniform(class, r_inner);
                        let horizon = solver.stabilized_value(&vs)?.horizon;
                        ExpertsPlan::Soa {
                            solver,
                            vs,
                            horizon,
                        }
                    }
                    ReductionExperts::WeightedPlurality => ExpertsPlan::Plurality,
                };
                LearnerPlan::Reduction {
                    r_inner,
                    experts: Arc::new(plan),
                }
            }
            LearnerSpec::ConstantTwoPhase => {
                self.need(
                    matches!(self.class.kind(), ClassKind::Constant),
                    "a constant class",
                )?;
                LearnerPlan::ConstantTwoPhase
            }
            LearnerSpec::HdkTwoPhase => match self.class.kind() {
                ClassKind::Hdk { d, .. } => LearnerPlan::Hdk { d },
                _ => {
                    return Err(Error::Config(format!(
                        "{}: hdk_two_phase needs an H(d,k) class",
                        self.scenario.id
                    )))
                }
            },
            LearnerSpec::Dt { d1, d2 } => {
                self.need(experts, "an experts class")?;
                let d1 = d1.unwrap_or_else(|| self.default_d1());
                let d2 = d2.unwrap_or_else(|| self.default_d2(d1));
                LearnerPlan::Dt {
                    n: self.n(),
                    d1,
                    d2,
                }
            }
            LearnerSpec::Uniform => LearnerPlan::Uniform,
            LearnerSpec::Fixed { label } => {
                self.class.check_label(*label)?;
                LearnerPlan::Fixed(*label)
            }
        })
    }

    /// A fresh learner. Learners draw no randomness of their own: the
    /// engine samples their predictions.
    pub fn learner(&self, _seed: u64) -> Result<Box<dyn Learner>> {
        let k = self.k();
        let r = self.r();
        Ok(match &self.learner {
            LearnerPlan::BanditRandSoa { solver, horizon } => Box::new(
                BanditRandSoa::with_horizon(solver.clone(), self.declared.clone(), *horizon),
            ),
            LearnerPlan::WeightedPlurality { n, alpha } => {
                Box::new(WeightedPlurality::new(*n, k, r, *alpha)?)
            }
            LearnerPlan::Soa => Box::new(SoaLearner::new(
                self.det_solver(),
                self.declared.clone(),
                self.scenario.mode,
            )),
            LearnerPlan::Reduction { r_inner, experts } => {
                let inner = Box::new(Soa::new(self.det_solver(), self.declared.clone()));
                let plan = experts.clone();
                let factory = move |n: usize, k: usize, r: u32| -> Result<Box<dyn Learner>> {
                    Ok(match plan.as_ref() {
                        ExpertsPlan::Soa {
                            solver,
                            vs,
                            horizon,
                        } => Box::new(BanditRandSoa::with_horizon(
                            solver.clone(),
                            vs.clone(),
                            *horizon,
                        )),
                        ExpertsPlan::Plurality => Box::new(WeightedPlurality::new(
                            n,
                            k,
                            r,
                            Alpha::Finite(std::f64::consts::E),
                        )?),
                    })
                };
                Box::new(ReductionLearner::new(inner, k, *r_inner, &factory)?)
            }
            LearnerPlan::ConstantTwoPhase => Box::new(ConstantClassLearner::new(k, r)?),
            LearnerPlan::Hdk { d } => Box::new(HdkLearner::new(*d, k - 1)?),
            LearnerPlan::Dt { n, d1, d2 } => {
                let n = *n;
                let make: Arc<InnerFactory> =
                    Arc::new(move |guess: u32| -> Result<Box<dyn Learner>> {
                        Ok(Box::new(WeightedPlurality::new(
                            n,
                            k,
                            guess,
                            Alpha::Finite(std::f64::consts::E),
                        )?))
                    });
                Box::new(DoublingTrick::new(make, *d1, *d2, self.class.clone())?)
            }
            LearnerPlan::Uniform => Box::new(UniformLearner::new(k)),
            LearnerPlan::Fixed(label) => Box::new(FixedLabelLearner::new(k, *label)),
        })
    }

    /// A fresh adversary for the trial with seed `seed`.
    pub fn adversary(&self, seed: u64) -> Result<Box<dyn Adversary>> {
        let k = self.k();
        let r = self.r();
        Ok(match &self.scenario.adversary {
            AdversarySpec::Oblivious { sequence, planted } => {
                let seq = match (sequence, planted) {
                    (Some(seq), _) => seq.clone(),
                    (None, Some(p)) => self.planted(p, derive_seed(seed, PLANTED_STREAM))?,
                    (None, None) => unreachable!("validated"),
                };
                Box::new(ObliviousSequence::new(&self.declared, seq)?)
            }
            AdversarySpec::EvenSplit => Box::new(EvenSplitEliminator::new(self.n(), k)?),
            AdversarySpec::BudgetLabel => Box::new(BudgetLabelAdversary::new(k, r)?),
            AdversarySpec::RandomTarget => {
                let m = power_of(self.n(), k).expect("validated");
                Box::new(RandomTargetOblivious::new(
                    k,
                    m,
                    derive_seed(seed, TARGET_STREAM),
                )?)
            }
            AdversarySpec::Geometric => {
                let s = derive_seed(seed, GEOMETRIC_STREAM);
                if self.class.is_experts() {
                    Box::new(GeometricAdaptive::new(k, r, s)?)
                } else {
                    Box::new(GeometricAdaptive::on_constant_class(k, r, s)?)
                }
            }
            AdversarySpec::Hdk => Box::new(HdkAdversary::with_class(self.class.clone())?),
            AdversarySpec::HdkFullinfo => {
                Box::new(HdkFullInfoAdversary::with_class(self.class.clone())?)
            }
            AdversarySpec::ValueOptimal { .. } => Box::new(ValueOptimalAdversary::new(
                self.game_solver(),
                self.declared.clone(),
                self.value_horizon.expect("planned"),
            )),
        })
    }

    /// Draws a planted sequence.
    fn planted(&self, p: &Planted, seed: u64) -> Result<Vec<(Instance, Label)>> {
        let k = self.k();
        if p.target >= self.n() {
            return Err(Error::Config(format!(
                "planted target {} out of range",
                p.target
            )));
        }
        let c = p.corruptions as usize;
        if c > p.length {
            return Err(Error::Config("more corruptions than rounds".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corrupt: Vec<bool> = {
            let mut v = vec![false; p.length];
            match p.placement {
                Placement::Random => sample(&mut rng, p.length, c)
                    .into_iter()
                    .for_each(|i| v[i] = true),
                Placement::Front => v[..c].iter_mut().for_each(|b| *b = true),
                Placement::Back => v[p.length - c..].iter_mut().for_each(|b| *b = true),
            }
            v
        };
        let mut out = Vec::with_capacity(p.length);
        for &bad in &corrupt {
            let x = match self.class.domain_size() {
                Some(dom) => Instance::Point(rng.gen_range(0..dom)),
                None => Instance::Profile((0..self.n()).map(|_| rng.gen_range(0..k)).collect()),
            };
            let truth = self.class.predict(p.target, &x);
            let y = if bad {
                // uniform over the other labels
                let o = rng.gen_range(0..k - 1);
                if o >= truth {
                    o + 1
                } else {
                    o
                }
            } else {
                truth
            };
            out.push((x, y));
        }
        Ok(out)
    }

    pub fn mode(&self) -> Mode {
        self.scenario.mode
    }
}
