use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::masks::{MaskMode, MaskSet};
use super::message::Transcript;
use super::roles::{Agent, SystemOperator};
use crate::crypto::{CryptoContext, PaillierKeyPair, SchemeKey, SingleModKey, DEFAULT_M_BITS};
use crate::error::ProtocolError;
use crate::optcore::{Method, PrimalDualState, PrimalPoint, ProblemSpec, SolverParams};
use crate::scalar::Real;

/// Default bound on any single message component.
pub const DEFAULT_B_MAX: f64 = 1e3;

const KEYGEN_STREAM: u64 = 0;
const SO_STREAM: u64 = 1;
const AGENT_STREAM_BASE: u64 = 2;

/// Independent ChaCha stream per role, all derived from one master seed.
pub(crate) fn role_rng(master_seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeChoice {
    SingleMod {
        key_bits: u64,
        m_bits: u32,
        /// Pre-agreed `w`; generated from the master seed when absent.
        modulus: Option<BigUint>,
    },
    Paillier {
        key_bits: u64,
        primes: Option<(BigUint, BigUint)>,
    },
}

impl SchemeChoice {
    /// 51-bit SingleMod key, `m` up to 40 bits.
    pub fn singlemod() -> Self {
        SchemeChoice::SingleMod {
            key_bits: 51,
            m_bits: DEFAULT_M_BITS,
            modulus: None,
        }
    }

    pub fn paillier() -> Self {
        SchemeChoice::Paillier {
            key_bits: 512,
            primes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CryptoSettings {
    pub scheme: SchemeChoice,
    pub sigma: u32,
}

impl CryptoSettings {
    pub fn new(scheme: SchemeChoice, sigma: u32) -> Self {
        Self { scheme, sigma }
    }

    /// Builds the shared key. Keys drawn here come from a dedicated stream of
    /// the master seed, so they are reproducible and do not perturb the
    /// mask or encryption randomness.
    pub fn build_context(&self, master_seed: u64) -> Result<CryptoContext, ProtocolError> {
        let mut rng = role_rng(master_seed, KEYGEN_STREAM);
        let key = match &self.scheme {
            SchemeChoice::SingleMod {
                key_bits,
                m_bits,
                modulus,
            } => SchemeKey::SingleMod(match modulus {
                Some(w) => SingleModKey::from_modulus(w.clone(), *m_bits, &mut rng)?,
                None => SingleModKey::generate(*key_bits, *m_bits, &mut rng)?,
            }),
            SchemeChoice::Paillier { key_bits, primes } => SchemeKey::Paillier(match primes {
                Some((p, q)) => PaillierKeyPair::from_primes(p.clone(), q.clone())?,
                None => PaillierKeyPair::generate(*key_bits, &mut rng)?,
            }),
        };
        Ok(CryptoContext::new(key, self.sigma)?)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig<T> {
    pub spec: ProblemSpec<T>,
    pub params: SolverParams<T>,
    pub method: Method,
    pub crypto: CryptoSettings,
    /// Bound on the magnitude of any component an agent encrypts.
    pub b_max: T,
    pub master_seed: u64,
    pub init: Option<PrimalDualState<T>>,
    /// Overrides the automatic (objective, constraint) mask modes.
    pub mask_modes: Option<(MaskMode, MaskMode)>,
}

impl<T: Real> ProtocolConfig<T> {
    pub fn new(spec: ProblemSpec<T>, params: SolverParams<T>, crypto: CryptoSettings, master_seed: u64) -> Self {
        Self {
            spec,
            params,
            method: Method::Spds,
            crypto,
            b_max: T::lit(DEFAULT_B_MAX),
            master_seed,
            init: None,
            mask_modes: None,
        }
    }

    pub fn mask_modes(&self) -> (MaskMode, MaskMode) {
        self.mask_modes.unwrap_or_else(|| {
            (
                MaskMode::for_offset(self.spec.c()),
                MaskMode::for_offset(self.spec.d()),
            )
        })
    }

    /// The aggregate of `n` components bounded by `B_max` must not wrap:
    /// `modulus > 2·10^σ·B_max·n`.
    pub fn check_overflow_budget(&self, ctx: &CryptoContext) -> Result<(), ProtocolError> {
        let b_max = self.b_max.as_f64();
        if !(b_max > 0.0) || !b_max.is_finite() {
            return Err(ProtocolError::InvalidConfig("B_max must be positive and finite".into()));
        }
        let b = BigUint::from(b_max.ceil().to_u128().unwrap_or(u128::MAX));
        let needed = BigUint::from(10u32).pow(ctx.codec().sigma()) * 2u32 * b * self.spec.n();
        if ctx.codec().modulus() <= &needed {
            return Err(ProtocolError::InvalidConfig(format!(
                "plaintext modulus of {} bits too small for sigma = {}, B_max = {}, n = {}",
                ctx.codec().modulus().bits(),
                ctx.codec().sigma(),
                b_max,
                self.spec.n()
            )));
        }
        Ok(())
    }
}

/// State after one protocol iteration. `k` counts completed updates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolIteration<T> {
    pub k: usize,
    pub x: PrimalPoint<T>,
    pub lambda: Vec<T>,
    pub eps: T,
    pub masks: MaskSet<T>,
}

#[derive(Debug, Clone)]
pub struct ProtocolRun<T> {
    pub initial: PrimalDualState<T>,
    pub iterations: Vec<ProtocolIteration<T>>,
    pub transcript: Transcript<T>,
    pub converged: bool,
    pub crypto: CryptoContext,
}

impl<T: Real> ProtocolRun<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// `x^0, x^1, …` together with the replicated duals.
    pub fn states(&self) -> Vec<PrimalDualState<T>> {
        std::iter::once(self.initial.clone())
            .chain(self.iterations.iter().map(|it| PrimalDualState {
                x: it.x.clone(),
                lambda: it.lambda.clone(),
                k: it.k,
            }))
            .collect()
    }

    pub fn final_state(&self) -> PrimalDualState<T> {
        self.states().pop().expect("initial state present")
    }
}

/// Runs the protocol until the stopping error reaches `eps0` or `k_max`
/// iterations have been taken.
pub fn run_protocol<T: Real>(config: &ProtocolConfig<T>) -> Result<ProtocolRun<T>, ProtocolError> {
    let spec = &config.spec;
    let n = spec.n();
    if n < 2 {
        return Err(ProtocolError::TooFewAgents(n));
    }
    config.params.validate(n)?;
    let ctx = config.crypto.build_context(config.master_seed)?;
    config.check_overflow_budget(&ctx)?;

    let initial = config.init.clone().unwrap_or_else(|| PrimalDualState::initial(spec));
    spec.check_point(&initial.x)?;
    if initial.lambda.len() != spec.dual_dim() {
        return Err(crate::error::OptError::Dimension {
            context: "initial dual variable".into(),
            expected: spec.dual_dim(),
            found: initial.lambda.len(),
        }
        .into());
    }

    let mut so = SystemOperator::new(
        n,
        spec.c().to_vec(),
        spec.d().to_vec(),
        config.mask_modes(),
        ctx.evaluator(),
        role_rng(config.master_seed, SO_STREAM),
    )?;
    let mut agents: Vec<Agent<T>> = spec
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Agent::new(
                i,
                n,
                a.clone(),
                spec.rho(),
                config.method,
                config.params.clone(),
                ctx.clone(),
                config.b_max,
                role_rng(config.master_seed, AGENT_STREAM_BASE + i as u64),
                initial.x[i].clone(),
                initial.lambda.clone(),
            )
        })
        .collect();

    let mut transcript = Transcript::new();
    let mut iterations = Vec::new();
    let mut converged = false;
    for k in 0..config.params.k_max {
        let masks = so.generate_masks(k)?;
        let shares = so.distribute_masks(&masks);
        transcript.extend(shares.iter().cloned());

        let uploads = agents
            .iter_mut()
            .zip(&shares)
            .map(|(agent, share)| agent.upload(share))
            .collect::<Result<Vec<_>, _>>()?;
        transcript.extend(uploads.iter().cloned());

        let broadcasts = so.aggregate(k, &uploads)?;
        transcript.extend(broadcasts.iter().cloned());

        let mut dx_sq = T::zero();
        let mut dl = T::zero();
        for (agent, msg) in agents.iter_mut().zip(&broadcasts) {
            let (dxi, dli) = agent.apply_update(msg)?;
            dx_sq = dx_sq + dxi;
            dl = dli;
        }
        let lambda = agents[0].lambda().to_vec();
        if let Some(bad) = agents.iter().find(|a| a.lambda() != lambda.as_slice()) {
            return Err(ProtocolError::InvalidConfig(format!(
                "replicated dual variable of agent {} diverged at k = {}",
                bad.index(),
                k + 1
            )));
        }
        let eps = dx_sq.sqrt() + dl;
        iterations.push(ProtocolIteration {
            k: k + 1,
            x: agents.iter().map(|a| a.x().to_vec()).collect(),
            lambda,
            eps,
            masks,
        });
        if eps <= config.params.eps0 {
            converged = true;
            break;
        }
    }

    Ok(ProtocolRun {
        initial,
        iterations,
        transcript,
        converged,
        crypto: ctx,
    })
}
