use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use privopt::crypto::{CryptoContext, SchemeKey, SingleModKey};
use privopt::experiments::{build_numerical_example, build_traffic_example};
use privopt::linalg::Matrix;
use privopt::optcore::{AgentSpec, BoxSet, LocalObjective, Method, ProblemSpec, SolverParams};
use privopt::protocol::{
    adversary_audit, generate_masks, run_protocol, Agent, CryptoSettings, GroundTruth, MaskMode, Message,
    MessageKind, Observer, Payload, ProtocolConfig, Role, SchemeChoice, SystemOperator, Transcript,
};
use privopt::ProtocolError;

fn numerical_config(scheme: SchemeChoice, sigma: u32, seed: u64, k_max: usize) -> ProtocolConfig<f64> {
    let (spec, mut params) = build_numerical_example();
    params.k_max = k_max;
    ProtocolConfig::new(spec, params, CryptoSettings::new(scheme, sigma), seed)
}

fn jsonl(t: &Transcript<f64>) -> Vec<u8> {
    let mut buf = Vec::new();
    t.write_jsonl(&mut buf).unwrap();
    buf
}

#[test]
fn same_seed_same_run() {
    let cfg = numerical_config(SchemeChoice::singlemod(), 3, 9, 40);
    let a = run_protocol(&cfg).unwrap();
    let b = run_protocol(&cfg).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(jsonl(&a.transcript), jsonl(&b.transcript));

    let other = run_protocol(&numerical_config(SchemeChoice::singlemod(), 3, 10, 40)).unwrap();
    assert_ne!(jsonl(&a.transcript), jsonl(&other.transcript));
}

#[test]
fn decrypted_trajectory_does_not_depend_on_scheme() {
    // both schemes decrypt to the same integers, so the iterates coincide
    let sm = run_protocol(&numerical_config(SchemeChoice::singlemod(), 6, 4, 25)).unwrap();
    let pa = run_protocol(&numerical_config(SchemeChoice::paillier(), 6, 4, 25)).unwrap();
    assert_eq!(sm.len(), pa.len());
    for (a, b) in sm.iterations.iter().zip(&pa.iterations) {
        assert_eq!(a.x, b.x);
        assert_eq!(a.lambda, b.lambda);
        assert_eq!(a.masks, b.masks);
    }
}

#[test]
fn transcript_round_trips_through_jsonl() {
    let run = run_protocol(&numerical_config(SchemeChoice::singlemod(), 3, 1, 5)).unwrap();
    let bytes = jsonl(&run.transcript);
    let back = Transcript::<f64>::read_jsonl(&bytes[..]).unwrap();
    assert_eq!(back, run.transcript);
    let first = String::from_utf8(bytes).unwrap().lines().next().unwrap().to_string();
    assert!(first.contains("\"sender\":\"so\"") && first.contains("\"kind\":\"mask_share\""), "{first}");
    assert!(Transcript::<f64>::read_jsonl(&b"{\"k\":0,\"bogus\":1}\n"[..]).is_err());
}

#[test]
fn message_schedule_per_iteration() {
    let run = run_protocol(&numerical_config(SchemeChoice::singlemod(), 3, 2, 3)).unwrap();
    let kinds: Vec<MessageKind> = run.transcript.messages().iter().map(Message::kind).collect();
    let one = [
        MessageKind::MaskShare,
        MessageKind::MaskShare,
        MessageKind::AgentUpload,
        MessageKind::AgentUpload,
        MessageKind::AggregateBroadcast,
        MessageKind::AggregateBroadcast,
    ];
    assert_eq!(kinds, one.repeat(3));
}

#[test]
fn observer_taps() {
    let run = run_protocol(&numerical_config(SchemeChoice::singlemod(), 3, 2, 3)).unwrap();
    let t = &run.transcript;
    assert_eq!(t.tap(Observer::ExternalEavesdropper).messages.len(), t.len());
    assert_eq!(t.tap(Observer::SystemOperator).messages.len(), t.len());
    let curious = t.tap(Observer::CuriousAgent(0)).messages;
    // own share, both uploads, own broadcast
    assert_eq!(curious.len(), 3 * 4);
    assert!(curious
        .iter()
        .all(|m| m.kind() == MessageKind::AgentUpload || m.receiver == Role::Agent(0)));
}

#[test]
fn audit_passes_on_honest_runs() {
    for cfg in [
        numerical_config(SchemeChoice::singlemod(), 3, 3, 60),
        numerical_config(SchemeChoice::paillier(), 3, 3, 10),
    ] {
        let run = run_protocol(&cfg).unwrap();
        let states = run.states();
        let truth = GroundTruth { spec: &cfg.spec, states: &states };
        let report = adversary_audit(&run.transcript, &run.crypto, cfg.b_max, truth).unwrap();
        assert_eq!(report.peer_views_checked, 2 * run.len());
        assert_eq!(report.eavesdropper_hits, 0);
        assert_eq!(report.ciphertexts, run.len() * 2 * 2 * 4);
    }
}

fn audit(cfg: &ProtocolConfig<f64>, run: &privopt::ProtocolRun, t: &Transcript<f64>) -> Result<privopt::protocol::AuditReport, ProtocolError> {
    let states = run.states();
    adversary_audit(t, &run.crypto, cfg.b_max, GroundTruth { spec: &cfg.spec, states: &states })
}

fn rebuilt(t: &Transcript<f64>, f: impl Fn(usize, &Message<f64>) -> Message<f64>) -> Transcript<f64> {
    let mut out = Transcript::new();
    out.extend(t.messages().iter().enumerate().map(|(i, m)| f(i, m)));
    out
}

#[test]
fn audit_flags_an_unencrypted_decision_variable() {
    let cfg = numerical_config(SchemeChoice::singlemod(), 3, 5, 5);
    let run = run_protocol(&cfg).unwrap();
    let states = run.states();
    let codec = run.crypto.codec().clone();
    let forged = rebuilt(&run.transcript, |_, m| match (&m.payload, m.sender) {
        (Payload::AgentUpload { objective, constraint }, Role::Agent(1)) if m.k == 2 => {
            let mut objective = objective.clone();
            let raw = codec.encode(states[2].x[1][1]).unwrap();
            objective[0] = privopt::crypto::Ciphertext::from_parts(raw, objective[0].scheme(), 1);
            Message {
                payload: Payload::AgentUpload { objective, constraint: constraint.clone() },
                ..m.clone()
            }
        }
        _ => m.clone(),
    });
    let err = audit(&cfg, &run, &forged).unwrap_err();
    assert!(matches!(err, ProtocolError::SecurityRegression(_)), "{err}");
}

#[test]
fn audit_flags_plaintext_sent_by_an_agent() {
    let cfg = numerical_config(SchemeChoice::singlemod(), 3, 5, 3);
    let run = run_protocol(&cfg).unwrap();
    let forged = rebuilt(&run.transcript, |i, m| {
        if i == 0 {
            Message { sender: Role::Agent(1), ..m.clone() }
        } else {
            m.clone()
        }
    });
    assert!(matches!(audit(&cfg, &run, &forged), Err(ProtocolError::SecurityRegression(_))));
}

#[test]
fn audit_flags_unmasked_upload_and_reports_degenerate_masks() {
    let cfg = numerical_config(SchemeChoice::singlemod(), 3, 5, 3);
    let run = run_protocol(&cfg).unwrap();
    let states = run.states();
    let spec = cfg.spec.clone();
    let ctx = run.crypto.clone();
    let unmasked = |zero_share: bool| {
        rebuilt(&run.transcript, |_, m| {
            if m.k != 1 || !matches!(m.sender, Role::Agent(0) | Role::SystemOperator) {
                return m.clone();
            }
            match &m.payload {
                Payload::MaskShare { objective, constraint } if zero_share && m.receiver == Role::Agent(0) => Message {
                    payload: Payload::MaskShare {
                        objective: vec![0.0; objective.len()],
                        constraint: constraint.clone(),
                    },
                    ..m.clone()
                },
                Payload::AgentUpload { constraint, .. } => {
                    let mut rng = ChaCha20Rng::seed_from_u64(0);
                    let truth = spec.agent(0).a_u.mul_vec(&states[1].x[0]);
                    Message {
                        payload: Payload::AgentUpload {
                            objective: ctx.encrypt_vector(&truth, &mut rng).unwrap(),
                            constraint: constraint.clone(),
                        },
                        ..m.clone()
                    }
                }
                _ => m.clone(),
            }
        })
    };
    assert!(matches!(
        audit(&cfg, &run, &unmasked(false)),
        Err(ProtocolError::SecurityRegression(_))
    ));
    let report = audit(&cfg, &run, &unmasked(true)).unwrap();
    assert_eq!(report.degenerate.len(), 1);
    assert_eq!((report.degenerate[0].k, report.degenerate[0].agent), (1, 0));
}

#[test]
fn overflow_budget_and_message_bound_enforced() {
    let mut cfg = numerical_config(SchemeChoice::singlemod(), 14, 0, 5);
    assert!(matches!(run_protocol(&cfg), Err(ProtocolError::InvalidConfig(_))));
    cfg.crypto.sigma = 3;
    cfg.b_max = 0.5;
    assert!(matches!(run_protocol(&cfg), Err(ProtocolError::MessageOverflow { .. })));
}

#[test]
fn zero_sum_masks_refuse_a_nonzero_offset() {
    let mut cfg = numerical_config(SchemeChoice::singlemod(), 3, 0, 5);
    cfg.mask_modes = Some((MaskMode::Zero, MaskMode::Affine));
    assert!(matches!(run_protocol(&cfg), Err(ProtocolError::InvalidConfig(_))));
    let single = {
        let (spec, params) = build_traffic_example::<f64>();
        let one = ProblemSpec::new(vec![spec.agent(0).clone()], spec.c().to_vec(), spec.d().to_vec(), 2.0).unwrap();
        let mut params = SolverParams { alpha: vec![params.alpha[0]], ..params };
        params.k_max = 3;
        ProtocolConfig::new(one, params, CryptoSettings::new(SchemeChoice::singlemod(), 3), 0)
    };
    assert!(matches!(run_protocol(&single), Err(ProtocolError::TooFewAgents(1))));
}

#[test]
fn wrong_key_is_detected_by_plausibility_check() {
    let (spec, params) = build_numerical_example::<f64>();
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let key = |rng: &mut ChaCha20Rng| CryptoContext::new(SchemeKey::SingleMod(SingleModKey::generate(51, 40, rng).unwrap()), 3).unwrap();
    let good = key(&mut rng);
    let bad = key(&mut rng);
    let mut so = SystemOperator::new(
        2,
        spec.c().to_vec(),
        spec.d().to_vec(),
        (MaskMode::Affine, MaskMode::Affine),
        good.evaluator(),
        ChaCha20Rng::seed_from_u64(1),
    )
    .unwrap();
    let mut agents: Vec<Agent<f64>> = (0..2)
        .map(|i| {
            Agent::new(
                i,
                2,
                spec.agent(i).clone(),
                spec.rho(),
                Method::Spds,
                params.clone(),
                if i == 0 { good.clone() } else { bad.clone() },
                1e3,
                ChaCha20Rng::seed_from_u64(2 + i as u64),
                vec![0.5, 0.5],
                vec![0.0, 0.0],
            )
        })
        .collect();
    let masks = so.generate_masks(0).unwrap();
    let shares = so.distribute_masks(&masks);
    let uploads: Vec<_> = agents.iter_mut().zip(&shares).map(|(a, s)| a.upload(s).unwrap()).collect();
    let broadcasts = so.aggregate(0, &uploads).unwrap();
    assert!(matches!(
        agents[1].apply_update(&broadcasts[1]),
        Err(ProtocolError::KeyMismatch { k: 0, agent: 1 })
    ));
    assert!(matches!(
        so.aggregate(0, &uploads[..1]),
        Err(ProtocolError::MissingUpload { .. })
    ));
}

fn random_agents(n: usize, p: usize, m: usize, rng: &mut ChaCha20Rng) -> Vec<AgentSpec<f64>> {
    (0..n)
        .map(|_| {
            let dim = rng.gen_range(1..4);
            let mut mat = |r: usize| {
                let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
                Matrix::from_rows(&rows).unwrap()
            };
            AgentSpec {
                a_u: mat(p),
                a_g: mat(m),
                local: LocalObjective::Zero,
                bounds: BoxSet::uniform(dim, -2.0, 2.0).unwrap(),
            }
        })
        .collect()
}

/// Returns the worst per-component gap between the decrypted aggregate and
/// the plaintext sum, and the allowed `n·0.5·10^-σ`.
fn cancellation_gap(n: usize, zero_offset: bool, sigma: u32, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (p, m) = (rng.gen_range(1..4), rng.gen_range(1..4));
    let agents = random_agents(n, p, m, &mut rng);
    let c: Vec<f64> = if zero_offset { vec![0.0; p] } else { (0..p).map(|_| rng.gen_range(-5.0..5.0)).collect() };
    let d: Vec<f64> = if zero_offset { vec![0.0; m] } else { (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect() };
    let spec = ProblemSpec::new(agents, c.clone(), d.clone(), 1.0).unwrap();
    let xs: Vec<Vec<f64>> = spec
        .agents()
        .iter()
        .map(|a| (0..a.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ctx = CryptoContext::new(SchemeKey::SingleMod(SingleModKey::generate(61, 40, &mut rng).unwrap()), sigma).unwrap();
    let modes = (MaskMode::for_offset(&c), MaskMode::for_offset(&d));
    assert_eq!(modes.0 == MaskMode::Zero, zero_offset);
    let mut so = SystemOperator::new(n, c, d, modes, ctx.evaluator(), ChaCha20Rng::seed_from_u64(seed ^ 1)).unwrap();
    let params = SolverParams::uniform(n, 0.1, 0.1, 1.0, 1e-4, 1);
    let mut agents: Vec<Agent<f64>> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            Agent::new(
                i,
                n,
                spec.agent(i).clone(),
                1.0,
                Method::Spds,
                params.clone(),
                ctx.clone(),
                1e3,
                ChaCha20Rng::seed_from_u64(seed + i as u64 + 2),
                x.clone(),
                vec![0.0; spec.dual_dim()],
            )
        })
        .collect();
    let masks = so.generate_masks(0).unwrap();
    let shares = so.distribute_masks(&masks);
    let uploads: Vec<_> = agents.iter_mut().zip(&shares).map(|(a, s)| a.upload(s).unwrap()).collect();
    let broadcast = &so.aggregate(0, &uploads).unwrap()[0];
    let Payload::AggregateBroadcast { objective, constraint } = &broadcast.payload else { unreachable!() };
    let got_u: Vec<f64> = ctx.decrypt_vector(objective).unwrap();
    let got_h: Vec<f64> = ctx.decrypt_vector(constraint).unwrap();
    let want_u = spec.coupled_sum(&xs).unwrap();
    let want_h = spec.constraint_value(&xs).unwrap();
    let gap = got_u
        .iter()
        .zip(&want_u)
        .chain(got_h.iter().zip(&want_h))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (gap, n as f64 * 0.5 * 10f64.powi(-(sigma as i32)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn masks_cancel_in_the_aggregate(n in 2usize..=8, zero in any::<bool>(), sigma in 2u32..=6, seed in any::<u64>()) {
        let (gap, bound) = cancellation_gap(n, zero, sigma, seed);
        prop_assert!(gap <= bound * (1.0 + 1e-9), "gap {gap} > {bound}");
    }

    #[test]
    fn mask_weights_hit_their_target(n in 2usize..=16, zero in any::<bool>(), seed in any::<u64>()) {
        let mode = if zero { MaskMode::Zero } else { MaskMode::Affine };
        let w: Vec<f64> = generate_masks(n, mode, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(w.len(), n);
        prop_assert!(w[..n - 1].iter().all(|v| (-1.0..=1.0).contains(v)));
        let target = if zero { 0.0 } else { 1.0 };
        prop_assert!((w.iter().sum::<f64>() - target).abs() < 1e-12);
    }
}
