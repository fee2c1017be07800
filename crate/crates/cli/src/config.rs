use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use privopt::experiments::{Experiment, OutputFormat};
use privopt::optcore::Method;
use privopt::protocol::{CryptoSettings, SchemeChoice, DEFAULT_B_MAX};
use privopt::crypto::DEFAULT_M_BITS;

/// Environment variable naming the directory for outputs when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "PRIVOPT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Singlemod,
    Paillier,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Spds,
    Rpds,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Spds => Method::Spds,
            MethodArg::Rpds => Method::Rpds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::Jsonl,
        }
    }
}

/// Settings for `privopt run`, either on the command line or in a TOML file.
/// Every field is optional in both places; flags win.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// Built-in experiment (numerical, traffic) or path to a problem file
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Encryption scheme; `none` runs the plaintext baseline
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Preserved decimal digits of the fixed-point codec
    #[arg(long)]
    pub sigma: Option<u32>,
    #[arg(long)]
    pub key_bits: Option<u64>,
    /// Bit length bound of the SingleMod randomizer
    #[arg(long)]
    pub m_bits: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Run the plaintext twin and report the encryption error
    #[arg(long)]
    #[serde(default)]
    pub compare_plaintext: bool,
    /// Write the message transcript (JSON lines) to this path
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[arg(long)]
    pub k_max: Option<usize>,
}

impl RunArgs {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config file: {}", e.message()))
    }

    /// Overlays `self` (flags) on top of `file`.
    pub fn over(self, file: RunArgs) -> RunArgs {
        RunArgs {
            experiment: self.experiment.or(file.experiment),
            method: self.method.or(file.method),
            scheme: self.scheme.or(file.scheme),
            sigma: self.sigma.or(file.sigma),
            key_bits: self.key_bits.or(file.key_bits),
            m_bits: self.m_bits.or(file.m_bits),
            seed: self.seed.or(file.seed),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            compare_plaintext: self.compare_plaintext || file.compare_plaintext,
            transcript: self.transcript.or(file.transcript),
            k_max: self.k_max.or(file.k_max),
        }
    }
}

/// Fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment<f64>,
    pub crypto: Option<CryptoSettings>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub compare_plaintext: bool,
    pub transcript: Option<PathBuf>,
}

/// Smallest SingleMod key that keeps `n` aggregated components of magnitude
/// `B_max` at precision `sigma` clear of wrap-around, with a little headroom.
fn singlemod_bits(sigma: u32, n: usize) -> u64 {
    let needed = (2.0 * DEFAULT_B_MAX * n as f64).log2() + sigma as f64 * 10f64.log2();
    (needed.ceil() as u64 + 4).max(51)
}

pub fn resolve(args: RunArgs, output_dir: Option<&Path>) -> Result<RunConfig, String> {
    let name = args
        .experiment
        .ok_or("missing experiment: pass --experiment or set `experiment` in the config file")?;
    let mut experiment = Experiment::<f64>::resolve(&name).map_err(|e| e.to_string())?;
    if let Some(m) = args.method {
        experiment.method = m.into();
    }
    if let Some(k) = args.k_max {
        if k == 0 {
            return Err("k_max must be at least 1".into());
        }
        experiment.params.k_max = k;
    }
    let scheme = args.scheme.unwrap_or(Scheme::Singlemod);
    let crypto = match scheme {
        Scheme::None => {
            let overrides: Vec<&str> = [
                ("sigma", args.sigma.is_some()),
                ("key_bits", args.key_bits.is_some()),
                ("m_bits", args.m_bits.is_some()),
            ]
            .into_iter()
            .filter_map(|(k, set)| set.then_some(k))
            .collect();
            if !overrides.is_empty() {
                return Err(format!("scheme `none` does not accept {}", overrides.join(", ")));
            }
            if args.transcript.is_some() {
                return Err("scheme `none` exchanges no messages; drop --transcript".into());
            }
            None
        }
        Scheme::Singlemod => {
            let sigma = args.sigma.unwrap_or(experiment.sigma);
            Some(CryptoSettings::new(
                SchemeChoice::SingleMod {
                    key_bits: args.key_bits.unwrap_or_else(|| singlemod_bits(sigma, experiment.spec.n())),
                    m_bits: args.m_bits.unwrap_or(DEFAULT_M_BITS),
                    modulus: None,
                },
                sigma,
            ))
        }
        Scheme::Paillier => {
            if args.m_bits.is_some() {
                return Err("m_bits applies to singlemod only".into());
            }
            Some(CryptoSettings::new(
                SchemeChoice::Paillier {
                    key_bits: args.key_bits.unwrap_or(512),
                    primes: None,
                },
                args.sigma.unwrap_or(experiment.sigma),
            ))
        }
    };
    let format = args.format.map_or(OutputFormat::Csv, Into::into);
    let output = args.output.or_else(|| {
        output_dir.map(|dir| {
            let ext = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Jsonl => "jsonl",
            };
            let tag = format!("{scheme:?}").to_lowercase();
            dir.join(format!("{}-{tag}.{ext}", experiment.name))
        })
    });
    Ok(RunConfig {
        experiment,
        crypto,
        seed: args.seed.unwrap_or(0),
        output,
        format,
        compare_plaintext: args.compare_plaintext,
        transcript: args.transcript,
    })
}
