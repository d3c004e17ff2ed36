use std::fmt::Display;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use polylab::enumerate::enumeration_limit;
use polylab::hp::Precision;
use polylab::limitlaws::LimitLaw;
use polylab::PolygonClass;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AmplitudeKind {
    Phi,
    StairF,
    Omega,
    DirconvexH,
    RectangleF,
    /// Dominant-balance constants of the staircase equation, numerically.
    GeneralF,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MomentSource {
    /// Enumeration when `max m` is within the enumeration limit, else series.
    Auto,
    Table,
    Series,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Function {
    AiryAi,
    AiryAiPrime,
    AiryBi,
    AiryBiPrime,
    /// `k`-th zero of Ai as a positive number `β_k`; `--x` is `k`.
    AiryZero,
    Erfc,
    Erfcx,
    /// `E₁(x)`.
    Ei,
    Gamma,
    Dilog,
    /// `Φ(x, 1, v)`.
    LerchPhi,
    /// `U(a, b, x)`.
    KummerU,
    /// `φ_k` by the Airy integral; `--x` is `k`.
    PhiIntegral,
}

#[derive(Parser, Clone, Debug, PartialEq)]
#[command(name = "polylab", version, about = "Exact enumeration, q-series and limit laws of lattice polygon models")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision in decimal digits (default: POLYLAB_DIGITS, else 50).
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Count table by half-perimeter and area.
    Enumerate {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long)]
        max_m: u32,
    },
    /// Series coefficients from the functional equation.
    Qseries {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long)]
        max_m: u32,
    },
    /// Factorial area moment generating function `g_k`.
    Gk {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        order: u32,
    },
    /// Limit-law amplitude sequences.
    Amplitudes {
        #[arg(long, value_enum)]
        label: AmplitudeKind,
        #[arg(long)]
        k_max: u32,
    },
    /// Finite-size area moments against a limit law.
    Limitlaw {
        #[arg(long)]
        model: PolygonClass,
        /// Defaults to the class's law.
        #[arg(long)]
        law: Option<LimitLaw>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long)]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = MomentSource::Auto)]
        source: MomentSource,
    },
    /// Perimeter mean and variance in the fixed-area ensemble.
    Areaensemble {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long)]
        n_max: u32,
    },
    /// Scaling-function error scan.
    Scaling {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Growth-constant estimation from `[x^m] g_k`.
    Extrapolate {
        #[arg(long)]
        model: PolygonClass,
        #[arg(long)]
        max_m: u32,
        #[arg(long, default_value_t = 0)]
        moment: u32,
    },
    /// Runs the numbered end-to-end checks, all of them by default.
    Acceptance {
        #[arg(long)]
        criterion: Option<u32>,
    },
    /// Special-function evaluators.
    Specialfn {
        #[command(subcommand)]
        action: SpecialfnAction,
    },
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum SpecialfnAction {
    Eval {
        #[arg(long, value_enum)]
        function: Function,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
    },
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn precision(&self) -> Precision {
        self.digits.filter(|&d| d > 0).map(Precision).unwrap_or_else(Precision::from_env)
    }

    /// Defaults made explicit: the law of the class, the concrete moment source.
    pub fn normalized(&self) -> RunConfig {
        let mut c = self.clone();
        if let Command::Limitlaw { model, law, m, source, .. } = &mut c.command {
            if law.is_none() {
                *law = Some(LimitLaw::for_class(*model));
            }
            if *source == MomentSource::Auto {
                let top = m.iter().copied().max().unwrap_or(0);
                *source = if top <= enumeration_limit(*model) { MomentSource::Table } else { MomentSource::Series };
            }
        }
        c
    }

    /// Flags in a fixed order; parsing them gives back this configuration.
    pub fn to_flags(&self) -> Vec<String> {
        let mut f: Vec<String> = Vec::new();
        let mut push = |k: &str, v: String| {
            f.push(format!("--{k}"));
            f.push(v);
        };
        let head = match &self.command {
            Command::Enumerate { model, max_m } | Command::Qseries { model, max_m } => {
                push("model", model.to_string());
                push("max-m", max_m.to_string());
                if matches!(self.command, Command::Enumerate { .. }) {
                    "enumerate"
                } else {
                    "qseries"
                }
            }
            Command::Gk { model, k, order } => {
                push("model", model.to_string());
                push("k", k.to_string());
                push("order", order.to_string());
                "gk"
            }
            Command::Amplitudes { label, k_max } => {
                push("label", value_name(label));
                push("k-max", k_max.to_string());
                "amplitudes"
            }
            Command::Limitlaw { model, law, m, k_max, source } => {
                push("model", model.to_string());
                if let Some(l) = law {
                    push("law", l.name());
                }
                push("m", join(m));
                push("k-max", k_max.to_string());
                push("source", value_name(source));
                "limitlaw"
            }
            Command::Areaensemble { model, n_max } => {
                push("model", model.to_string());
                push("n-max", n_max.to_string());
                "areaensemble"
            }
            Command::Scaling { model, s, eps } => {
                push("model", model.to_string());
                push("s", join(s));
                push("eps", join(eps));
                "scaling"
            }
            Command::Extrapolate { model, max_m, moment } => {
                push("model", model.to_string());
                push("max-m", max_m.to_string());
                push("moment", moment.to_string());
                "extrapolate"
            }
            Command::Acceptance { criterion } => {
                if let Some(c) = criterion {
                    push("criterion", c.to_string());
                }
                "acceptance"
            }
            Command::Specialfn { action: SpecialfnAction::Eval { function, x, a, b, v } } => {
                push("function", value_name(function));
                push("x", x.to_string());
                for (k, val) in [("a", a), ("b", b), ("v", v)] {
                    if let Some(val) = val {
                        push(k, val.to_string());
                    }
                }
                "specialfn eval"
            }
        };
        let mut out: Vec<String> = head.split(' ').map(String::from).collect();
        out.append(&mut f);
        out.push("--format".into());
        out.push(value_name(&self.format));
        if let Some(d) = self.digits {
            out.push("--digits".into());
            out.push(d.to_string());
        }
        if let Some(p) = &self.out {
            out.push("--out".into());
            out.push(p.display().to_string());
        }
        out
    }

    /// Normalized flags as one string.
    pub fn flag_string(&self) -> String {
        self.normalized().to_flags().join(" ")
    }
}
