//! `tsite`: instance files, individual queries and the verification suite.

mod files;

/// `println!` that stops quietly when the reader has gone away, as with `| head`.
macro_rules! out {
    ($($t:tt)*) => {
        write_out(format_args!($($t)*), true)
    };
}

fn write_out(args: std::fmt::Arguments, newline: bool) {
    use std::io::Write;
    let mut o = std::io::stdout().lock();
    let r = o.write_fmt(args).and_then(|_| if newline { o.write_all(b"\n") } else { Ok(()) });
    if let Err(e) = r {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsite::backends::{gen_finite, gen_line_sheaf, random_poset_sheaf, FiniteShape, LineShape};
use tsite::cellsheaf::{ext_dim, hom_space, write_poset_sheaf, CellularSheaf};
use tsite::exactla::Field;
use tsite::functors::{adjunction_check, rho_inv, rho_star, XSheaf};
use tsite::homalg::{coherent_presentation, is_c_soft, is_flabby, is_flabby_finite, is_flabby_global};
use tsite::lineorder::SemilinearOpen;
use tsite::spectrum::{stalk_at, zeta_pull, FiniteSpectrum, SiteSheaf, UltraPoint};
use tsite::suite::{run_item, run_suite, SuiteConfig};
use tsite::tsheaf::{ind_colimit_sections, rho_shriek_system, write_line_sheaf, ConstructibleTSheaf};

use files::{read_instance, read_presheaf, Instance};

#[derive(Parser)]
#[command(name = "tsite", version, about = "Exact sheaf computations on T-sites")]
struct Cli {
    /// Coefficient field: `q` or `fp:<p>`.
    #[arg(long, global = true, default_value = "q")]
    field: Field,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Instance multiplier for randomized checks, and search depth for
    /// locally bounded opens.
    #[arg(long, global = true, default_value_t = 1)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoOp {
    Shriek,
    Inv,
    Star,
}

#[derive(Subcommand)]
enum Command {
    /// Writes a named instance: a finite shape (`.tp`) or a line sheaf (`.ts`).
    Gen {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        params: String,
        /// The constant sheaf instead of a random one, for finite shapes.
        #[arg(long)]
        constant: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dimension and a basis of the sections over an open.
    Sections {
        #[arg(long)]
        sheaf: PathBuf,
        /// A semilinear open like `(0,1)+(2,3)`, or element labels `a,b`.
        #[arg(long)]
        open: String,
    },
    /// Sheafifies a presheaf given open-wise (`.tpp`).
    Sheafify {
        presheaf: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Whether every restriction between bounded opens is onto.
    Flabby {
        sheaf: PathBuf,
        /// Also test restrictions from the whole line onto locally bounded opens.
        #[arg(long)]
        tloc: bool,
    },
    /// Whether sections over each sampled closed union extend.
    Csoft {
        sheaf: PathBuf,
    },
    /// A finite presentation by sums of constant sheaves on bounded opens.
    Coherent {
        sheaf: PathBuf,
        #[arg(long)]
        emit_presentation: bool,
    },
    /// `Hom` and `Ext^n` between two sheaves on the same backend.
    Ext {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, default_value_t = 1)]
        degree: usize,
    },
    /// The functors between sheaves on the line and on the site.
    Rho {
        #[arg(long, value_enum)]
        op: RhoOp,
        #[arg(long)]
        sheaf: PathBuf,
        #[arg(long)]
        open: Option<String>,
    },
    /// The ρ_! ⊣ ρ⁻¹ adjunction on a given pair, or on random pairs.
    AdjointCheck {
        #[arg(long, requires = "target")]
        sheaf: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Points and specialization of the spectrum of a finite instance.
    Spectrum {
        #[arg(long)]
        instance: PathBuf,
    },
    /// The stalk at a point of the spectrum.
    Stalk {
        sheaf: PathBuf,
        /// `1`, `1+`, `1-` or `cut(a,b)`.
        #[arg(long)]
        point: String,
    },
    /// Runs the verification suite.
    Verify {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// Why a command did not succeed.
enum Failure {
    /// The property asked about does not hold.
    Property(String),
    /// Bad input.
    Usage(String),
}

impl From<tsite::Error> for Failure {
    fn from(e: tsite::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn property(holds: bool, what: &str) -> Outcome {
    if holds {
        Ok(())
    } else {
        Err(Failure::Property(format!("property failed: {what}")))
    }
}

fn line_sheaf(path: &Path, field: Field) -> Result<ConstructibleTSheaf, Failure> {
    match read_instance(path, field)? {
        Instance::Line(f) => Ok(f),
        Instance::Finite { .. } => Err(Failure::Usage(format!("{}: expected a line sheaf (.ts)", path.display()))),
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            write_out(format_args!("{text}"), false);
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let field = cli.field;
    match &cli.command {
        Command::Gen { name, params, constant, output } => {
            let spec = if params.is_empty() { name.clone() } else { format!("{name}:{params}") };
            let text = if let Ok(shape) = spec.parse::<FiniteShape>() {
                let p = Arc::new(gen_finite(&shape)?);
                let f = if *constant {
                    CellularSheaf::constant(field, p.clone(), &p.full())?
                } else {
                    random_poset_sheaf(&mut ChaCha8Rng::seed_from_u64(cli.seed), field, &p, 3)?
                };
                format!("# {shape}\n{}", write_poset_sheaf(&f))
            } else {
                // the seed of a random line sheaf comes from --seed
                let spec = if name == "random" { format!("random:{};{params}", cli.seed) } else { spec };
                let shape: LineShape = spec.parse()?;
                write_line_sheaf(&gen_line_sheaf(&shape, field)?)
            };
            emit(&text, output.as_ref())
        }
        Command::Sections { sheaf, open } => {
            match read_instance(sheaf, field)? {
                Instance::Line(f) => {
                    let u = SemilinearOpen::parse(open)?;
                    let s = f.sections(&u)?;
                    out!("dim {}", s.dim());
                    let cells: Vec<usize> = (0..s.complex.len()).filter(|&i| s.mask[i]).collect();
                    for b in 0..s.dim() {
                        let parts: Vec<String> = cells
                            .iter()
                            .filter_map(|&i| s.sections.component(i).map(|m| (i, m.col_vec(b))))
                            .filter(|(_, v)| v.rows() > 0)
                            .map(|(i, v)| format!("{} {}", s.complex.cell(i), files::vector(&v)))
                            .collect();
                        out!("section {b}: {}", parts.join("  "));
                    }
                }
                Instance::Finite { sheaf: f, .. } => {
                    let u = files::labels_to_mask(f.poset(), open)?;
                    f.poset().check_open(&u)?;
                    let s = f.sections(&u)?;
                    out!("dim {}", s.dim());
                    for b in 0..s.dim() {
                        let parts: Vec<String> = s
                            .elems
                            .iter()
                            .map(|&p| (p, s.component(p).expect("element of U").col_vec(b)))
                            .filter(|(_, v)| v.rows() > 0)
                            .map(|(p, v)| format!("{} {}", f.poset().label(p), files::vector(&v)))
                            .collect();
                        out!("section {b}: {}", parts.join("  "));
                    }
                }
            }
            Ok(())
        }
        Command::Sheafify { presheaf, output } => {
            let p = read_presheaf(presheaf, field)?;
            let (plus, unit) = p.unit_to_sheafification()?;
            let poset = p.poset().clone();
            out!("{:<24} {:>4} {:>4}  unit", "open", "P", "P++");
            for u in poset.all_opens()? {
                let m = &unit[p.open_index(&u)?];
                let iso = m.rows() == m.cols() && m.rank() == m.rows();
                let name = format!("{{{}}}", poset.describe(&u).join(","));
                out!("{name:<24} {:>4} {:>4}  {}", p.dim(&u)?, plus.dim(&u)?, if iso { "iso" } else { "-" });
            }
            out!("input is a sheaf: {}", p.is_sheaf());
            if let Some(out) = output {
                emit(&write_poset_sheaf(&plus.to_cellular()?), Some(out))?;
            }
            Ok(())
        }
        Command::Flabby { sheaf, tloc } => match read_instance(sheaf, field)? {
            Instance::Line(f) => {
                let v = is_flabby(&f)?;
                out!("flabby: {}", v.holds);
                if let Some(w) = &v.witness {
                    out!(
                        "witness: Γ({}) → Γ({}) has rank {} onto dimension {}",
                        w.larger, w.smaller, w.rank, w.smaller_dim
                    );
                }
                let mut holds = v.holds;
                if *tloc {
                    let g = is_flabby_global(&f, 4 + cli.budget)?;
                    for (name, verdict) in &g.per_open {
                        out!("  {name}: {verdict:?}");
                    }
                    out!("onto every locally bounded open: {:?}", g.verdict());
                    holds &= g.verdict() == Some(true);
                }
                property(holds, "flabby")
            }
            Instance::Finite { sheaf: f, .. } => {
                let w = is_flabby_finite(&f)?;
                out!("flabby: {}", w.is_none());
                if let Some((v, u)) = &w {
                    out!(
                        "witness: F({{{}}}) → F({{{}}}) not onto",
                        f.poset().describe(v).join(","),
                        f.poset().describe(u).join(",")
                    );
                }
                property(w.is_none(), "flabby")
            }
        },
        Command::Csoft { sheaf } => {
            let f = line_sheaf(sheaf, field)?;
            let v = is_c_soft(&f)?;
            out!("c-soft: {}", v.holds);
            if let Some(w) = &v.witness {
                out!("witness: Γ({}) → Γ({}) has rank {} onto dimension {}", w.larger, w.smaller, w.rank, w.smaller_dim);
            }
            property(v.holds, "c-soft")
        }
        Command::Coherent { sheaf, emit_presentation } => {
            let f = line_sheaf(sheaf, field)?;
            let p = coherent_presentation(&f)?;
            let ok = p.verify() && p.in_t();
            out!("coherent: {ok}");
            if *emit_presentation {
                let show = |v: &[SemilinearOpen]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ⊕ ");
                out!("generators: {}", show(&p.generators));
                out!("relations: {}", show(&p.relations));
                print!("# sum of the generators\n{}", write_line_sheaf(&p.relation_map.target));
            }
            property(ok, "coherent")
        }
        Command::Ext { source, target, degree } => {
            let (a, b) = match (read_instance(source, field)?, read_instance(target, field)?) {
                (Instance::Line(a), Instance::Line(b)) => {
                    let (a, b) = a.align(&b)?;
                    (a.sheaf().clone(), b.sheaf().clone())
                }
                (Instance::Finite { sheaf: a, .. }, Instance::Finite { sheaf: b, .. }) => (a, b),
                _ => return Err(Failure::Usage("both sheaves must live on the same backend".into())),
            };
            out!("hom {}", hom_space(&a, &b)?.dim());
            out!("ext{} {}", degree, ext_dim(&a, &b, *degree)?);
            Ok(())
        }
        Command::Rho { op, sheaf, open } => {
            let f = line_sheaf(sheaf, field)?;
            let open = open.as_deref().map(SemilinearOpen::parse).transpose()?;
            match op {
                RhoOp::Star => {
                    let g = rho_star(&XSheaf::new(f));
                    if let Some(u) = &open {
                        out!("dim {}", g.section_dim(u)?);
                    } else {
                        print!("{}", write_line_sheaf(&g));
                    }
                }
                RhoOp::Inv => {
                    let g = rho_inv(&f);
                    if let Some(u) = &open {
                        out!("dim {}", g.section_dim(u)?);
                    } else {
                        print!("{}", write_line_sheaf(g.data()));
                    }
                }
                RhoOp::Shriek => {
                    let u = open.ok_or_else(|| Failure::Usage("--op shriek needs --open".into()))?;
                    let c = ind_colimit_sections(&rho_shriek_system(&f), &u)?;
                    out!("dim {}", c.dim);
                    out!("stable from stage {} (stage dims {:?})", c.stable_from, c.stage_dims);
                }
            }
            Ok(())
        }
        Command::AdjointCheck { sheaf, target } => {
            if let (Some(s), Some(t)) = (sheaf, target) {
                let r = adjunction_check(&XSheaf::new(line_sheaf(s, field)?), &line_sheaf(t, field)?)?;
                out!("{r:#?}");
                return property(r.passed(), "adjunction");
            }
            let r = run_item("eta_adjunction", cli.seed, cli.budget)?;
            out!("{} pairs, {} failures", r.outcome.instances, r.outcome.failures.len());
            for f in &r.outcome.failures {
                out!("  {f}");
            }
            property(r.passed(), "adjunction")
        }
        Command::Spectrum { instance } => {
            let Instance::Finite { sheaf: f, members } = read_instance(instance, field)? else {
                return Err(Failure::Usage("spectrum needs a finite instance (.tp)".into()));
            };
            let p = f.poset();
            let spec = match members {
                Some(m) => FiniteSpectrum::new(p.len(), m)?,
                None => FiniteSpectrum::of_poset(p)?,
            };
            let name = |i: usize| {
                let atom = &spec.algebra.atoms()[spec.points[i]];
                format!("<{}>", p.describe(atom).join(","))
            };
            out!("{} members, {} atoms, {} points", spec.members.len(), spec.algebra.atoms().len(), spec.len());
            let g = SiteSheaf::from_space(&spec, &f)?;
            let h = zeta_pull(&spec, &g)?;
            for i in 0..spec.len() {
                let above: Vec<String> = spec.poset.covers_above(i).iter().map(|&j| name(j)).collect();
                out!("point {}  stalk {}  generizes to [{}]", name(i), h.dim(i), above.join(" "));
            }
            let rt = tsite::spectrum::round_trip(&spec, &h, &g)?;
            out!("round trips: {rt:?}");
            property(rt.passed(), "round trip")
        }
        Command::Stalk { sheaf, point } => {
            let f = line_sheaf(sheaf, field)?;
            let alpha: UltraPoint = point.parse()?;
            out!("dim {}", stalk_at(&f, &alpha)?);
            Ok(())
        }
        Command::Verify { filter, json } => {
            let report = run_suite(&SuiteConfig {
                seed: cli.seed,
                scale: cli.budget,
                filter: filter.clone(),
            });
            if *json {
                out!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.render());
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Property(String::new()))
            }
        }
    }
}
