use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symspectra::boundary::{boundary_maps, eigenvalues_selfadjoint, validate_pair, BoundaryPair};
use symspectra::builtin;
use symspectra::fourier::{fourier_transform, isometry_report, mul_tmin_basis, parseval_defect};
use symspectra::io::{load_function, load_pair, load_system, ToleranceSpec};
use symspectra::linalg::{hermitian_eigenvalues, imag_part};
use symspectra::propagator::{lagrange_bilinear_check, propagate};
use symspectra::resolvent::{resolvent_crosscheck, resolvent_identity_check};
use symspectra::spectral::{build_spectral_function, default_eps_seq};
use symspectra::system::{probe_definiteness, validate_system};
use symspectra::weyl::{admissibility, characteristic_matrix, default_radii, weyl_function};
use symspectra::{Error, Function, Matrix, Pair, System};

type Complex = symspectra::Complex<f64>;

#[derive(Parser)]
#[command(name = "symspectra", version, about = "Weyl functions, characteristic matrices and spectral functions of regular symmetric systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions, interval, coefficient checks and definiteness.
    Describe(Common),
    /// Fundamental solution at the mesh checkpoints.
    Propagate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Weyl function on a grid of spectral parameters.
    Weyl {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda_grid: String,
    },
    /// Characteristic matrix of a boundary pair.
    Charmatrix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Eigenvalues of a constant self-adjoint boundary pair.
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// Jumps and interval increments of the spectral function.
    Spectral {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        eps_seq: Option<String>,
    },
    /// Parseval defect of a function against the spectral function.
    Parseval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        eps_seq: Option<String>,
    },
    /// Fourier transform of a function on an s grid.
    Fourier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s_grid: String,
    },
    /// Basis of the multivalued part of the minimal relation.
    Mulmin {
        #[command(flatten)]
        common: Common,
        /// Sine modes per degenerate direction.
        #[arg(long, default_value_t = 3)]
        modes: usize,
    },
    /// Integral representation versus direct boundary value solve.
    ResolventCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        f: PathBuf,
    },
    /// Built-in oracle suite; exit status 0 iff every criterion passes.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct Common {
    /// System file, or builtin:NAME (FREE1, DEG1, SMOKE3, POT1).
    #[arg(long)]
    system: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, allow_negative_numbers = true)]
    tol_sym: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_psd: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_quad: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_ode: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_eig: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_adm: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_jump_psd: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_nullity: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_weyl_cond: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_bvp_cond: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol_member: Option<f64>,
}

impl TolArgs {
    fn spec(&self) -> ToleranceSpec {
        ToleranceSpec {
            sym: self.tol_sym,
            psd: self.tol_psd,
            quad: self.tol_quad,
            ode: self.tol_ode,
            eig: self.tol_eig,
            adm: self.tol_adm,
            jump_psd: self.tol_jump_psd,
            nullity: self.tol_nullity,
            weyl_cond: self.tol_weyl_cond,
            bvp_cond: self.tol_bvp_cond,
            member: self.tol_member,
        }
    }
}

type CliResult<T> = Result<T, Error>;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl Common {
    fn system(&self) -> CliResult<System> {
        let sys = match self.system.strip_prefix("builtin:") {
            Some(name) => builtin::builtin::<f64>(name)?,
            None => load_system::<f64>(Path::new(&self.system))?,
        };
        let tol = self.tol.spec().apply(sys.tol)?;
        Ok(sys.with_tolerances(tol))
    }
}

/// `--tau FILE`, or `builtin:zeroth`, `builtin:first`, `builtin:mixed`
/// sized to the system.
fn load_tau(spec: &str, sys: &System) -> CliResult<Pair> {
    let n = sys.dims().total();
    let pair = match spec.strip_prefix("builtin:") {
        Some("zeroth") => BoundaryPair::zeroth(n),
        Some("first") => BoundaryPair::first(n),
        Some("mixed") => {
            let d0: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
            let d1: Vec<f64> = d0.iter().map(|x| 1.0 - x).collect();
            BoundaryPair::diagonal(&d0, &d1)?
        }
        Some(other) => return Err(invalid(format!("unknown built-in pair {other:?} (expected zeroth, first or mixed)"))),
        None => load_pair::<f64>(Path::new(spec))?,
    };
    if pair.size() != n {
        return Err(Error::Parse(format!("boundary pair file {spec}: field `c0`: expected {n}x{n} matrices, got size {}", pair.size())));
    }
    Ok(pair)
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(format!("{what}: {s:?} is not a finite number")))
}

fn parse_pair(s: &str, what: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(invalid(format!("{what}: expected two comma-separated numbers, got {s:?}")));
    }
    Ok((parse_f64(parts[0], what)?, parse_f64(parts[1], what)?))
}

fn parse_lambda(s: &str) -> CliResult<Complex> {
    let (re, im) = parse_pair(s, "--lambda")?;
    Ok(Complex::new(re, im))
}

fn parse_window(s: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = parse_pair(s, "--window")?;
    if lo >= hi {
        return Err(invalid(format!("--window: need MIN < MAX, got {s:?}")));
    }
    Ok((lo, hi))
}

/// `A:B:N` (N evenly spaced points) or a comma-separated list.
fn parse_axis(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(|x| parse_f64(x, what)).collect(),
        3 => {
            let (a, b) = (parse_f64(parts[0], what)?, parse_f64(parts[1], what)?);
            let n: usize = parts[2].trim().parse().map_err(|_| invalid(format!("{what}: bad point count {:?}", parts[2])))?;
            match n {
                0 => Err(invalid(format!("{what}: point count must be positive"))),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(invalid(format!("{what}: expected A:B:N or a comma-separated list, got {s:?}"))),
    }
}

/// `RE_AXIS/IM_AXIS`, each as in [`parse_axis`], or a single `RE,IM`.
fn parse_lambda_grid(s: &str) -> CliResult<Vec<Complex>> {
    match s.split_once('/') {
        Some((re, im)) => {
            let (re, im) = (parse_axis(re, "--lambda-grid")?, parse_axis(im, "--lambda-grid")?);
            Ok(re.iter().flat_map(|&x| im.iter().map(move |&y| Complex::new(x, y))).collect())
        }
        None => Ok(vec![parse_lambda(s)?]),
    }
}

fn parse_eps(s: Option<&str>) -> CliResult<Vec<f64>> {
    match s {
        None => Ok(default_eps_seq()),
        Some(s) => {
            let v = s.split(',').map(|x| parse_f64(x, "--eps-seq")).collect::<CliResult<Vec<_>>>()?;
            if v.len() < 3 || v.iter().any(|&e| e <= 0.0) || v.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("--eps-seq: need at least three positive, strictly decreasing values"));
            }
            Ok(v)
        }
    }
}

/// A numeric table; complex entries are split into `_re`/`_im` columns.
struct Table {
    title: String,
    shape: Option<(usize, usize)>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Table { title: title.into(), shape: None, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends row-major `prefix[i,j]_re/_im` columns for an `r x c` matrix.
    fn matrix_columns(mut self, prefix: &str, r: usize, c: usize) -> Self {
        self.shape = Some((r, c));
        for i in 0..r {
            for j in 0..c {
                self.columns.push(format!("{prefix}[{i},{j}]_re"));
                self.columns.push(format!("{prefix}[{i},{j}]_im"));
            }
        }
        self
    }

    fn vector_columns(mut self, prefix: &str, n: usize) -> Self {
        self.shape = Some((n, 1));
        for i in 0..n {
            self.columns.push(format!("{prefix}[{i}]_re"));
            self.columns.push(format!("{prefix}[{i}]_im"));
        }
        self
    }

    fn push(&mut self, mut lead: Vec<f64>, entries: impl IntoIterator<Item = Complex>) {
        for z in entries {
            lead.push(z.re);
            lead.push(z.im);
        }
        debug_assert_eq!(lead.len(), self.columns.len());
        self.rows.push(lead);
    }
}

fn row_major(m: &Matrix) -> Vec<Complex> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

struct Report {
    format: Format,
    profile: String,
    lines: Vec<String>,
    tables: Vec<Table>,
}

impl Report {
    fn new(format: Format, sys: &System) -> Self {
        Report { format, profile: sys.tol.profile(), lines: Vec::new(), tables: Vec::new() }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn render(&self) -> String {
        let mut out = String::new();
        match self.format {
            Format::Csv => {
                for t in &self.tables {
                    let _ = writeln!(out, "# table: {}", t.title);
                    if let Some((r, c)) = t.shape {
                        let _ = writeln!(out, "# shape: {r}x{c} row-major");
                    }
                    let _ = writeln!(out, "# tolerances: {}", self.profile);
                    let _ = writeln!(out, "{}", t.columns.join(","));
                    for row in &t.rows {
                        let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
                        let _ = writeln!(out, "{}", cells.join(","));
                    }
                }
                for l in &self.lines {
                    let _ = writeln!(out, "# {l}");
                }
            }
            Format::Text => {
                let _ = writeln!(out, "tolerances: {}", self.profile);
                for t in &self.tables {
                    let _ = writeln!(out, "\n{}", t.title);
                    let width = 14usize;
                    let head: Vec<String> = t.columns.iter().map(|c| format!("{c:>width$}")).collect();
                    let _ = writeln!(out, "{}", head.join(" "));
                    for row in &t.rows {
                        let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$.6e}")).collect();
                        let _ = writeln!(out, "{}", cells.join(" "));
                    }
                }
                if !self.lines.is_empty() {
                    out.push('\n');
                }
                for l in &self.lines {
                    let _ = writeln!(out, "{l}");
                }
            }
        }
        out
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn describe(c: &Common) -> CliResult<Report> {
    let sys = c.system()?;
    let mut r = Report::new(c.format, &sys);
    let d = sys.dims();
    let v = validate_system(&sys);
    let def = probe_definiteness(&sys);
    r.line(format!("name: {}", sys.name.as_deref().unwrap_or("(unnamed)")));
    r.line(format!("dims: h = {}, hhat = {}, n = {}", d.h, d.hhat, d.total()));
    r.line(format!("interval: [{}, {}]", sys.a(), sys.b()));
    r.line(format!("breakpoints: {:?}", sys.breaks()));
    r.line(format!("hermitian coefficients: {} (max defect {:.3e} at t = {})", v.hermitian_ok, v.max_hermitian_defect, v.defect_location));
    r.line(format!("weight positive semidefinite: {} (min eigenvalue {:.3e} at t = {})", v.psd_ok, v.min_delta_eigenvalue, v.min_eigenvalue_location));
    r.line(format!("weight invertible on a set of measure {:.6}", def.invertible_measure));
    r.line(format!("absolutely definite: {}", def.absolutely_definite));
    r.line(format!("definiteness: {:?}", def.definiteness));
    r.line(format!("boundary maps surjective: {}", boundary_maps(&sys).is_surjective()));
    r.line(format!("deficiency indices: ({0}, {0}) (regular system: every solution is weight-square-integrable)", d.total()));
    if !v.passed() {
        return Err(Error::MalformedCoefficients(format!("coefficient checks failed: {}", r.lines[4..6].join("; "))));
    }
    Ok(r)
}

fn run(command: &Command) -> CliResult<(String, Option<PathBuf>, bool)> {
    let (common, report) = match command {
        Command::Selftest { out } => {
            let rep = symspectra::selftest::selftest();
            return Ok((rep.text.clone(), out.clone(), rep.passed()));
        }
        Command::Describe(c) => (c, describe(c)?),
        Command::Propagate { common, lambda } => {
            let sys = common.system()?;
            let l = parse_lambda(lambda)?;
            let n = sys.dims().total();
            let prop = propagate(&sys, l)?;
            let mut t = Table::new(format!("fundamental solution at lambda = {l}"), &["t"]).matrix_columns("Y", n, n);
            for (x, y) in prop.checkpoints() {
                t.push(vec![x], row_major(y));
            }
            let check = lagrange_bilinear_check(&sys, l)?;
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            r.line(format!(
                "symplectic defect: absolute {:.3e}, relative {:.3e} (worst at t = {})",
                check.absolute, check.relative, check.worst_t
            ));
            (common, r)
        }
        Command::Weyl { common, lambda_grid } => {
            let sys = common.system()?;
            let n = sys.dims().total();
            let mut t = Table::new("Weyl function", &["lambda_re", "lambda_im", "min_eig_im_m"]).matrix_columns("M", n, n);
            for l in parse_lambda_grid(lambda_grid)? {
                let m = weyl_function(&sys, l)?.m;
                let min_eig = hermitian_eigenvalues(&imag_part(&m))[0];
                t.push(vec![l.re, l.im, min_eig], row_major(&m));
            }
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            (common, r)
        }
        Command::Charmatrix { common, tau, lambda } => {
            let sys = common.system()?;
            let pair = load_tau(tau, &sys)?;
            let l = parse_lambda(lambda)?;
            let n = sys.dims().total();
            let omega = characteristic_matrix(&sys, &pair, l)?;
            let mut t = Table::new(format!("characteristic matrix at lambda = {l}"), &["lambda_re", "lambda_im"]).matrix_columns("Omega", n, n);
            t.push(vec![l.re, l.im], row_major(&omega));
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            let v = validate_pair(&pair, sys.dims(), sys.tol.sym);
            r.line(format!("pair self-adjoint: {}", v.selfadjoint));
            (common, r)
        }
        Command::Eigen { common, tau, window } => {
            let sys = common.system()?;
            let pair = load_tau(tau, &sys)?;
            let (lo, hi) = parse_window(window)?;
            let n = sys.dims().total();
            let ev = eigenvalues_selfadjoint(&sys, &pair, (lo, hi))?;
            let mut t = Table::new(format!("eigenvalues in [{lo}, {hi}]"), &["lambda", "multiplicity", "residual"]).matrix_columns("jump", n, n);
            for e in &ev {
                t.push(vec![e.lambda, e.multiplicity as f64, e.residual], row_major(&e.jump()));
            }
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            r.line(format!("{} eigenvalues found", ev.len()));
            (common, r)
        }
        Command::Spectral { common, tau, window, eps_seq } => {
            let sys = common.system()?;
            let pair = load_tau(tau, &sys)?;
            let (lo, hi) = parse_window(window)?;
            let eps = parse_eps(eps_seq.as_deref())?;
            let n = sys.dims().total();
            let sf = build_spectral_function(&sys, &pair, (lo, hi), &eps)?;
            let mut jumps = Table::new("jumps", &["s"]).matrix_columns("A", n, n);
            for j in &sf.jumps {
                jumps.push(vec![j.s], row_major(&j.mass));
            }
            let mut inc = Table::new("increments", &["alpha", "beta", "error"]).matrix_columns("dSigma", n, n);
            if sf.increments.is_empty() {
                // Pure-jump case: tile the window and difference Σ.
                let tiles = ((hi - lo) / 0.25).ceil().max(1.0) as usize;
                for k in 0..tiles {
                    let a = lo + (hi - lo) * k as f64 / tiles as f64;
                    let b = lo + (hi - lo) * (k + 1) as f64 / tiles as f64;
                    inc.push(vec![a, b, 0.0], row_major(&(sf.eval(b) - sf.eval(a))));
                }
            } else {
                for i in &sf.increments {
                    inc.push(vec![i.alpha, i.beta, i.error], row_major(&i.value));
                }
            }
            let mut r = Report::new(common.format, &sys);
            r.tables.push(jumps);
            r.tables.push(inc);
            r.line(format!("possible continuous part: {}", sf.possible_continuous));
            (common, r)
        }
        Command::Parseval { common, tau, window, f, eps_seq } => {
            let sys = common.system()?;
            let pair = load_tau(tau, &sys)?;
            let (lo, hi) = parse_window(window)?;
            let eps = parse_eps(eps_seq.as_deref())?;
            let func = load_function(f, &sys)?;
            let sf = build_spectral_function(&sys, &pair, (lo, hi), &eps)?;
            if sf.possible_continuous {
                return Err(invalid("parseval needs a pure-jump spectral function (constant self-adjoint pair)"));
            }
            let truncation = lo.abs().min(hi.abs());
            let basis = mul_tmin_basis(&sys, 3)?;
            let rep = parseval_defect(&sys, &sf, &func, truncation, (!basis.is_empty()).then_some(&basis))?;
            let mut r = Report::new(common.format, &sys);
            let mut t = Table::new("Parseval defect", &["truncation", "terms", "norm_sq", "truncated_sum", "raw_defect", "tail_estimate", "corrected_defect"]);
            t.push(vec![rep.truncation, rep.terms as f64, rep.norm_sq, rep.truncated_sum, rep.raw_defect, rep.tail_estimate, rep.corrected_defect], []);
            r.tables.push(t);
            for (side, fit) in [("positive", rep.tail_positive), ("negative", rep.tail_negative)] {
                if let Some(fit) = fit {
                    r.line(format!("{side} tail: terms ~ {:.4e} s^-{:.4}, spacing {:.4}, estimated sum {:.4e}", fit.coefficient, fit.exponent, fit.spacing, fit.sum));
                }
            }
            if let (Some(n), Some(d)) = (rep.projected_norm_sq, rep.projected_defect) {
                r.line(format!("after projecting off mul T_min: norm^2 {n:.6e}, defect {d:.3e}"));
            }
            let iso = isometry_report(&sys, &sf, std::slice::from_ref(&func), &basis, truncation, 1e-8, 1e-3)?;
            r.line(format!("mul T_min basis size: {}", basis.elements.len()));
            r.line(format!("verdict: {}", iso.verdict));
            (common, r)
        }
        Command::Fourier { common, f, s_grid } => {
            let sys = common.system()?;
            let func = load_function(f, &sys)?;
            let grid = parse_axis(s_grid, "--s-grid")?;
            let res = fourier_transform(&sys, &func, &grid)?;
            let mut t = Table::new(format!("Fourier transform ({})", res.provenance), &["s"]).vector_columns("fhat", sys.dims().total());
            for (s, v) in res.s_grid.iter().zip(&res.values) {
                t.push(vec![*s], v.iter().copied());
            }
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            (common, r)
        }
        Command::Mulmin { common, modes } => {
            let sys = common.system()?;
            let basis = mul_tmin_basis(&sys, *modes)?;
            let mut t = Table::new("mul T_min basis", &["index", "equation_residual", "kernel_residual", "y_a_norm", "y_b_norm"]);
            for (k, e) in basis.elements.iter().enumerate() {
                t.push(vec![k as f64, e.equation_residual, e.kernel_residual, e.y_a.norm(), e.y_b.norm()], []);
            }
            let mut r = Report::new(common.format, &sys);
            r.tables.push(t);
            if basis.is_empty() {
                r.line("mul T_min is trivial (weight has no kernel on any segment)");
            } else {
                r.line(format!("{} basis elements ({modes} modes per kernel direction); mul T_min is infinite-dimensional", basis.elements.len()));
            }
            (common, r)
        }
        Command::ResolventCheck { common, tau, lambda, f } => {
            let sys = common.system()?;
            let pair = load_tau(tau, &sys)?;
            let l = parse_lambda(lambda)?;
            let func: Function = load_function(f, &sys)?;
            let rep = resolvent_crosscheck(&sys, &pair, l, &func)?;
            let mut r = Report::new(common.format, &sys);
            let mut t = Table::new(
                format!("resolvent cross-check at lambda = {l}"),
                &["defect", "ode_residual_integral", "ode_residual_bvp", "boundary_residual_integral", "boundary_residual_bvp"],
            );
            t.push(vec![rep.defect, rep.ode_residual_integral, rep.ode_residual_bvp, rep.boundary_residual_integral, rep.boundary_residual_bvp], []);
            r.tables.push(t);
            if validate_pair(&pair, sys.dims(), sys.tol.sym).selfadjoint {
                let mu = Complex::new(l.re, -l.im);
                if mu != l {
                    r.line(format!("first resolvent identity defect (mu = conj lambda): {:.3e}", resolvent_identity_check(&sys, &pair, l, mu, &func)?));
                }
            }
            let adm = admissibility(&sys, &pair, &default_radii())?;
            r.line(format!("admissible: {} (|B| = {:.3e}, |B^| = {:.3e})", adm.admissible, adm.b_tau.norm(), adm.bhat_tau.norm()));
            (common, r)
        }
    };
    Ok((report.render(), common.out.clone(), true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("SYMSPECTRA_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SYMSPECTRA_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli.command) {
        Ok((text, out, passed)) => match emit(&text, out.as_deref()) {
            Ok(()) if passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
