use std::io::Write;
use std::path::Path;

use ballspec::bvp::{self, SolveOptions, SolveReport, UnsolvableReport};
use ballspec::decomposition::{analyze, parseval_report, SpectralCoeffs};
use ballspec::eigenbasis::{Basis, EigenEntry, EigenTable, Family, MultiIndex, Sign};
use ballspec::fieldgrid::{BallGrid, FdOracle, ProbeLattice, StencilOrder, VectorField, VectorInterpolant};
use ballspec::geometry::{to_spherical_components, Spherical};
use ballspec::sobolev::{membership_test, MembershipOptions};
use ballspec::specialfn::{find_zeros, ZeroKind, ZeroRequest};
use ballspec::verify::fields::{CompactBump, HelmholtzField};
use ballspec::verify::{self, Suite, VerifyConfig};
use ballspec::Error;
use clap::ValueEnum;
use serde::Serialize;

use crate::config::{overlay, overlay_opt, RunConfig};
use crate::{
    CliError, Command, DecomposeArgs, EigentableArgs, FamilyArg, FieldArg, GridArgs, KindArg, ModeArgs,
    ModeFamilyArg, SampleFieldArgs, SampleGridArgs, SobolevArgs, SolveArgs, VerifyArgs, ZerosArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::Zeros(mut a) => {
            apply_zeros(&mut a, cfg)?;
            zeros(&a)
        }
        Command::Eigentable(mut a) => {
            overlay(&mut a.radius, &cfg.radius);
            overlay(&mut a.cutoff, &cfg.cutoff);
            overlay_opt(&mut a.nmax, &cfg.nmax);
            overlay_opt(&mut a.output, &cfg.output);
            if let Some(f) = &cfg.family {
                a.family = parse_enum(f, "family")?;
            }
            eigentable(&a)
        }
        Command::SampleGrid(mut a) => {
            apply_grid(&mut a.grid, cfg);
            overlay_opt(&mut a.output, &cfg.output);
            sample_grid(&a)
        }
        Command::SampleField(mut a) => {
            apply_grid(&mut a.grid, cfg);
            apply_mode(&mut a.mode, cfg)?;
            overlay_opt(&mut a.output, &cfg.output);
            if let Some(f) = &cfg.field {
                a.field = parse_enum(f, "field")?;
            }
            sample_field(&a)
        }
        Command::Decompose(mut a) => {
            overlay(&mut a.cutoff, &cfg.cutoff);
            overlay(&mut a.input, &cfg.input);
            overlay_opt(&mut a.output, &cfg.output);
            overlay_opt(&mut a.report, &cfg.report);
            decompose(&a)
        }
        Command::Sobolev(mut a) => {
            apply_grid(&mut a.grid, cfg);
            apply_mode(&mut a.mode, cfg)?;
            overlay(&mut a.cutoff, &cfg.cutoff);
            overlay(&mut a.s, &cfg.s);
            overlay(&mut a.trace_tol, &cfg.trace_tol);
            overlay_opt(&mut a.output, &cfg.output);
            if cfg.input.is_some() {
                a.input.clone_from(&cfg.input);
                a.field = None;
            }
            if let Some(f) = &cfg.field {
                a.field = Some(parse_enum(f, "field")?);
                a.input = None;
            }
            sobolev(&a)
        }
        Command::Solve(mut a) => {
            overlay(&mut a.lambda, &cfg.lambda);
            overlay(&mut a.input, &cfg.input);
            overlay(&mut a.cutoff, &cfg.cutoff);
            overlay_opt(&mut a.tol_res, &cfg.tol_res);
            overlay(&mut a.solvability_tol, &cfg.solvability_tol);
            overlay_opt(&mut a.output, &cfg.output);
            solve(&a)
        }
        Command::Verify(mut a) => {
            overlay(&mut a.suite, &cfg.suite);
            overlay(&mut a.nmax, &cfg.nmax);
            overlay(&mut a.cutoff, &cfg.cutoff);
            overlay(&mut a.radius, &cfg.radius);
            overlay_opt(&mut a.seed, &cfg.seed);
            overlay_opt(&mut a.output, &cfg.output);
            verify(&a)
        }
    }
}

fn parse_enum<T: ValueEnum>(raw: &str, what: &str) -> Result<T> {
    T::from_str(raw, false).map_err(|_| CliError::Usage(format!("config: invalid {what} `{raw}`")))
}

fn apply_zeros(a: &mut ZerosArgs, cfg: &RunConfig) -> Result<()> {
    overlay(&mut a.n, &cfg.n);
    overlay_opt(&mut a.output, &cfg.output);
    if let Some(k) = &cfg.kind {
        a.kind = parse_enum(k, "kind")?;
    }
    if cfg.count.is_some() {
        a.count = cfg.count;
        a.cutoff = None;
    }
    if cfg.cutoff.is_some() {
        a.cutoff = cfg.cutoff;
        a.count = None;
    }
    Ok(())
}

fn apply_grid(g: &mut GridArgs, cfg: &RunConfig) {
    overlay(&mut g.radius, &cfg.radius);
    overlay(&mut g.nr, &cfg.nr);
    overlay(&mut g.ntheta, &cfg.ntheta);
    overlay(&mut g.nphi, &cfg.nphi);
}

fn apply_mode(m: &mut ModeArgs, cfg: &RunConfig) -> Result<()> {
    if let Some(n) = cfg.n {
        m.n = usize::try_from(n).map_err(|_| CliError::Usage(format!("config: n = {n} must be nonnegative")))?;
    }
    overlay(&mut m.m, &cfg.m);
    overlay(&mut m.k, &cfg.k);
    if let Some(f) = &cfg.family {
        m.family = parse_enum(f, "family")?;
    }
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Format(format!("stdout: {e}"))),
    }
}

fn read_in(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Format(e.to_string()))
}

fn zeros(a: &ZerosArgs) -> Result<()> {
    let n = usize::try_from(a.n).map_err(|_| CliError::Usage(format!("order n = {} must be nonnegative", a.n)))?;
    let kind = match a.kind {
        KindArg::Psi => ZeroKind::Psi,
        KindArg::PsiPrime => ZeroKind::PsiPrime,
    };
    let request = match (a.count, a.cutoff) {
        (Some(c), _) => ZeroRequest::Count(c),
        (None, Some(z)) => ZeroRequest::Below(z),
        (None, None) => return Err(CliError::Usage("one of --count or --cutoff is required".into())),
    };
    let table = find_zeros(kind, n, request)?;
    write_out(a.output.as_deref(), &table.to_csv())
}

fn eigentable(a: &EigentableArgs) -> Result<()> {
    let family = match a.family {
        FamilyArg::GradDiv => Family::GradDiv,
        FamilyArg::Curl => Family::Curl,
    };
    let mut table = EigenTable::build(family, a.radius, a.cutoff)?;
    if let Some(n) = a.nmax {
        table = table.restrict_degree(n);
    }
    write_out(a.output.as_deref(), &table.to_json()?)
}

fn grid_from(g: &GridArgs) -> Result<BallGrid> {
    Ok(BallGrid::new(g.radius, g.nr, g.ntheta, g.nphi)?)
}

fn sample_grid(a: &SampleGridArgs) -> Result<()> {
    write_out(a.output.as_deref(), &grid_from(&a.grid)?.nodes_csv())
}

fn mode_entry(radius: f64, m: &ModeArgs) -> Result<EigenEntry> {
    let (family, sign, kind) = match m.family {
        ModeFamilyArg::GradDiv => (Family::GradDiv, None, ZeroKind::PsiPrime),
        ModeFamilyArg::CurlPlus => (Family::Curl, Some(Sign::Plus), ZeroKind::Psi),
        ModeFamilyArg::CurlMinus => (Family::Curl, Some(Sign::Minus), ZeroKind::Psi),
    };
    let index = MultiIndex::new(m.n, m.m, m.k)?;
    if m.m == 0 {
        return Err(CliError::Usage("radial index m starts at 1".into()));
    }
    let zero = find_zeros(kind, m.n, ZeroRequest::Count(m.m))?
        .entries
        .last()
        .map(|e| e.zero)
        .ok_or_else(|| CliError::Usage(format!("no eigenfield for {index}")))?;
    let table = EigenTable::build(family, radius, zero + 0.5)?;
    Ok(*table.get(index, sign)?)
}

type Handle = Box<dyn Fn(Spherical) -> [f64; 3] + Sync>;

fn analytic_field(field: FieldArg, radius: f64, mode: &ModeArgs) -> Result<Handle> {
    let hf = HelmholtzField::with_radius(radius);
    Ok(match field {
        FieldArg::Helmholtz => Box::new(move |p| hf.eval(p)),
        FieldArg::Potential => Box::new(move |p| hf.potential_part(p)),
        FieldArg::Solenoidal => Box::new(move |p| hf.solenoidal_part(p)),
        FieldArg::Radial => Box::new(|p: Spherical| [2.0 * p.r, 0.0, 0.0]),
        FieldArg::Compact => {
            let bump = CompactBump {
                center: [0.02, -0.01, 0.03],
                support: 0.9,
                sharpness: 10.0,
            };
            Box::new(move |p: Spherical| {
                let x = p.to_cartesian().map(|c| c / radius);
                to_spherical_components(p.theta, p.phi, bump.gradient(x).map(|c| c / radius))
            })
        }
        FieldArg::Mode => {
            let e = mode_entry(radius, mode)?;
            Box::new(move |p| e.field(p))
        }
    })
}

fn sample_field(a: &SampleFieldArgs) -> Result<()> {
    let grid = grid_from(&a.grid)?;
    let f = analytic_field(a.field, a.grid.radius, &a.mode)?;
    let field = VectorField::from_fn(&grid, &f);
    write_out(a.output.as_deref(), &field.to_json()?)
}

fn load_field(path: &Path) -> Result<VectorField> {
    Ok(VectorField::from_json(&read_in(path)?)?)
}

fn decompose(a: &DecomposeArgs) -> Result<()> {
    let field = load_field(&a.input)?;
    let basis = Basis::new(field.grid.radius, a.cutoff)?;
    let c = analyze(&field, &basis)?;
    if let Some(report) = &a.report {
        write_out(Some(report), &to_json(&parseval_report(&field, &c))?)?;
    }
    write_out(a.output.as_deref(), &c.to_json()?)
}

fn sobolev(a: &SobolevArgs) -> Result<()> {
    let opts = MembershipOptions {
        trace_tol: a.trace_tol,
        interpolated: a.input.is_some(),
        ..MembershipOptions::default()
    };
    let report = match (&a.input, a.field) {
        (Some(path), _) => {
            let field = load_field(path)?;
            let c = analyze(&field, &Basis::new(field.grid.radius, a.cutoff)?)?;
            let handle = VectorInterpolant::new(&field);
            membership_test(&handle, &c, a.s, &opts)?
        }
        (None, Some(kind)) => {
            let grid = grid_from(&a.grid)?;
            let f = analytic_field(kind, a.grid.radius, &a.mode)?;
            let field = VectorField::from_fn(&grid, &f);
            let c = analyze(&field, &Basis::new(a.grid.radius, a.cutoff)?)?;
            membership_test(&|p: Spherical| f(p), &c, a.s, &opts)?
        }
        (None, None) => return Err(CliError::Usage("one of --input or --field is required".into())),
    };
    write_out(a.output.as_deref(), &to_json(&report)?)
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum SolveOutput<'a> {
    Solved(&'a SolveReport),
    Unsolvable(&'a UnsolvableReport),
}

fn load_rhs(path: &Path, cutoff: f64) -> Result<SpectralCoeffs> {
    let text = read_in(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    if value.get("components").is_some() {
        let field = VectorField::from_json(&text)?;
        Ok(analyze(&field, &Basis::new(field.grid.radius, cutoff)?)?)
    } else if value.get("potential").is_some() {
        Ok(SpectralCoeffs::from_json(&text)?)
    } else {
        Err(CliError::Format(format!(
            "{}: expected field JSON (with `components`) or coefficient JSON (with `potential`)",
            path.display()
        )))
    }
}

fn solve(a: &SolveArgs) -> Result<()> {
    let f = load_rhs(&a.input, a.cutoff)?;
    let opts = SolveOptions {
        tol_res: a.tol_res,
        solvability_tol: a.solvability_tol,
    };
    match bvp::solve_with(&f, a.lambda, opts) {
        Ok(sol) => {
            let fd = if a.fd {
                let radius = f.radius();
                Some(bvp::fd_residual(
                    &sol.v,
                    &bvp::remove_resonant_components(&f, &sol.resonance),
                    a.lambda,
                    &FdOracle::new(StencilOrder::Eight, 0.005 * radius),
                    &ProbeLattice::standard(radius),
                )?)
            } else {
                None
            };
            let report = sol.report(&f, fd)?;
            write_out(a.output.as_deref(), &to_json(&SolveOutput::Solved(&report))?)
        }
        Err(Error::Unsolvable(report)) => {
            write_out(a.output.as_deref(), &to_json(&SolveOutput::Unsolvable(&report))?)?;
            Err(CliError::Failed(format!(
                "not solvable at λ = {}: Fredholm defect {:e}",
                a.lambda, report.fredholm_defect
            )))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(a: &VerifyArgs) -> Result<()> {
    let suite: Suite = a.suite.parse()?;
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        radius: a.radius,
        n_max: a.nmax,
        cutoff: a.cutoff,
        seed: a.seed.unwrap_or(defaults.seed),
    };
    let report = verify::run(suite, &cfg)?;
    write_out(a.output.as_deref(), &report.to_json()?)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .suites
            .iter()
            .flat_map(|s| s.failures().map(move |c| format!("{}/{}", s.suite, c.name)))
            .collect();
        Err(CliError::Failed(format!("verification failed: {}", failed.join(", "))))
    }
}

