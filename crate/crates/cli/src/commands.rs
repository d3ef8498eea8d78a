use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use okm_core::dataio::{load_csv, write_covering_csv};
use okm_core::{
    estimate_k, gram, pair_metrics, run_okm, DataMatrix, Error, LabelColumn, OkmConfig,
    PairMetrics, SpectrumReport,
};
use serde::Serialize;

use crate::args::{ClusterArgs, DataArgs, EstimateArgs, ExperimentArgs, Format};

/// Eigenvalues shown by `estimate-k`.
pub const SPECTRUM_TOP: usize = 20;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Parse { .. } | Error::RaggedRows { .. } | Error::EmptyFile => 2,
            Error::NoConvergence { .. } => 3,
            Error::InsufficientData { .. } => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn load(args: &DataArgs, default_labels: LabelColumn) -> CmdResult<DataMatrix> {
    Ok(load_csv(
        &args.data,
        args.label_column(default_labels),
        args.label_sep,
    )?)
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> CmdResult<()> {
    let io_fail = |e: std::io::Error| Failure::new(2, format!("writing output: {e}"));
    match path {
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_fail),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_fail)?;
            tmp.write_all(text.as_bytes()).map_err(io_fail)?;
            tmp.persist(path).map_err(|e| io_fail(e.error))?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumOutput<'a> {
    kernel: String,
    n: usize,
    estimated_k: usize,
    policy: &'a okm_core::SignificancePolicy,
    eigenvalues: &'a [f64],
}

pub fn render_spectrum(report: &SpectrumReport, kernel: &str, n: usize, format: Format) -> String {
    let top = &report.eigenvalues[..report.eigenvalues.len().min(SPECTRUM_TOP)];
    let lead = report.eigenvalues[0];
    let ratio = |l: f64| if lead != 0.0 { l / lead } else { 0.0 };
    let mut out = String::new();
    match format {
        Format::Table => {
            let policy = match report.policy.kind {
                okm_core::PolicyKind::LargestEigengap => "eigengap".to_string(),
                okm_core::PolicyKind::RatioThreshold => format!("ratio(tau={})", report.policy.tau),
            };
            let _ = writeln!(out, "kernel: {kernel}");
            let _ = writeln!(out, "n: {n}");
            let _ = writeln!(out, "policy: {policy}");
            let _ = writeln!(out, "{:>4}  {:>16}  {:>12}", "rank", "eigenvalue", "ratio");
            for (i, l) in top.iter().enumerate() {
                let _ = writeln!(out, "{:>4}  {:>16.9e}  {:>12.6e}", i + 1, l, ratio(*l));
            }
            let _ = writeln!(out, "estimated_k: {}", report.estimated_k);
        }
        Format::Csv => {
            out.push_str("rank,eigenvalue,ratio\n");
            for (i, l) in top.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", i + 1, l, ratio(*l));
            }
        }
        Format::Json => {
            let payload = SpectrumOutput {
                kernel: kernel.to_string(),
                n,
                estimated_k: report.estimated_k,
                policy: &report.policy,
                eigenvalues: top,
            };
            out = serde_json::to_string_pretty(&payload).expect("spectrum serializes");
            out.push('\n');
        }
    }
    out
}

pub fn estimate_k_cmd(args: &EstimateArgs) -> CmdResult<()> {
    let data = load(&args.data, LabelColumn::None)?;
    if data.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.n(),
        }
        .into());
    }
    let spec = args.kernel.spec();
    let g = gram(spec, &data)?;
    let report = estimate_k(&g, args.policy.policy())?;
    emit(
        &render_spectrum(&report, &spec.to_string(), data.n(), args.format),
        args.out.as_deref(),
    )
}

pub fn cluster_cmd(args: &ClusterArgs) -> CmdResult<()> {
    let data = load(&args.data, LabelColumn::None)?;
    let config = OkmConfig {
        k: args.k,
        dissimilarity: args.okm.dissimilarity(),
        max_iter: args.okm.max_iter,
        rel_tol: args.okm.rel_tol,
        seed: args.seed,
    };
    let cov = run_okm(&data, &config)?;
    let summary = format!(
        "objective: {}\niterations: {}\nstop: {:?}\n",
        cov.objective, cov.iterations, cov.stop_reason
    );
    emit(&write_covering_csv(&cov), args.out.as_deref())?;
    if args.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub objective: f64,
    pub iterations: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub ncilp: u64,
    pub nilp: u64,
    pub ntlp: u64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        Self {
            min,
            max,
            mean: sum / count as f64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub n: usize,
    pub p: usize,
    pub measure: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    pub runs: Vec<RunRow>,
    pub precision: Summary,
    pub recall: Summary,
    pub f_measure: Summary,
    pub objective: Summary,
}

impl ExperimentReport {
    pub fn from_runs(
        dataset: String,
        data: &DataMatrix,
        measure: String,
        k: usize,
        spectrum: Option<&SpectrumReport>,
        runs: Vec<RunRow>,
    ) -> Self {
        Self {
            dataset,
            n: data.n(),
            p: data.p(),
            measure,
            k,
            estimated_k: spectrum.map(|s| s.estimated_k),
            spectrum: spectrum
                .map(|s| s.eigenvalues[..s.eigenvalues.len().min(SPECTRUM_TOP)].to_vec()),
            precision: Summary::of(runs.iter().map(|r| r.precision)),
            recall: Summary::of(runs.iter().map(|r| r.recall)),
            f_measure: Summary::of(runs.iter().map(|r| r.f_measure)),
            objective: Summary::of(runs.iter().map(|r| r.objective)),
            runs,
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Json => {
                out = serde_json::to_string_pretty(self).expect("report serializes");
                out.push('\n');
            }
            Format::Csv => {
                out.push_str("seed,objective,iterations,precision,recall,f_measure\n");
                for r in &self.runs {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.seed, r.objective, r.iterations, r.precision, r.recall, r.f_measure
                    );
                }
            }
            Format::Table => self.render_table(&mut out),
        }
        out
    }

    fn render_table(&self, out: &mut String) {
        let _ = writeln!(out, "dataset: {} (n={}, p={})", self.dataset, self.n, self.p);
        let _ = writeln!(out, "measure: {}", self.measure);
        match self.estimated_k {
            Some(e) => {
                let _ = writeln!(out, "k: {} (estimated)", e);
                if let Some(s) = &self.spectrum {
                    let shown: Vec<String> = s.iter().take(5).map(|l| format!("{l:.6e}")).collect();
                    let _ = writeln!(out, "leading eigenvalues: {}", shown.join(" "));
                }
            }
            None => {
                let _ = writeln!(out, "k: {}", self.k);
            }
        }
        let _ = writeln!(out, "restarts: {}", self.runs.len());
        out.push('\n');
        let _ = writeln!(
            out,
            "{:>6}  {:>14}  {:>5}  {:>9}  {:>9}  {:>9}",
            "seed", "objective", "iter", "precision", "recall", "f-measure"
        );
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{:>6}  {:>14.6}  {:>5}  {:>9.6}  {:>9.6}  {:>9.6}",
                r.seed, r.objective, r.iterations, r.precision, r.recall, r.f_measure
            );
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<10} {:^29} {:^29} {:^29}",
            "", "MIN", "MAX", "MEAN"
        );
        let head = format!("{:>9} {:>9} {:>9}", "Precision", "Recall", "F-measure");
        let _ = writeln!(out, "{:<10} {head} {head} {head}", "measure");
        let cell = |s: Summary, pick: fn(&Summary) -> f64| format!("{:>9.3}", pick(&s));
        let mut line = format!("{:<10}", self.measure);
        for pick in [
            (|s: &Summary| s.min) as fn(&Summary) -> f64,
            |s: &Summary| s.max,
            |s: &Summary| s.mean,
        ] {
            let _ = write!(
                line,
                " {} {} {}",
                cell(self.precision, pick),
                cell(self.recall, pick),
                cell(self.f_measure, pick)
            );
        }
        let _ = writeln!(out, "{line}");
    }
}

/// Runs `config` once per seed on up to `jobs` threads; rows come back in
/// seed order regardless of scheduling.
pub fn run_restarts(
    data: &DataMatrix,
    config: &OkmConfig,
    seeds: &[u64],
    jobs: usize,
) -> CmdResult<Vec<RunRow>> {
    let truth = data
        .labels()
        .ok_or_else(|| Failure::new(5, "experiment requires ground-truth labels (--label-col)"))?;
    let one = |seed: u64| -> okm_core::Result<RunRow> {
        let cfg = OkmConfig {
            seed,
            ..config.clone()
        };
        let cov = run_okm(data, &cfg)?;
        let m: PairMetrics = pair_metrics(&cov, truth)?;
        Ok(RunRow {
            seed,
            objective: cov.objective,
            iterations: cov.iterations,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
            ncilp: m.ncilp,
            nilp: m.nilp,
            ntlp: m.ntlp,
        })
    };

    let slots: Vec<Mutex<Option<okm_core::Result<RunRow>>>> =
        seeds.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, seeds.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                *slots[i].lock().unwrap() = Some(one(seeds[i]));
            });
        }
    });
    slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .unwrap()
                .expect("every seed is processed")
                .map_err(Failure::from)
        })
        .collect()
}

pub fn experiment_cmd(args: &ExperimentArgs) -> CmdResult<()> {
    if args.restarts == 0 {
        return Err(Failure::new(1, "--restarts must be >= 1"));
    }
    let data = load(&args.data, LabelColumn::Last)?;
    if data.labels().is_none() {
        return Err(Failure::new(
            5,
            "experiment requires ground-truth labels (--label-col)",
        ));
    }
    let (k, spectrum) = match args.k {
        Some(k) => (k, None),
        None => {
            let g = gram(args.okm.estimation_kernel(), &data)?;
            let report = estimate_k(&g, args.policy.policy())?;
            (report.estimated_k, Some(report))
        }
    };
    let config = OkmConfig {
        k,
        dissimilarity: args.okm.dissimilarity(),
        max_iter: args.okm.max_iter,
        rel_tol: args.okm.rel_tol,
        seed: args.seed,
    };
    let seeds: Vec<u64> = (0..args.restarts as u64).map(|i| args.seed + i).collect();
    let runs = run_restarts(&data, &config, &seeds, args.jobs)?;
    let report = ExperimentReport::from_runs(
        args.data.data.display().to_string(),
        &data,
        config.dissimilarity.to_string(),
        k,
        spectrum.as_ref(),
        runs,
    );
    emit(&report.render(args.format), args.out.as_deref())
}
