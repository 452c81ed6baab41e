//! Iteration counts, violation and objective for SMC across ranks and sampling ratios.

use std::thread;

use proxproj::gen::{degrees_of_freedom, gen_smc};
use proxproj::instance::ProblemInstance;
use proxproj::{Error, Result};

use crate::run::{execute, MethodTag, RunSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableConfig {
    pub n: usize,
    pub rank: usize,
    pub oversample: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    pub method: MethodTag,
    /// Per seed, in seed order.
    pub iters: Vec<usize>,
    pub viol: Vec<f64>,
    pub objective: Vec<f64>,
}

impl MethodStats {
    pub fn mean_iters(&self) -> f64 {
        mean(&self.iters.iter().map(|&k| k as f64).collect::<Vec<_>>())
    }

    pub fn median_iters(&self) -> f64 {
        let mut v: Vec<f64> = self.iters.iter().map(|&k| k as f64).collect();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => v[n / 2],
            n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
        }
    }

    pub fn mean_viol(&self) -> f64 {
        mean(&self.viol)
    }

    pub fn mean_objective(&self) -> f64 {
        mean(&self.objective)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Observed-entry count and `(iterations, violation, objective)` per method.
type SeedRuns = (usize, Vec<(usize, f64, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub config: TableConfig,
    /// `s / d_r`.
    pub ratio_dof: f64,
    /// `s / n^2`.
    pub ratio_entries: f64,
    pub methods: Vec<MethodStats>,
}

/// `base.method` is ignored; each entry of `methods` runs with the remaining settings.
/// Seeds run on separate threads.
pub fn table_smc(
    configs: &[TableConfig],
    seeds: &[u64],
    methods: &[MethodTag],
    base: &RunSettings,
    noise_sigma: Option<f64>,
) -> Result<Vec<TableRow>> {
    if seeds.is_empty() || methods.is_empty() {
        return Err(Error::Config("table needs at least one seed and one method".into()));
    }
    let mut rows = Vec::with_capacity(configs.len());
    for &config in configs {
        let per_seed: Vec<Result<SeedRuns>> = thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .iter()
                .map(|&seed| {
                    scope.spawn(move || -> Result<SeedRuns> {
                        let inst = gen_smc(config.n, config.rank, config.oversample, noise_sigma, seed)?;
                        let s = inst.problem.omega().len();
                        let p = ProblemInstance::Smc(inst.problem);
                        let mut out = Vec::with_capacity(methods.len());
                        for &method in methods {
                            let settings = RunSettings {
                                method,
                                log_every: base.max_iters,
                                ..base.clone()
                            };
                            let run = execute(&p, &settings)?;
                            let last = run.log.last().expect("at least one iteration");
                            out.push((run.log.iterations, last.violation, last.objective));
                        }
                        Ok((s, out))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut stats: Vec<MethodStats> = methods
            .iter()
            .map(|&method| MethodStats {
                method,
                iters: Vec::new(),
                viol: Vec::new(),
                objective: Vec::new(),
            })
            .collect();
        let mut s = 0;
        for res in per_seed {
            let (size, runs) = res?;
            s = size;
            for (st, (k, v, o)) in stats.iter_mut().zip(runs) {
                st.iters.push(k);
                st.viol.push(v);
                st.objective.push(o);
            }
        }
        rows.push(TableRow {
            config,
            ratio_dof: s as f64 / degrees_of_freedom(config.n, config.rank) as f64,
            ratio_entries: s as f64 / (config.n * config.n) as f64,
            methods: stats,
        });
    }
    Ok(rows)
}

pub fn table_csv(rows: &[TableRow]) -> Result<Vec<u8>> {
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string(), "s_over_dr".into(), "s_over_n2".into()];
    if let Some(first) = rows.first() {
        for m in &first.methods {
            for col in ["iters", "iters_median", "viol", "objective"] {
                header.push(format!("{}_{col}", m.method));
            }
        }
    }
    w.write_record(&header).map_err(to_io)?;
    for r in rows {
        let mut rec = vec![
            r.config.rank.to_string(),
            format!("{:.4}", r.ratio_dof),
            format!("{:.4}", r.ratio_entries),
        ];
        for m in &r.methods {
            rec.push(m.mean_iters().to_string());
            rec.push(m.median_iters().to_string());
            rec.push(format!("{:.3e}", m.mean_viol()));
            rec.push(format!("{:.6e}", m.mean_objective()));
        }
        w.write_record(&rec).map_err(to_io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}
