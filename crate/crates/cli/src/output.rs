use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use evigrid::export::{write_perception_csv, write_pgm, write_ppm};
use evigrid::fusion::EpochStats;
use evigrid::render::{decision_image, pignistic_image, zeta_image, MovingTrace, RenderStyle};
use evigrid::Pipeline;

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub style: RenderStyle,
    pub every: usize,
    pub dump_epochs: Vec<usize>,
    pub params: Option<PathBuf>,
}

/// Writes renders, grid dumps and per-epoch stats into the output directory.
pub struct Output {
    opts: OutputOptions,
    stats: BufWriter<File>,
    trace: Option<MovingTrace>,
}

impl Output {
    pub fn create(opts: OutputOptions) -> anyhow::Result<Self> {
        fs::create_dir_all(&opts.dir)
            .with_context(|| format!("cannot create output directory {}", opts.dir.display()))?;
        let path = opts.dir.join("stats.ndjson");
        let stats =
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self {
            opts,
            stats: BufWriter::new(stats),
            trace: None,
        })
    }

    fn path(&self, name: String) -> PathBuf {
        self.opts.dir.join(name)
    }

    /// Records epoch `k` after the pipeline has processed it.
    pub fn epoch(
        &mut self,
        k: usize,
        stats: &EpochStats,
        pipeline: &Pipeline,
    ) -> anyhow::Result<()> {
        serde_json::to_writer(&mut self.stats, stats)?;
        self.stats.write_all(b"\n")?;

        let trace = self
            .trace
            .get_or_insert_with(|| MovingTrace::new(*pipeline.spec()));
        trace.accumulate(pipeline.decisions());

        if k.is_multiple_of(self.opts.every) {
            if self.opts.style.decision() {
                let img = decision_image(pipeline.spec(), pipeline.decisions());
                write_file(&self.path(format!("decision_{k:04}.ppm")), |w| {
                    write_ppm(w, &img)
                })?;
            }
            if self.opts.style.pignistic() {
                let img = pignistic_image(pipeline.perception())?;
                write_file(&self.path(format!("pignistic_{k:04}.ppm")), |w| {
                    write_ppm(w, &img)
                })?;
            }
            let img = zeta_image(pipeline.perception());
            write_file(&self.path(format!("zeta_{k:04}.pgm")), |w| {
                write_pgm(w, &img)
            })?;
        }
        if self.opts.dump_epochs.contains(&k) {
            write_file(&self.path(format!("grid_{k:04}.csv")), |w| {
                write_perception_csv(w, pipeline.perception())
            })?;
        }
        log::debug!("epoch {k}: {stats:?}");
        Ok(())
    }

    /// Writes the moving-object trace over the final decisions and flushes
    /// the stats. `epochs` is the number of epochs processed.
    pub fn finish(mut self, epochs: usize, pipeline: &Pipeline) -> anyhow::Result<()> {
        self.stats.flush()?;
        for &k in self.opts.dump_epochs.iter().filter(|&&k| k >= epochs) {
            log::warn!("--dump-grid {k}: only {epochs} epochs were processed");
        }
        if let Some(trace) = &self.trace {
            let base = decision_image(pipeline.spec(), pipeline.decisions());
            let img = trace.overlay(&base);
            write_file(&self.path("trace.ppm".into()), |w| write_ppm(w, &img))?;
            log::info!("{} cells decided moving at least once", trace.count());
        }
        Ok(())
    }
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("cannot write {}", path.display()))
}
