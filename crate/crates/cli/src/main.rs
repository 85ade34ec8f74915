//! Command-line front end: build the reference DB, repair an app tree,
//! re-verify applied patches.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use contrast_mend_core::pipeline::{
    apply_patches, copy_tree, repair_app, verify, PatchReport, RepairRequest,
};
use contrast_mend_core::refdb::{build_from_apps_dir, ReferenceDb};
use contrast_mend_core::report::{parse_issue_report, parse_ui_dump, ParsedReport, UiNode};

#[derive(Parser)]
#[command(name = "contrast-mend", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reference DB of issue-free color pairs from app captures
    BuildDb {
        /// Directory holding one capture directory per app
        #[arg(long)]
        apps: PathBuf,
        /// Output JSONL database
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair a decompiled app tree against a detection report
    Repair {
        /// Decompiled tree (apktool output layout)
        #[arg(long)]
        app: PathBuf,
        /// Detection report (JSON, see docs/report-schema.md)
        #[arg(long)]
        report: PathBuf,
        /// Reference DB (JSONL)
        #[arg(long)]
        db: PathBuf,
        /// Destination for the repaired tree
        #[arg(long)]
        out: PathBuf,
        /// Issue indexes to skip (repeatable)
        #[arg(long = "skip-issue")]
        skip_issue: Vec<usize>,
        /// Directory of UI dumps (<activity>.xml); default <report dir>/dumps
        #[arg(long)]
        dumps: Option<PathBuf>,
        /// Directory of page screenshots (<activity>.png); default <report dir>/screens
        #[arg(long)]
        screens: Option<PathBuf>,
        /// Where to write the patch report; default <out>/patch-report.json
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Re-check the contrast of previously applied patches
    Verify {
        /// Repaired tree
        #[arg(long)]
        app: PathBuf,
        /// The detection report the repair ran against
        #[arg(long)]
        report: PathBuf,
        /// The patch report produced by `repair`
        #[arg(long)]
        patches: PathBuf,
    },
    /// Apply a previously generated patch report to a tree
    Apply {
        /// Tree to patch in place
        #[arg(long)]
        app: PathBuf,
        /// The patch report produced by `repair`
        #[arg(long)]
        patches: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode> {
    let args = Args::parse();
    match args.command {
        Command::BuildDb { apps, out } => {
            let (db, stats) = build_from_apps_dir(&apps)
                .with_context(|| format!("building DB from {}", apps.display()))?;
            db.save(&out)?;
            println!(
                "{} records from {} apps ({} below admission contrast, {} monochrome crops, {} issue components excluded)",
                db.len(),
                stats.apps,
                stats.rejected_contrast,
                stats.skipped_monochrome,
                stats.skipped_issue_components
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Repair {
            app,
            report,
            db,
            out,
            skip_issue,
            dumps,
            screens,
            report_out,
        } => {
            let parsed = load_report(&report)?;
            let db = ReferenceDb::load(&db)?;
            let report_dir = report.parent().unwrap_or(Path::new(".")).to_path_buf();
            let dumps_dir = dumps.unwrap_or_else(|| report_dir.join("dumps"));
            let screens_dir = screens.unwrap_or_else(|| report_dir.join("screens"));
            let dumps = load_dumps(&dumps_dir)?;
            let screenshots = load_screens(&screens_dir, &parsed, &report_dir)?;

            if out != app {
                copy_tree(&app, &out)?;
            }
            let result = repair_app(&RepairRequest {
                tree_root: &out,
                report: &parsed,
                dumps: &dumps,
                screenshots: &screenshots,
                db: &db,
                skip_issues: &skip_issue,
            })?;

            let report_out = report_out.unwrap_or_else(|| out.join("patch-report.json"));
            let json = serde_json::to_string_pretty(&result)?;
            std::fs::write(&report_out, json.as_bytes())
                .with_context(|| format!("writing {}", report_out.display()))?;

            for w in &parsed.warnings {
                println!("warning: {w}");
            }
            println!(
                "{} patches, {} issues already satisfied, {} unrepaired, {} skipped; repair rate {:.2}%",
                result.patches.len(),
                result.already_satisfied.len(),
                result.unrepaired.len(),
                result.skipped.len(),
                result.repair_rate * 100.0
            );
            for u in &result.unrepaired {
                println!("unrepaired issue {}: {:?} ({})", u.issue_index, u.reason, u.detail);
            }
            for v in &result.verification {
                println!(
                    "issue {}: contrast {:.2} {}",
                    v.issue_index,
                    v.new_contrast,
                    if v.pass { "PASS" } else { "FAIL" }
                );
            }
            if result.unrepaired.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Verify {
            app,
            report,
            patches,
        } => {
            let parsed = load_report(&report)?;
            let patch_report = load_patches(&patches)?;
            let entries = verify(&app, &parsed.issues, &patch_report.patches)?;
            let mut all_pass = true;
            for v in &entries {
                all_pass &= v.pass;
                println!(
                    "issue {}: contrast {:.2} {}",
                    v.issue_index,
                    v.new_contrast,
                    if v.pass { "PASS" } else { "FAIL" }
                );
            }
            if all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Apply { app, patches } => {
            let patch_report = load_patches(&patches)?;
            apply_patches(&app, &patch_report.patches)?;
            println!("applied {} patches", patch_report.patches.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_report(path: &Path) -> Result<ParsedReport> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_issue_report(&text)?)
}

fn load_patches(path: &Path) -> Result<PatchReport> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let report: PatchReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(report)
}

fn load_dumps(dir: &Path) -> Result<BTreeMap<String, UiNode>> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("xml"))
        .collect();
    files.sort();
    for path in files {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        match parse_ui_dump(&text) {
            Ok(node) => {
                out.insert(stem, node);
            }
            Err(e) => bail!("parsing dump {}: {e}", path.display()),
        }
    }
    Ok(out)
}

fn load_screens(
    dir: &Path,
    report: &ParsedReport,
    report_dir: &Path,
) -> Result<BTreeMap<String, image::RgbaImage>> {
    let mut out = BTreeMap::new();
    if dir.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("png"))
            .collect();
        files.sort();
        for path in files {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_default();
            let img = image::open(&path)
                .with_context(|| format!("reading {}", path.display()))?
                .to_rgba8();
            out.insert(stem, img);
        }
    }
    // per-issue screenshot paths are relative to the report file
    for issue in &report.issues {
        let Some(rel) = issue.screenshot.as_ref() else {
            continue;
        };
        if out.contains_key(&issue.activity) {
            continue;
        }
        let path = report_dir.join(rel);
        if let Ok(img) = image::open(&path) {
            out.insert(issue.activity.clone(), img.to_rgba8());
        }
    }
    Ok(out)
}
