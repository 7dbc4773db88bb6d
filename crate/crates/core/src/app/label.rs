use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{AppError, AppRecord, Criteria, Decision};

pub const CRITERIA_PROMPTS: [&str; 4] = [
    "1) Is the developer a public body?",
    "2) Does the app name fit a public service?",
    "3) Does the app id carry a public-service marker (gouv, a city name, ...)?",
    "4) Does the app link to a public-service website?",
];

/// One persisted labeling outcome: `app_id,c1,c2,c3,c4,decision`, criteria
/// as `y`, `n` or empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub app_id: String,
    pub criteria: Criteria,
    pub decision: Decision,
}

fn yn(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "y",
        Some(false) => "n",
        None => "",
    }
}

fn parse_yn(s: &str) -> Result<Option<bool>, String> {
    match s.trim() {
        "y" => Ok(Some(true)),
        "n" => Ok(Some(false)),
        "" => Ok(None),
        other => Err(format!("bad criterion answer {other:?}")),
    }
}

/// Append-only writer for the answer log.
pub struct AnswerLog<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> AnswerLog<W> {
    pub const HEADER: [&'static str; 6] = ["app_id", "c1", "c2", "c3", "c4", "decision"];

    /// `write_header` should be false when appending to a non-empty log.
    pub fn new(out: W, write_header: bool) -> Result<Self, AppError> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if write_header {
            out.write_record(Self::HEADER).map_err(csv_io)?;
            out.flush()?;
        }
        Ok(AnswerLog { out })
    }

    pub fn record(&mut self, entry: &LogEntry) -> Result<(), AppError> {
        let c = entry.criteria.as_array();
        let decision = entry.decision.to_string();
        self.out
            .write_record([entry.app_id.as_str(), yn(c[0]), yn(c[1]), yn(c[2]), yn(c[3]), decision.as_str()])
            .map_err(csv_io)?;
        // Flushed per line so an interrupted session loses nothing.
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, AppError> {
        self.out.into_inner().map_err(|e| AppError::Io(e.into_error()))
    }
}

fn csv_io(e: csv::Error) -> AppError {
    AppError::Io(std::io::Error::other(e))
}

/// Parses an answer log. The header row is optional.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, AppError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 1;
        let row = row.map_err(|e| AppError::BadLog { line, reason: e.to_string() })?;
        if idx == 0 && row.get(0) == Some("app_id") {
            continue;
        }
        if row.len() != 6 {
            return Err(AppError::BadLog { line, reason: format!("expected 6 fields, got {}", row.len()) });
        }
        let bad = |reason: String| AppError::BadLog { line, reason };
        let criteria = Criteria {
            c1: parse_yn(&row[1]).map_err(bad)?,
            c2: parse_yn(&row[2]).map_err(bad)?,
            c3: parse_yn(&row[3]).map_err(bad)?,
            c4: parse_yn(&row[4]).map_err(bad)?,
        };
        let decision = row[5].parse::<Decision>().map_err(bad)?;
        out.push(LogEntry { app_id: row[0].to_string(), criteria, decision });
    }
    Ok(out)
}

/// Applies a persisted log to `apps`; the last entry per app wins. Entries
/// for unknown apps are ignored. Returns how many apps were restored.
pub fn replay_log(apps: &mut [AppRecord], log_text: &str) -> Result<usize, AppError> {
    let mut latest: BTreeMap<String, LogEntry> = BTreeMap::new();
    for entry in parse_log(log_text)? {
        latest.insert(entry.app_id.clone(), entry);
    }
    let mut restored = 0;
    for app in apps.iter_mut() {
        if let Some(entry) = latest.get(&app.app_id) {
            app.criteria = entry.criteria;
            app.decide(entry.decision)?;
            restored += 1;
        }
    }
    Ok(restored)
}

enum Answer {
    Value(String),
    Eof,
}

fn ask<R: BufRead, W: Write>(input: &mut R, out: &mut W, prompt: &str, allowed: &[&str]) -> Result<Answer, AppError> {
    loop {
        write!(out, "{prompt} [{}] ", allowed.join("/"))?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(Answer::Eof);
        }
        let answer = line.trim().to_lowercase();
        if allowed.contains(&answer.as_str()) {
            return Ok(Answer::Value(answer));
        }
        writeln!(out, "please answer {}", allowed.join(" or "))?;
    }
}

/// Terminal labeling loop. Apps that already carry a decision (e.g. restored
/// with [`replay_log`]) are passed over. For each remaining app the four
/// criteria are asked as y/n, then the decision as y/n/t; `t` rejects the
/// app and skips the rest of its keyword group. End of input stops the loop
/// and leaves the current and remaining apps undecided.
pub fn label_interactively<R: BufRead, W: Write, L: Write>(
    apps: &mut [AppRecord],
    mut input: R,
    mut out: W,
    log: &mut AnswerLog<L>,
) -> Result<(), AppError> {
    let mut idx = 0;
    while idx < apps.len() {
        if apps[idx].decision != Decision::Undecided {
            idx += 1;
            continue;
        }
        let app = &apps[idx];
        writeln!(out, "\n{}\n  developer: {}\n  id: {}", app.title, app.developer, app.app_id)?;
        writeln!(out, "  website: {}", app.website.as_deref().unwrap_or("-"))?;

        let mut criteria = Criteria::default();
        for (i, prompt) in CRITERIA_PROMPTS.iter().enumerate() {
            match ask(&mut input, &mut out, prompt, &["y", "n"])? {
                Answer::Value(v) => criteria.set(i, v == "y"),
                Answer::Eof => return Ok(()),
            }
        }
        let decision = loop {
            match ask(&mut input, &mut out, "Public service? (t: next keyword)", &["y", "n", "t"])? {
                Answer::Eof => return Ok(()),
                Answer::Value(v) if v == "y" => {
                    if criteria.rule() == Some(true) {
                        break Decision::PublicService;
                    }
                    writeln!(out, "the answers above do not allow a public-service decision")?;
                }
                Answer::Value(v) if v == "n" => break Decision::NotPublicService,
                Answer::Value(_) => break Decision::Skipped,
            }
        };

        let app = &mut apps[idx];
        app.criteria = criteria;
        let skip_group = decision == Decision::Skipped;
        let decision = if skip_group { Decision::NotPublicService } else { decision };
        app.decide(decision)?;
        log.record(&LogEntry { app_id: app.app_id.clone(), criteria, decision })?;

        if skip_group {
            if let Some(keyword) = app.keyword.clone() {
                for other in apps[idx + 1..].iter_mut() {
                    if other.decision == Decision::Undecided && other.keyword.as_deref() == Some(keyword.as_str()) {
                        other.decision = Decision::Skipped;
                        log.record(&LogEntry {
                            app_id: other.app_id.clone(),
                            criteria: other.criteria,
                            decision: Decision::Skipped,
                        })?;
                    }
                }
            }
        }
        idx += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apps() -> Vec<AppRecord> {
        let mut v = Vec::new();
        for (id, kw) in [("fr.gouv.a", "gouv"), ("fr.gouv.b", "gouv"), ("fr.gouv.c", "gouv"), ("fr.lyon.d", "lyon")] {
            let mut a = AppRecord::new(id);
            a.title = id.to_uppercase();
            a.keyword = Some(kw.into());
            v.push(a);
        }
        v
    }

    fn run(apps: &mut [AppRecord], answers: &str) -> String {
        let mut log = AnswerLog::new(Vec::new(), true).unwrap();
        let mut screen = Vec::new();
        label_interactively(apps, answers.as_bytes(), &mut screen, &mut log).unwrap();
        String::from_utf8(log.into_inner().unwrap()).unwrap()
    }

    #[test]
    fn yes_path() {
        let mut a = apps();
        let log = run(&mut a[..1], "y\ny\nn\nn\ny\n");
        assert_eq!(a[0].decision, Decision::PublicService);
        assert_eq!(a[0].criteria, Criteria::all(true, true, false, false));
        assert_eq!(log, "app_id,c1,c2,c3,c4,decision\nfr.gouv.a,y,y,n,n,public-service\n");
    }

    #[test]
    fn next_skips_group() {
        let mut a = apps();
        run(&mut a, "n\nn\nn\nn\nt\ny\nn\nn\ny\ny\n");
        assert_eq!(a[0].decision, Decision::NotPublicService);
        assert_eq!(a[1].decision, Decision::Skipped);
        assert_eq!(a[2].decision, Decision::Skipped);
        assert_eq!(a[3].decision, Decision::PublicService);
    }

    #[test]
    fn eof_leaves_undecided() {
        let mut a = apps();
        run(&mut a, "");
        assert!(a.iter().all(|x| x.decision == Decision::Undecided));
        let mut a = apps();
        run(&mut a, "y\nn\nn\nn\nn\ny\ny");
        assert_eq!(a[0].decision, Decision::NotPublicService);
        assert!(a[1..].iter().all(|x| x.decision == Decision::Undecided));
        assert_eq!(a[1].criteria, Criteria::default());
    }

    #[test]
    fn yes_against_rule_reprompts() {
        let mut a = apps();
        run(&mut a[..1], "n\ny\ny\nn\ny\nmaybe\nn\n");
        assert_eq!(a[0].decision, Decision::NotPublicService);
    }

    #[test]
    fn invalid_criterion_answer_reprompts() {
        let mut a = apps();
        run(&mut a[..1], "oui\ny\ny\nn\nn\ny\n");
        assert_eq!(a[0].decision, Decision::PublicService);
    }

    #[test]
    fn replay_reproduces_and_resumes() {
        let mut first = apps();
        let log = run(&mut first, "n\nn\nn\nn\nt\ny\nn\nn\ny\ny\n");
        let mut replayed = apps();
        assert_eq!(replay_log(&mut replayed, &log).unwrap(), 4);
        assert_eq!(serde_json::to_string(&replayed).unwrap(), serde_json::to_string(&first).unwrap());

        // Interrupted session, then resumed with the remaining answers.
        let mut part = apps();
        let log1 = run(&mut part, "n\nn\nn\nn\nt\n");
        let mut resumed = apps();
        replay_log(&mut resumed, &log1).unwrap();
        let mut log2 = AnswerLog::new(Vec::new(), false).unwrap();
        label_interactively(&mut resumed, "y\nn\nn\ny\ny\n".as_bytes(), Vec::new(), &mut log2).unwrap();
        assert_eq!(resumed, first);
    }

    #[test]
    fn bad_logs() {
        let mut a = apps();
        assert!(replay_log(&mut a, "fr.gouv.a,y,n\n").is_err());
        assert!(replay_log(&mut a, "fr.gouv.a,x,n,n,n,skipped\n").is_err());
        assert!(replay_log(&mut a, "fr.gouv.a,n,n,n,n,public-service\n").is_err());
        assert_eq!(replay_log(&mut a, "unknown.app,,,,,skipped\n").unwrap(), 0);
    }
}
